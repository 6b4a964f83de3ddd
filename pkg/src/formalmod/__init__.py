"""Formal group laws and formal modules over unramified p-adic rings, at finite precision."""
from .padic import AtLeast, FieldElement, PrecisionError, RingElement, UnramifiedRing, teichmuller, valuation
from .series import CapError, FracSeries1, Series1, Series2
from .formal_group import (AxiomError, FormalGroupLaw, FormalModule, HeightBound, RingTooSmall, additive_module,
                           fexp, flog, fgl_verify, fplus, height, int_mult, inv_F, module_structure_solve,
                           multiplicative_module)
from .lubin_tate import FrobeniusSeries, LubinTateError, canonical_frobenius, lt_bracket, lt_group, lt_iso, lt_validate
from .endo import c_integral_test, endo_ring, hom_report, isomorphism_search, saturation_check
from .torsion import division_field_report, m_sequence, newton_polygon, pi_power, torsion_valuations
from .galois import almost_semisimple_check, derived_series, unit_group_image

__version__ = "0.1.0"
