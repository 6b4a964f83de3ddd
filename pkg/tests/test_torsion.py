from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from formalmod.formal_group import additive_module, transport
from formalmod.padic import PrecisionError
from formalmod.series import CapError, Series1
from formalmod.torsion import (division_field_report, m_sequence, newton_polygon, pi_power,
                               torsion_valuations)

from conftest import lt_module, mult_module, ring


# -- polygons ------------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 5])
def test_eisenstein_polygon(p):
    R = ring(p, 1, 8)
    poly = newton_polygon(Series1(R, [0, p] + [0] * (p - 2) + [1], p), (1, p))
    assert poly.segments == [(Fraction(1, p - 1), p - 1)]


def test_single_point_polygon_is_empty(r2):
    assert newton_polygon(Series1.X(r2, 1), (1, 1)).segments == []


def test_multiplicative_four_polygon(r2):
    poly = newton_polygon(Series1(r2, [0, 4, 6, 4, 1], 4), (1, 4))
    assert poly.segments == [(Fraction(1), 1), (Fraction(1, 2), 2)]
    assert poly.restrict(2, 4) == [(Fraction(1, 2), 2)]


def test_collinear_points_merge(r2):
    # valuations 2, 1, 0 lie on one line
    poly = newton_polygon(Series1(r2, [0, 4, 2, 1], 3), (1, 3))
    assert poly.segments == [(Fraction(1), 2)]


def test_unknown_endpoint_is_rejected():
    R = ring(2, 1, 3)
    # 8 is zero at precision 3, so the left endpoint of the hull is unknown
    with pytest.raises(PrecisionError, match="insufficient precision"):
        newton_polygon(Series1(R, [0, 8, 0, 1], 3), (1, 3))
    with pytest.raises(PrecisionError):
        newton_polygon(Series1(R, [0, 0, 1], 2), (1, 2))


def test_interior_unknowns_above_the_hull_are_fine():
    R = ring(2, 1, 3)
    # interior coefficients vanish mod 2^3, above every chord between exact points
    poly = newton_polygon(Series1(R, [0, 4, 8, 0, 0, 0, 0, 1], 7), (1, 7))
    assert poly.segments == [(Fraction(1, 3), 6)]


# -- torsion -------------------------------------------------------------------

def test_pi_power_binomial(r2):
    M = mult_module(2, 1, 12, 16)
    assert pi_power(M, 1) == M.pi_series
    assert pi_power(M, 2) == Series1(r2, [0, 4, 6, 4, 1], 16)
    assert pi_power(M, 3)[1] == r2(8)


def test_pi_power_cap_enforced():
    with pytest.raises(CapError, match="need D >= 64"):
        pi_power(mult_module(2, 1, 12, 16), 6)


def test_uncertified_height_rejected():
    with pytest.raises(PrecisionError):
        torsion_valuations(additive_module(ring(2, 1, 12), 16), 1)


def test_cyclotomic_valuations_p3():
    M = mult_module(3, 1, 12, 16)
    t1, t2 = torsion_valuations(M, 1), torsion_valuations(M, 2)
    assert (t1.new_point_count, t1.new_valuation) == (2, Fraction(1, 2))
    assert (t2.new_point_count, t2.new_valuation) == (6, Fraction(1, 6))
    assert t2.cumulative_count == 8


def test_lubin_tate_levels():
    m = lt_module(3, 3, 1, 12, 17)
    assert torsion_valuations(m, 1).new_valuation == Fraction(1, 2)
    assert torsion_valuations(m, 2).new_valuation == Fraction(1, 6)
    m4 = lt_module(2, 4, 2, 12, 17)
    t = torsion_valuations(m4, 1)
    assert (t.new_point_count, t.new_valuation) == (3, Fraction(1, 3))


def test_level_zero_is_empty():
    t = torsion_valuations(mult_module(3, 1, 12, 16), 0)
    assert t.new_point_count == 0 and t.cumulative_count == 0 and t.new_valuation is None


# -- division fields -------------------------------------------------------------

def test_division_field_q4():
    r = division_field_report(lt_module(2, 4, 2, 12, 17), 1)
    assert (r.predicted_degree, r.ramification_index, r.single_generator, r.m_value) == (3, 3, True, 1)
    assert r.totally_ramified


def test_division_field_q3_level2():
    r = division_field_report(lt_module(3, 3, 1, 12, 17), 2)
    assert (r.predicted_degree, r.ramification_index, r.m_value) == (6, 6, 1)


def test_division_field_trivial_level():
    r = division_field_report(lt_module(2, 2, 1, 12, 16), 1)
    assert r.predicted_degree == 1 and r.m_value == 1


def test_non_full_height_degrades_to_bounds():
    m = lt_module(2, 4, 1, 12, 17)  # height 2 over Z_2: End detects only Z_2
    r = division_field_report(m, 1)
    assert r.predicted_degree is None and r.m_value is None
    assert (r.m_lower, r.m_upper) == (1, 2)
    assert r.ramification_index == 3  # still a valid lower bound
    seq = m_sequence(m, 2)
    assert all(v is None for _, _, v, _ in seq.entries)


def test_m_sequence_truncates_at_cap():
    seq = m_sequence(lt_module(3, 3, 1, 12, 17), 5)
    assert [v for _, _, v, _ in seq.entries] == [1, 1]
    assert seq.truncated and seq.last_certified_level == 2 and seq.monotone
    assert "need D >= 27" in seq.message


# -- properties ------------------------------------------------------------------

@settings(max_examples=20)
@given(st.integers(1, 7), st.integers(0, 4095), st.integers(0, 4095))
def test_reports_invariant_under_isomorphism(lin, a2, a3):
    base = lt_module(2, 2, 1, 12, 16)
    u = Series1(base.ring, [0, 2 * lin + 1, a2, a3], 16)
    other = transport(base, u)
    for n in (1, 2, 3):
        assert torsion_valuations(other, n) == torsion_valuations(base, n)


@pytest.mark.parametrize("p,q,f,n", [(2, 2, 1, 4), (3, 3, 1, 3), (2, 4, 2, 2)])
def test_count_conservation_and_divisibility(p, q, f, n):
    m = lt_module(p, q, f, 12, q**n)
    total = 0
    for k in range(1, n + 1):
        t = torsion_valuations(m, k)
        total += t.new_point_count
        r = division_field_report(m, k)
        assert r.predicted_degree % r.ramification_index == 0
    assert total == q**n - 1
