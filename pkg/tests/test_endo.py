import pytest
from hypothesis import given, settings, strategies as st

from formalmod.endo import (EndoRingReport, c_integral_test, endo_ring, hom_report, isomorphism_search,
                            saturation_check)
from formalmod.formal_group import additive_module, fexp, flog, is_homomorphism, transport
from formalmod.lubin_tate import lt_bracket
from formalmod.padic import FieldElement
from formalmod.series import Series1

from conftest import lt_module, mult_module, ring


def residues_mod(R, m):
    return {c.coeffs for c in R.with_precision(m).elements_mod(m)}


# -- c-map test ------------------------------------------------------------------

def test_trivial_c_values():
    M = mult_module(2, 1, 12, 16)
    r0 = c_integral_test(M, M, 0)
    assert r0.integral and r0.witness.is_zero()
    r1 = c_integral_test(M, M, 1)
    assert r1.integral and r1.witness == Series1.X(M.ring, 16)


def test_binomial_witness():
    M = mult_module(2, 1, 12, 16)
    r = c_integral_test(M, M, 3)
    assert r.integral and r.witness == Series1(M.ring, [0, 3, 3, 1], 16)


def test_nonintegral_reports_degree():
    M = mult_module(2, 2, 12, 12)
    r = c_integral_test(M, M, M.ring.gen)
    assert r.integral is False and r.degree == 2 and r.witness is None


def test_agrees_with_exp_log_oracle():
    # high precision so that exp o (c log) keeps enough digits to decide
    R = ring(2, 2, 30)
    M = mult_module(2, 2, 30, 10)
    L, E = flog(M), fexp(M)
    for c, integral in [(R(3), True), (R(5), True), (R.gen, False), (R(1) + 2 * R.gen, False)]:
        S = E.compose(L.scale(FieldElement.from_raw(R, c.raw)))
        res = c_integral_test(M, M, c)
        assert res.integral is integral
        if integral:
            assert S.is_integral() and S.agrees_with(res.witness.to_frac())
        else:
            assert S.first_nonintegral() == res.degree


def test_different_rings_rejected():
    with pytest.raises(ValueError):
        c_integral_test(mult_module(2, 1, 12, 16), mult_module(2, 2, 12, 16), 1)


# -- endomorphism rings ----------------------------------------------------------

def test_multiplicative_endo_ring():
    M = mult_module(2, 1, 12, 16)
    rep = endo_ring(M, 3)
    assert rep.residues() == residues_mod(M.ring, 3)
    assert rep.residue_degree == 1 and rep.full_height and rep.saturated


def test_multiplicative_over_bigger_ring_detects_only_zp():
    M = mult_module(2, 2, 12, 17)
    rep = endo_ring(M, 2, exhaustive=True)
    assert rep.residues() == {(a, 0) for a in range(4)}
    assert rep.residue_degree == 1 and rep.full_height  # height 1


def test_lubin_tate_full_height_against_brackets():
    m = lt_module(2, 4, 2, 12, 17)
    rep = endo_ring(m, 2)
    assert rep.residues() == residues_mod(m.ring, 2)
    assert rep.residue_degree == 2 and rep.full_height and rep.saturated
    for c in rep.found_c:
        lt_bracket(m.frobenius, c)  # raises if the bracket does not exist


def test_pruned_and_exhaustive_agree():
    m = lt_module(2, 4, 2, 12, 17)
    assert endo_ring(m, 2).residues() == endo_ring(m, 2, exhaustive=True).residues()


def test_restriction_to_small_ring():
    big = endo_ring(lt_module(2, 4, 2, 12, 17), 2)
    small = endo_ring(lt_module(2, 4, 1, 12, 17), 2)
    assert small.residues() == {(a,) for a in range(4)}
    assert small.residues() == {c[:1] for c in big.residues() if c[1] == 0}
    assert not small.full_height


def test_saturation_examples():
    R = ring(2, 2, 12).with_precision(3)
    zp = [R([a, 0]) for a in range(8)]
    assert saturation_check(EndoRingReport(3, zp, 1, True, False))
    # Z_2 + 2 O_E: contains 2g but not g
    order = [R([a, 2 * b]) for a in range(8) for b in range(4)]
    assert not saturation_check(EndoRingReport(3, order, 1, False, False))
    # depth 1 reports cannot be judged
    assert not saturation_check(EndoRingReport(1, zp, 1, True, False))


# -- isomorphisms and homomorphisms ----------------------------------------------

def test_isomorphism_identity():
    m = lt_module(2, 4, 2, 12, 17)
    res = isomorphism_search(m, m)
    assert res and res.series == Series1.X(m.ring, 17)


def test_isomorphism_lubin_tate_vs_multiplicative():
    M = mult_module(2, 1, 12, 32)
    F = lt_module(2, 2, 1, 12, 32)
    res = isomorphism_search(F, M)
    assert res
    assert is_homomorphism(res.series, F.F, M.F) is None


def test_isomorphism_height_obstruction():
    A = additive_module(ring(2, 1, 12), 16)
    res = isomorphism_search(A, mult_module(2, 1, 12, 16))
    assert not res and "heights differ" in res.reason


def test_hom_report():
    M = mult_module(2, 1, 12, 16)
    rep = hom_report(M, M)
    assert rep.nonzero and rep.kernel_size_hint == 1
    G = transport(M, Series1(M.ring, [0, 3, 1], 16))
    rep = hom_report(M, G)
    assert rep.nonzero and is_homomorphism(rep.witness, M.F, G.F) is None


# -- properties ------------------------------------------------------------------

coords = st.lists(st.integers(0, 2**12 - 1), min_size=2, max_size=2)


@st.composite
def lt_family(draw, n):
    base = lt_module(2, 4, 2, 12, 12)
    R = base.ring
    out = []
    for _ in range(n):
        unit = R([1 + 2 * draw(st.integers(0, 100)), draw(st.integers(0, 7))])
        u = Series1(R, [0, unit] + [R(draw(coords)) for _ in range(3)], 12)
        out.append(transport(base, u))
    return out


@settings(max_examples=30)
@given(lt_family(3), coords, coords)
def test_composition_closure(mods, c, d):
    F, G, H = mods
    R = F.ring
    c, d = R(c), R(d)
    r1, r2 = c_integral_test(F, G, c), c_integral_test(G, H, d)
    if r1 and r2:
        r3 = c_integral_test(F, H, d * c)
        assert r3.integral
        assert r3.witness == r2.witness.compose(r1.witness)


@settings(max_examples=8)
@given(lt_family(1))
def test_isomorphic_modules_share_endo_flags(mods):
    (G,) = mods
    base = lt_module(2, 4, 2, 12, 12)
    a, b = endo_ring(base, 2), endo_ring(G, 2)
    assert (a.residue_degree, a.full_height) == (b.residue_degree, b.full_height)
    assert isomorphism_search(base, G)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_detected_set_is_a_ring_at_each_depth(m):
    rep = endo_ring(mult_module(2, 2, 12, 12), m)
    assert rep.residues() == {(a, 0) for a in range(2**m)}
    assert (1, 0) in rep.residues()
