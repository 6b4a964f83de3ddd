import pytest
from hypothesis import given, settings, strategies as st

from formalmod.formal_group import fplus, height, is_homomorphism
from formalmod.lubin_tate import (LubinTateError, canonical_frobenius, guard_digits, lt_bracket, lt_group, lt_iso,
                                  lt_residual, lt_validate)
from formalmod.series import CapError, Series1, Series2

from conftest import lt_module, ring


def test_guard_digits():
    assert guard_digits(2, 32) == 5
    assert guard_digits(9, 89) == 2
    assert guard_digits(3, 1) == 0


def test_q2_gives_multiplicative_law_exactly():
    R = ring(2, 1, 12)
    m = lt_group(canonical_frobenius(R, 2, 32))
    assert m.F == Series2.from_dict(R, 32, {(1, 0): 1, (0, 1): 1, (1, 1): 1})
    assert m.F.prec == 12


def test_canonical_group_low_degree_q3():
    # degree-3 part of F for 3X + X^3 is (X^3 + Y^3 - (X + Y)^3) / (3 - 27)
    m = lt_module(3, 3, 1, 12, 17)
    R = m.ring
    inv = R(-8).inverse()  # (3 - 27) / 3; the numerator carries the other factor 3
    assert m.F.coeff(1, 1) == R.zero
    assert m.F.coeff(2, 1) == R(-1) * inv and m.F.coeff(1, 2) == R(-1) * inv


@pytest.mark.parametrize("p,q,f", [(2, 2, 1), (2, 4, 2), (3, 3, 1), (3, 9, 2)])
def test_residuals_vanish(p, q, f):
    m = lt_module(p, q, f, 12, q * q + 8)
    assert lt_residual(m).is_zero()
    assert height(m) == f


def test_precision_is_certified_at_full_N():
    lo = lt_module(2, 4, 2, 10, 17)
    hi = lt_module(2, 4, 2, 20, 17)
    assert hi.F.reduce_to(10) == lo.F


def test_validation_errors():
    R = ring(2, 1, 8)
    with pytest.raises(LubinTateError) as e:
        lt_validate(Series1(R, [0, 4, 1], 4), 2)
    assert e.value.degree == 1
    with pytest.raises(LubinTateError) as e:
        lt_validate(Series1(R, [0, 2, 3, 1], 4), 2)
    assert e.value.degree == 3
    with pytest.raises(LubinTateError):
        lt_validate(Series1(R, [0, 2, 2], 4), 2)
    with pytest.raises(CapError):
        lt_validate(Series1(R, [0, 2, 1], 1), 2)
    with pytest.raises(ValueError):
        lt_validate(Series1(R, [0, 2, 0, 1], 4), 3)


def test_bracket_of_integers_matches_binomials():
    R = ring(2, 1, 12)
    frob = canonical_frobenius(R, 2, 16)
    assert lt_bracket(frob, 3) == Series1(R, [0, 3, 3, 1], 16)
    assert lt_bracket(frob, 1) == Series1.X(R, 16)


def test_bracket_of_teichmuller_is_omega():
    m = lt_module(2, 4, 2, 12, 17)
    w = m.ring.teichmuller(m.ring.gen)
    br = lt_bracket(m.frobenius, w)
    assert br.compose(br).compose(br) == Series1.X(m.ring, 17)


def test_iso_between_frobenius_series():
    R = ring(3, 1, 12)
    f = canonical_frobenius(R, 3, 17)
    g = lt_validate(Series1(R, [0, 3, 6, 1, 3], 17), 3)
    Ff, Fg = lt_group(f), lt_group(g)
    u = lt_iso(f, g)
    assert u.compose(f.f) == g.f.compose(u)
    assert is_homomorphism(u, Ff.F, Fg.F) is None


def test_iso_rejects_mismatched_q():
    R = ring(2, 1, 12)
    with pytest.raises(ValueError):
        lt_iso(canonical_frobenius(R, 2, 16), canonical_frobenius(R, 4, 16))


elements = st.lists(st.integers(0, 2**12 - 1), min_size=2, max_size=2)


@settings(max_examples=30)
@given(elements, elements)
def test_bracket_is_a_ring_map(a, b):
    m = lt_module(2, 4, 2, 12, 17)
    frob = m.frobenius
    exact = ring(2, 2, 40)  # sums and products formed without reduction mod 2^12
    a, b = exact(a), exact(b)
    A, B = lt_bracket(frob, a), lt_bracket(frob, b)
    assert lt_bracket(frob, a + b) == fplus(m, A, B)
    assert lt_bracket(frob, a * b) == A.compose(B)
    assert is_homomorphism(A, m.F, m.F, m.fgl.powers()) is None


def test_bracket_depends_on_digits_beyond_n():
    # [a] mod p^N is not determined by a mod p^N: the Teichmuller g^2 and its
    # coordinate truncation 4095 + 4095 g give different brackets mod 2^12
    m = lt_module(2, 4, 2, 12, 17)
    exact = ring(2, 2, 40)
    g2 = exact.gen * exact.gen
    assert lt_bracket(m.frobenius, g2) == Series1(m.ring, [0, m.ring(g2)], 17)
    assert lt_bracket(m.frobenius, m.ring(g2)) != lt_bracket(m.frobenius, g2)
