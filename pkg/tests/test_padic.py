import pytest
from hypothesis import given, settings, strategies as st

from formalmod.padic import (AtLeast, FieldElement, PrecisionError, UnramifiedRing, smallest_irreducible,
                             teichmuller, valuation, vp_int)

from conftest import ring

RINGS = [(2, 1, 12), (2, 2, 12), (3, 1, 8), (3, 2, 8), (5, 1, 6), (2, 3, 8)]


# -- oracles -------------------------------------------------------------------

def test_modulus_choice():
    assert smallest_irreducible(2, 1) == (0,)
    assert smallest_irreducible(2, 2) == (1, 1)      # X^2 + X + 1
    assert smallest_irreducible(3, 2) == (1, 0)      # X^2 + 1
    assert smallest_irreducible(2, 3) == (1, 0, 1)   # X^3 + X^2 + 1
    assert smallest_irreducible(5, 2) == (1, 1)      # X^2 + X + 1 (-3 is a non-square mod 5)


def test_generator_square_mod_16():
    R = UnramifiedRing(2, 2, 4)
    g = R.gen
    assert str(g * g) == "15 + 15*g (mod 2^4)"


def test_teichmuller_mod_25():
    R = UnramifiedRing(5, 1, 2)
    assert teichmuller(R, 2).coeffs == (7,)


def test_teichmuller_of_generator_is_cube_root():
    R = UnramifiedRing(2, 2, 10)
    w = teichmuller(R, R.gen)
    assert w == R.gen  # g^2 + g + 1 = 0 exactly
    assert w ** 3 == R.one


def test_valuations():
    R = UnramifiedRing(3, 1, 4)
    assert valuation(R(18)) == 2
    assert valuation(R(0)) == AtLeast(4)
    assert str(valuation(R(0))) == ">= 4"
    assert vp_int(0, 3) is None and vp_int(54, 3) == 3


def test_nonunit_inverse():
    R = UnramifiedRing(3, 1, 4)
    with pytest.raises(ZeroDivisionError):
        R(3).inverse()


def test_text_roundtrip_examples():
    R = UnramifiedRing(2, 2, 4)
    assert R.parse("3 + 2*g (mod 2^4)").coeffs == (3, 2)
    assert R.parse("-g").coeffs == (0, 15)


def test_field_element_division():
    R = UnramifiedRing(3, 1, 4)
    z = FieldElement.from_int(R, 1, 4) / FieldElement.from_int(R, 3, 4)
    assert z.valuation() == -1
    assert z.absprec == 2


def test_field_zero_is_a_bound():
    R = UnramifiedRing(2, 1, 6)
    z = FieldElement.from_int(R, 64, 6)
    assert z.is_zero and z.valuation() == AtLeast(6)


# -- properties ----------------------------------------------------------------

@st.composite
def elements(draw, count=1, unit=False):
    p, f, N = draw(st.sampled_from(RINGS))
    R = ring(p, f, N)
    out = []
    for _ in range(count):
        coeffs = draw(st.lists(st.integers(0, R.pN - 1), min_size=f, max_size=f))
        if unit and all(c % p == 0 for c in coeffs):
            coeffs[0] += 1
        out.append(R(coeffs))
    return out


@settings(max_examples=100)
@given(elements(3))
def test_ring_axioms(xs):
    a, b, c = xs
    R = a.ring
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a and a + b == b + a
    assert a + R.zero == a and a * R.one == a and a - a == R.zero


@settings(max_examples=100)
@given(elements(1, unit=True))
def test_unit_inverse(xs):
    (a,) = xs
    assert a * a.inverse() == a.ring.one


@settings(max_examples=60)
@given(elements(2))
def test_valuation_additive(xs):
    a, b = xs
    va, vb = a.valuation(), b.valuation()
    if isinstance(va, int) and isinstance(vb, int) and va + vb < a.ring.N:
        assert (a * b).valuation() == va + vb


@settings(max_examples=60)
@given(elements(2), st.integers(1, 5))
def test_reduction_is_a_homomorphism(xs, k):
    a, b = xs
    k = min(k, a.ring.N)
    assert (a * b).reduce_to(k) == a.reduce_to(k) * b.reduce_to(k)
    assert (a + b).reduce_to(k) == a.reduce_to(k) + b.reduce_to(k)


@settings(max_examples=60)
@given(elements(1, unit=True))
def test_teichmuller_properties(xs):
    (a,) = xs
    R = a.ring
    w = teichmuller(R, a)
    assert w ** R.q == w
    assert w.residue() == a.residue()


@settings(max_examples=60)
@given(elements(1))
def test_text_roundtrip(xs):
    (a,) = xs
    assert a.ring.parse(str(a)) == a


def test_precision_error_is_arithmetic():
    assert issubclass(PrecisionError, ArithmeticError)
