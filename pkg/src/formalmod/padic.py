"""Fixed-precision arithmetic in unramified extensions of the p-adic integers.

An :class:`UnramifiedRing` models ``O_E / p^N`` where ``O_E`` is the ring of
integers of the unramified extension of degree ``f`` of ``Q_p``.  Elements are
polynomials of degree ``< f`` in a generator ``g`` whose minimal polynomial
reduces to an irreducible polynomial over ``F_p``.

Internally an element is a single non-negative Python integer: the coefficient
of ``g^l`` sits in a bit slot of width ``ring.w`` starting at bit ``l*w``.  The
slots are wide enough that products of reduced elements, and sums of many such
products, never carry between slots.  The series kernels rely on this to do
whole-series arithmetic with one big-integer multiplication.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

from sympy import Poly, factorint, isprime
from sympy.abc import x as _x


class PrecisionError(ArithmeticError):
    """Raised when an answer depends on digits below the working precision."""


@dataclass(frozen=True)
class AtLeast:
    """Valuation of a quantity indistinguishable from zero at the working precision."""

    bound: int

    def __str__(self):
        return f">= {self.bound}"


def vp_int(n: int, p: int) -> int | None:
    """p-adic valuation of a nonzero integer; ``None`` for zero."""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _irreducible(coeffs, p):
    # coeffs: low-degree-first, monic term implied
    return Poly(list(reversed(list(coeffs) + [1])), _x, modulus=p).is_irreducible


def smallest_irreducible(p: int, f: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree ``f`` over F_p.

    Returned as its non-leading coefficients ``(m_0, ..., m_{f-1})``, compared
    low-degree-first.  For ``f = 1`` this is the polynomial ``X``.
    """
    if f == 1:
        return (0,)
    # product() is already lexicographic in (m_0, m_1, ...)
    for coeffs in itertools.product(range(p), repeat=f):
        if coeffs[0] != 0 and _irreducible(coeffs, p):
            return coeffs
    raise ValueError(f"no irreducible polynomial of degree {f} over F_{p}")  # pragma: no cover


class UnramifiedRing:
    """The ring ``O_E / p^N`` for ``E`` unramified of degree ``f`` over ``Q_p``."""

    def __init__(self, p: int, f: int, N: int, modulus=None):
        if not isinstance(p, int) or not isprime(p):
            raise ValueError(f"p must be prime, got {p!r}")
        if f < 1 or N < 1:
            raise ValueError(f"need f >= 1 and N >= 1, got f={f}, N={N}")
        self.p = p
        self.f = f
        self.N = N
        self.pN = p**N
        self.q = p**f
        if modulus is None:
            modulus = smallest_irreducible(p, f)
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != f:
            raise ValueError("modulus must have f non-leading coefficients")
        if f > 1 and not _irreducible(modulus, p):
            raise ValueError(f"modulus {modulus} is reducible mod {p}")
        self.modulus = modulus
        # slot width: room for sums of 2^24 products, a sign bit, and f-fold
        # convolution within one element product
        bits = 2 * self.pN.bit_length() + 24 + f.bit_length() + 2
        self.w = (bits + 7) // 8 * 8
        self.B = 1 << self.w
        self._mask = self.B - 1
        self._half = self.B >> 1

    # -- identity -------------------------------------------------------
    def _key(self):
        return (self.p, self.f, self.N, self.modulus)

    def __eq__(self, other):
        return isinstance(other, UnramifiedRing) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"UnramifiedRing(p={self.p}, f={self.f}, N={self.N})"

    def with_precision(self, N: int) -> "UnramifiedRing":
        """Same extension, different precision (the modulus is reused)."""
        if N == self.N:
            return self
        return UnramifiedRing(self.p, self.f, N, self.modulus)

    def same_field(self, other: "UnramifiedRing") -> bool:
        return self.p == other.p and self.f == other.f and self.modulus == other.modulus

    # -- raw representation ---------------------------------------------
    def pack(self, coeffs) -> int:
        """Raw form of a coefficient sequence (each entry taken mod p^N)."""
        if self.f == 1:
            return int(coeffs[0]) % self.pN
        raw = 0
        for c in reversed(list(coeffs)):
            raw = (raw << self.w) | (int(c) % self.pN)
        return raw

    def unpack(self, raw: int) -> tuple[int, ...]:
        """Coefficients of a reduced raw element."""
        if self.f == 1:
            return (raw,)
        out = []
        for _ in range(self.f):
            out.append(raw & self._mask)
            raw >>= self.w
        return tuple(out)

    def _slots(self, acc: int, n: int) -> list[int]:
        # signed slot decode of an unreduced accumulator
        out = []
        mask, half, w, B = self._mask, self._half, self.w, self.B
        for _ in range(n):
            s = acc & mask
            acc >>= w
            if s >= half:
                s -= B
                acc += 1
            out.append(s)
        return out

    def reduce(self, acc: int) -> int:
        """Reduce an accumulator (sums of products of raw elements) to raw form."""
        if self.f == 1:
            return acc % self.pN
        f = self.f
        s = self._slots(acc, 2 * f - 1)
        m = self.modulus
        for top in range(2 * f - 2, f - 1, -1):
            c = s[top]
            if c:
                base = top - f
                for i in range(f):
                    s[base + i] -= c * m[i]
        pN = self.pN
        raw = 0
        for c in reversed(s[:f]):
            raw = (raw << self.w) | (c % pN)
        return raw

    def reduce_mod(self, raw: int, pk: int) -> int:
        """Reduce each coefficient of a raw element modulo ``pk``."""
        if self.f == 1:
            return raw % pk
        return self.pack([c % pk for c in self.unpack(raw)])

    def raw_mul(self, a: int, b: int) -> int:
        return self.reduce(a * b)

    def raw_add(self, a: int, b: int) -> int:
        return self.reduce(a + b)

    def raw_sub(self, a: int, b: int) -> int:
        return self.reduce(a - b)

    def raw_from_int(self, n: int) -> int:
        return int(n) % self.pN

    def raw_valuation(self, raw: int):
        vals = [vp_int(c, self.p) for c in self.unpack(raw)]
        vals = [v for v in vals if v is not None and v < self.N]
        return min(vals) if vals else AtLeast(self.N)

    def raw_divexact_p(self, raw: int, k: int) -> int:
        """Divide every coefficient by ``p^k`` (caller guarantees divisibility)."""
        if k == 0:
            return raw
        pk = self.p**k
        if self.f == 1:
            return raw // pk
        return self.pack([c // pk for c in self.unpack(raw)])

    def raw_inverse(self, raw: int) -> int:
        if self.raw_valuation(raw) != 0:
            raise ZeroDivisionError("element is not a unit")
        return self.pack(unit_inverse(self.unpack(raw), self.modulus, self.p, self.N))

    def raw_pow(self, raw: int, e: int) -> int:
        if e < 0:
            return self.raw_pow(self.raw_inverse(raw), -e)
        result = 1
        while e:
            if e & 1:
                result = self.raw_mul(result, raw)
            raw = self.raw_mul(raw, raw)
            e >>= 1
        return result

    def raw_convert(self, raw: int, src: "UnramifiedRing") -> int:
        """Move a raw element of ``src`` (same field) into this ring."""
        return self.pack(src.unpack(raw))

    # -- element constructors ------------------------------------------
    def __call__(self, value) -> "RingElement":
        if isinstance(value, RingElement):
            if value.ring == self:
                return value
            if not self.same_field(value.ring):
                if value.ring.f == 1 and value.ring.p == self.p:
                    return RingElement(self, self.raw_from_int(value.raw))
                raise ValueError(f"cannot coerce {value.ring} element into {self}")
            return RingElement(self, self.raw_convert(value.raw, value.ring))
        if isinstance(value, int):
            return RingElement(self, self.raw_from_int(value))
        return RingElement(self, self.pack(list(value) + [0] * (self.f - len(value))))

    @cached_property
    def zero(self) -> "RingElement":
        return RingElement(self, 0)

    @cached_property
    def one(self) -> "RingElement":
        return RingElement(self, 1)

    @cached_property
    def gen(self) -> "RingElement":
        """The generator ``g`` (zero when f = 1, following the ``X - 0`` convention)."""
        if self.f == 1:
            return self.zero
        return self([0, 1])

    def residues(self):
        """All residues mod p, as coefficient tuples."""
        return itertools.product(range(self.p), repeat=self.f)

    def elements_mod(self, m: int):
        """Every element of ``O_E / p^m`` as a :class:`RingElement` of this ring."""
        pm = self.p**m
        for coeffs in itertools.product(range(pm), repeat=self.f):
            yield self(list(reversed(coeffs)))

    def teichmuller(self, r) -> "RingElement":
        """Teichmuller lift of a nonzero residue."""
        return teichmuller(self, r)

    def primitive_residue(self) -> tuple[int, ...]:
        """Smallest residue (in enumeration order) generating ``F_q^x``."""
        order = self.q - 1
        primes = list(factorint(order)) if order > 1 else []
        small = self.with_precision(1)
        for coeffs in self.residues():
            coeffs = tuple(reversed(coeffs))
            if not any(coeffs):
                continue
            raw = small.pack(coeffs)
            if all(small.raw_pow(raw, order // ell) != 1 for ell in primes):
                return coeffs
        raise AssertionError("no primitive element")  # pragma: no cover

    def element_text(self, raw: int) -> str:
        coeffs = self.unpack(raw)
        terms = []
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            elif i == 1:
                terms.append(f"{c}*g")
            else:
                terms.append(f"{c}*g^{i}")
        body = " + ".join(terms) if terms else "0"
        return f"{body} (mod {self.p}^{self.N})"

    def parse(self, text: str) -> "RingElement":
        """Inverse of the canonical text form; the ``(mod p^N)`` suffix is optional."""
        body = text.split("(mod")[0].strip()
        coeffs = [0] * self.f
        for term in body.replace("-", "+-").split("+"):
            term = term.strip()
            if not term:
                continue
            if "g" in term:
                c, _, power = term.partition("g")
                c = c.rstrip("*").strip()
                c = int(c) if c not in ("", "-") else (-1 if c == "-" else 1)
                k = int(power.lstrip("^")) if power.strip() else 1
            else:
                c, k = int(term), 0
            if k >= self.f:
                raise ValueError(f"power g^{k} out of range in {text!r}")
            coeffs[k] += c
        return self(coeffs)


def ring_make(p: int, f: int, N: int) -> UnramifiedRing:
    return UnramifiedRing(p, f, N)


def polymulmod(a, b, modulus, pk):
    """Product of two coefficient tuples modulo the (monic) modulus and ``pk``."""
    f = len(modulus)
    if f == 1:
        return ((a[0] * b[0]) % pk,)
    s = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                s[i + j] += ai * bj
    for top in range(2 * f - 2, f - 1, -1):
        c = s[top]
        if c:
            for i in range(f):
                s[top - f + i] -= c * modulus[i]
    return tuple(c % pk for c in s[:f])


def unit_inverse(u, modulus, p, k):
    """Inverse of a unit coefficient tuple modulo ``p^k`` (Newton iteration)."""
    f = len(modulus)
    pk = p**k
    if f == 1:
        return (pow(u[0], -1, pk),)
    # inverse mod p: u^(q-2) in the residue field
    q = p**f
    inv = (1,) + (0,) * (f - 1)
    base, e = tuple(c % p for c in u), q - 2
    while e:
        if e & 1:
            inv = polymulmod(inv, base, modulus, p)
        base = polymulmod(base, base, modulus, p)
        e >>= 1
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        pp = p**prec
        t = polymulmod(u, inv, modulus, pp)
        t = tuple((-c) % pp for c in t)
        t = ((t[0] + 2) % pp,) + t[1:]
        inv = polymulmod(inv, t, modulus, pp)
    return tuple(c % pk for c in inv)


class RingElement:
    """An element of an :class:`UnramifiedRing`; immutable."""

    __slots__ = ("ring", "raw")

    def __init__(self, ring: UnramifiedRing, raw: int):
        self.ring = ring
        self.raw = raw

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.ring.unpack(self.raw)

    def _coerce(self, other):
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise ValueError(f"mismatched parents: {self.ring} vs {other.ring}")
            return other.raw
        if isinstance(other, int):
            return self.ring.raw_from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElement(self.ring, self.ring.raw_add(self.raw, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElement(self.ring, self.ring.raw_sub(self.raw, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElement(self.ring, self.ring.raw_sub(o, self.raw))

    def __neg__(self):
        return RingElement(self.ring, self.ring.raw_sub(0, self.raw))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RingElement(self.ring, self.ring.raw_mul(self.raw, o))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return RingElement(self.ring, self.ring.raw_pow(self.raw, e))

    def inverse(self) -> "RingElement":
        return RingElement(self.ring, self.ring.raw_inverse(self.raw))

    def __eq__(self, other):
        if isinstance(other, int):
            return self.raw == self.ring.raw_from_int(other)
        return isinstance(other, RingElement) and self.ring == other.ring and self.raw == other.raw

    def __hash__(self):
        return hash((self.ring, self.raw))

    def valuation(self):
        return self.ring.raw_valuation(self.raw)

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def residue(self) -> tuple[int, ...]:
        return tuple(c % self.ring.p for c in self.coeffs)

    def reduce_to(self, N: int) -> "RingElement":
        """The image in the same extension at precision ``N <= self.ring.N``."""
        target = self.ring.with_precision(N)
        return RingElement(target, target.pack(self.coeffs))

    def __str__(self):
        return self.ring.element_text(self.raw)

    def __repr__(self):
        return f"RingElement({self})"


def valuation(a: RingElement):
    """Exact ``v_p(a)``, or :class:`AtLeast` ``N`` when ``a`` is zero at precision N."""
    return a.valuation()


def elem_arith(a: RingElement, b: RingElement, op: str) -> RingElement:
    if a.ring != b.ring:
        raise ValueError(f"mismatched parents: {a.ring} vs {b.ring}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def teichmuller(ring: UnramifiedRing, r) -> RingElement:
    """The (q-1)-st root of unity congruent to ``r`` mod p.

    ``r`` may be a residue tuple, an int, or a ring element (its residue is used).
    Iterates ``x -> x^q``, which gains a p-adic digit per step.
    """
    if isinstance(r, RingElement):
        r = r.residue()
    elif isinstance(r, int):
        r = (r,)
    r = tuple(int(c) % ring.p for c in r) + (0,) * (ring.f - len(tuple(r)))
    if not any(r):
        raise ValueError("teichmuller lift of zero residue")
    x = ring.pack(r)
    for _ in range(ring.N + 1):
        y = ring.raw_pow(x, ring.q)
        if y == x:
            return RingElement(ring, x)
        x = y
    raise AssertionError("Teichmuller iteration did not stabilise")  # pragma: no cover


class FieldElement:
    """An element ``p^val * unit`` of the fraction field, known to finite precision.

    ``unit`` is a coefficient tuple with nonzero residue, known modulo
    ``p^prec``; the element is therefore known modulo ``p^(val + prec)``.  A zero
    element stores ``unit = None`` and ``val`` is then a lower bound: the value
    is only known to be divisible by ``p^val``.
    """

    __slots__ = ("ring", "val", "unit", "prec")

    def __init__(self, ring: UnramifiedRing, val: int, unit, prec: int):
        self.ring = ring
        self.val = val
        self.unit = unit
        self.prec = prec

    @classmethod
    def zero(cls, ring, bound):
        return cls(ring, bound, None, 0)

    @classmethod
    def from_coeffs(cls, ring, coeffs, absprec, shift=0):
        """``p^shift * coeffs`` where ``coeffs`` is known modulo ``p^absprec``."""
        p = ring.p
        vals = [vp_int(c % p**absprec, p) for c in coeffs]
        vals = [v for v in vals if v is not None]
        if not vals:
            return cls.zero(ring, absprec + shift)
        v = min(vals)
        prec = absprec - v
        pk = p**prec
        unit = tuple((c // p**v) % pk for c in coeffs)
        return cls(ring, v + shift, unit, prec)

    @classmethod
    def from_raw(cls, ring, raw, absprec=None):
        if absprec is None:
            absprec = ring.N
        return cls.from_coeffs(ring, ring.unpack(raw), absprec)

    @classmethod
    def from_int(cls, ring, n, absprec):
        return cls.from_coeffs(ring, (n,) + (0,) * (ring.f - 1), absprec)

    @property
    def is_zero(self):
        return self.unit is None

    @property
    def absprec(self):
        return self.val if self.unit is None else self.val + self.prec

    def valuation(self):
        return AtLeast(self.val) if self.unit is None else self.val

    def _truncated(self, absprec):
        if self.unit is None:
            return FieldElement.zero(self.ring, min(self.val, absprec))
        if absprec >= self.absprec:
            return self
        if absprec <= self.val:
            return FieldElement.zero(self.ring, absprec)
        prec = absprec - self.val
        pk = self.ring.p**prec
        return FieldElement(self.ring, self.val, tuple(c % pk for c in self.unit), prec)

    def __add__(self, other):
        if isinstance(other, int):
            other = FieldElement.from_int(self.ring, other, max(self.absprec, 0) + 1)
        absprec = min(self.absprec, other.absprec)
        if self.unit is None:
            return other._truncated(absprec)
        if other.unit is None:
            return self._truncated(absprec)
        p = self.ring.p
        v0 = min(self.val, other.val)
        if absprec <= v0:
            return FieldElement.zero(self.ring, absprec)
        sa, sb = p ** (self.val - v0), p ** (other.val - v0)
        s = [a * sa + b * sb for a, b in zip(self.unit, other.unit)]
        return FieldElement.from_coeffs(self.ring, s, absprec - v0, shift=v0)

    def __neg__(self):
        if self.unit is None:
            return self
        pk = self.ring.p**self.prec
        return FieldElement(self.ring, self.val, tuple((-c) % pk for c in self.unit), self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return self.mul_int(other)
        if self.unit is None or other.unit is None:
            oval = other.val
            sval = self.val
            return FieldElement.zero(self.ring, sval + oval)
        prec = min(self.prec, other.prec)
        unit = polymulmod(self.unit, other.unit, self.ring.modulus, self.ring.p**prec)
        return FieldElement(self.ring, self.val + other.val, unit, prec)

    def mul_int(self, n: int):
        """Multiply by an exact integer."""
        if n == 0:
            return FieldElement.zero(self.ring, self.absprec + 10**6)
        v = vp_int(n, self.ring.p)
        if self.unit is None:
            return FieldElement.zero(self.ring, self.val + v)
        u = n // self.ring.p**v
        pk = self.ring.p**self.prec
        return FieldElement(self.ring, self.val + v, tuple(c * u % pk for c in self.unit), self.prec)

    def div_int(self, n: int):
        """Divide by an exact nonzero integer."""
        v = vp_int(n, self.ring.p)
        if self.unit is None:
            return FieldElement.zero(self.ring, self.val - v)
        u = n // self.ring.p**v
        pk = self.ring.p**self.prec
        inv = pow(u, -1, pk)
        return FieldElement(self.ring, self.val - v, tuple(c * inv % pk for c in self.unit), self.prec)

    def inverse(self):
        if self.unit is None:
            raise PrecisionError("division by an element indistinguishable from zero")
        inv = unit_inverse(self.unit, self.ring.modulus, self.ring.p, self.prec)
        return FieldElement(self.ring, -self.val, inv, self.prec)

    def __truediv__(self, other):
        if isinstance(other, int):
            return self.div_int(other)
        return self * other.inverse()

    def to_raw(self, ring=None):
        """Raw element of ``ring`` (default own ring); requires non-negative valuation."""
        ring = ring or self.ring
        if self.unit is None:
            return 0
        if self.val < 0:
            raise PrecisionError(f"element of valuation {self.val} is not integral")
        scale = self.ring.p**self.val
        return ring.pack([c * scale for c in self.unit])

    def agrees_with(self, other, absprec=None) -> bool:
        """Equality modulo the weaker of the two precisions (or ``absprec``)."""
        d = self - other
        bound = d.absprec if absprec is None else absprec
        return d.unit is None or d.val >= bound

    def __str__(self):
        if self.unit is None:
            return f"O({self.ring.p}^{self.val})"
        u = RingElement(self.ring, self.ring.pack(self.unit)).ring.element_text(
            self.ring.pack(self.unit)).split(" (mod")[0]
        return f"{self.ring.p}^{self.val} * ({u}) + O({self.ring.p}^{self.absprec})"

    __repr__ = __str__
