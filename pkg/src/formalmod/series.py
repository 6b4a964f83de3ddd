"""Dense truncated power series in one and two variables.

One-variable series over the ring live in :class:`Series1`, over the fraction
field in :class:`FracSeries1`.  Two-variable series (:class:`Series2`) are
stored by homogeneous components: ``comps[d][j]`` is the coefficient of
``X^(d-j) Y^j``, so ``c[i][j]`` is ``comps[i+j][j]``.

Products go through Kronecker substitution: a coefficient sequence is packed
into one integer with fixed-width slots, the integers are multiplied, and the
slots are read back and reduced.  The slot width comes from the ring and is
large enough that no slot overflows for the sizes used here.
"""
from __future__ import annotations

from fractions import Fraction

from .padic import AtLeast, FieldElement, PrecisionError, RingElement, UnramifiedRing, vp_int


class CapError(ValueError):
    """Raised when a computation would need terms beyond the series cap."""


# ---------------------------------------------------------------------------
# Kronecker kernels


def slot_bytes(ring: UnramifiedRing) -> int:
    return (2 * ring.f - 1) * ring.w // 8


def pack(ring, seq) -> int:
    sb = slot_bytes(ring)
    return int.from_bytes(b"".join(r.to_bytes(sb, "little") for r in seq), "little")


def unpack(ring, big: int, n: int) -> list[int]:
    """First ``n`` slots of a non-negative packed integer, reduced."""
    sb = slot_bytes(ring)
    nbytes = max(n * sb, (big.bit_length() + 7) // 8)
    data = big.to_bytes(nbytes, "little")
    if ring.f == 1:
        pN = ring.pN
        return [int.from_bytes(data[i * sb:(i + 1) * sb], "little") % pN for i in range(n)]
    red = ring.reduce
    return [red(int.from_bytes(data[i * sb:(i + 1) * sb], "little")) for i in range(n)]


def _mul_seq(ring, a, b, n) -> list[int]:
    return unpack(ring, pack(ring, a) * pack(ring, b), n)


def _coerce_raw(ring, value) -> int:
    if isinstance(value, RingElement):
        if value.ring != ring:
            value = ring(value)
        return value.raw
    if isinstance(value, Fraction):
        if value.denominator % ring.p == 0:
            raise ValueError(f"{value} is not integral at {ring.p}")
        return ring.raw_from_int(value.numerator * pow(value.denominator, -1, ring.pN))
    if isinstance(value, int):
        return ring.raw_from_int(value)
    return ring(value).raw


def _mod_prec(ring, raw, prec):
    if prec >= ring.N:
        return raw
    return ring.reduce_mod(raw, ring.p**prec)


# ---------------------------------------------------------------------------


class Series1:
    """A power series ``a_0 + a_1 X + ... + a_D X^D + O(X^(D+1))`` over a ring.

    ``prec`` is the certified p-adic precision of the coefficients (at most the
    ring precision); digits below it are meaningful, the rest are not.
    """

    __slots__ = ("ring", "cap", "c", "prec")

    def __init__(self, ring: UnramifiedRing, coeffs, cap: int | None = None, prec: int | None = None):
        if cap is None:
            cap = len(coeffs) - 1
        if cap < 0:
            raise ValueError("cap must be non-negative")
        c = [_coerce_raw(ring, v) for v in list(coeffs)[:cap + 1]]
        c.extend([0] * (cap + 1 - len(c)))
        self.ring = ring
        self.cap = cap
        self.c = c
        self.prec = ring.N if prec is None else min(prec, ring.N)

    @classmethod
    def _raw(cls, ring, c, cap, prec=None):
        s = cls.__new__(cls)
        s.ring, s.cap, s.c = ring, cap, c
        s.prec = ring.N if prec is None else min(prec, ring.N)
        return s

    @classmethod
    def X(cls, ring, cap):
        return cls(ring, [0, 1], cap)

    @classmethod
    def zero(cls, ring, cap):
        return cls._raw(ring, [0] * (cap + 1), cap)

    @classmethod
    def monomials(cls, ring, cap, terms: dict):
        """Series from ``{degree: coefficient}``."""
        c = [0] * (cap + 1)
        for k, v in terms.items():
            if k <= cap:
                c[k] = _coerce_raw(ring, v)
        return cls._raw(ring, c, cap)

    # -- access ----------------------------------------------------------
    def __getitem__(self, k) -> RingElement:
        return RingElement(self.ring, self.c[k])

    def __len__(self):
        return self.cap + 1

    def coefficients(self) -> list[RingElement]:
        return [RingElement(self.ring, r) for r in self.c]

    def _check(self, other):
        if not isinstance(other, Series1):
            raise TypeError(f"expected Series1, got {type(other).__name__}")
        if other.ring != self.ring:
            raise ValueError(f"mismatched rings: {self.ring} vs {other.ring}")
        if other.cap != self.cap:
            raise CapError(f"cap mismatch: {self.cap} vs {other.cap}")

    def _p(self, other):
        return min(self.prec, other.prec)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        self._check(other)
        red = self.ring.reduce
        return Series1._raw(self.ring, [red(a + b) for a, b in zip(self.c, other.c)], self.cap, self._p(other))

    def __sub__(self, other):
        self._check(other)
        red = self.ring.reduce
        return Series1._raw(self.ring, [red(a - b) for a, b in zip(self.c, other.c)], self.cap, self._p(other))

    def __neg__(self):
        red = self.ring.reduce
        return Series1._raw(self.ring, [red(-a) for a in self.c], self.cap, self.prec)

    def __mul__(self, other):
        if isinstance(other, Series1):
            self._check(other)
            return Series1._raw(self.ring, _mul_seq(self.ring, self.c, other.c, self.cap + 1),
                                self.cap, self._p(other))
        s = _coerce_raw(self.ring, other)
        red = self.ring.reduce
        return Series1._raw(self.ring, [red(s * a) for a in self.c], self.cap, self.prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = Series1.monomials(self.ring, self.cap, {0: 1})
        result.prec = self.prec
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Series1) or other.ring != self.ring or other.cap != self.cap:
            return NotImplemented if not isinstance(other, Series1) else False
        prec = self._p(other)
        if prec >= self.ring.N:
            return self.c == other.c
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.ring, self.cap, tuple(self.c)))

    def is_zero(self) -> bool:
        """True when every coefficient vanishes to the certified precision."""
        if self.prec >= self.ring.N:
            return not any(self.c)
        pk = self.ring.p**self.prec
        return all(all(x % pk == 0 for x in self.ring.unpack(r)) for r in self.c)

    def first_nonzero(self):
        """Index of the first coefficient nonzero at certified precision, or None."""
        pk = self.ring.p**self.prec
        for k, r in enumerate(self.c):
            if any(x % pk for x in self.ring.unpack(r)):
                return k
        return None

    def truncate(self, cap: int) -> "Series1":
        if cap > self.cap:
            raise CapError(f"cannot extend cap {self.cap} to {cap}")
        return Series1._raw(self.ring, self.c[:cap + 1], cap, self.prec)

    def with_cap(self, cap: int) -> "Series1":
        """Truncate, or pad with zeros (only sound for polynomials)."""
        if cap <= self.cap:
            return self.truncate(cap)
        return Series1._raw(self.ring, self.c + [0] * (cap - self.cap), cap, self.prec)

    def reduce_to(self, N: int) -> "Series1":
        """Image at lower p-adic precision ``N``."""
        target = self.ring.with_precision(N)
        c = [target.raw_convert(r, self.ring) for r in self.c]
        return Series1._raw(target, c, self.cap, min(self.prec, N))

    def lift_to(self, ring: UnramifiedRing) -> "Series1":
        """Same integer coefficients in a higher-precision copy of the ring.

        The coefficients are read as exact integers in ``[0, p^N)``; digits
        beyond the old precision are zero.
        """
        c = [ring.raw_convert(r, self.ring) for r in self.c]
        return Series1._raw(ring, c, self.cap, ring.N if self.prec >= self.ring.N else self.prec)

    def change_ring(self, ring: UnramifiedRing) -> "Series1":
        """Coefficients mapped into another ring (e.g. Z_p into O_E) at the same precision."""
        c = [ring(RingElement(self.ring, r)).raw for r in self.c]
        return Series1._raw(ring, c, self.cap, self.prec)

    def certified(self, prec: int) -> "Series1":
        return Series1._raw(self.ring, self.c, self.cap, min(prec, self.prec))

    # -- composition and friends -----------------------------------------
    def compose(self, inner: "Series1") -> "Series1":
        """``self(inner(X))``; the inner series must have zero constant term."""
        self._check(inner)
        if inner.c[0] != 0:
            raise ValueError("inner series must have zero constant term")
        ring, D = self.ring, self.cap
        n = D + 1
        pin = pack(ring, inner.c)
        # Horner; the tail of outer below the first nonzero term is skipped
        acc = [0] * n
        started = False
        for k in range(D, -1, -1):
            if started:
                acc = unpack(ring, pack(ring, acc) * pin, n)
                acc[0] = ring.reduce(acc[0] + self.c[k])
            elif self.c[k]:
                acc[0] = self.c[k]
                started = True
        return Series1._raw(ring, acc, D, self._p(inner))

    def inverse(self) -> "Series1":
        """Multiplicative inverse; the constant term must be a unit."""
        ring = self.ring
        if ring.raw_valuation(self.c[0]) != 0:
            raise ZeroDivisionError("constant term is not a unit")
        t = Series1.monomials(ring, self.cap, {0: RingElement(ring, ring.raw_inverse(self.c[0]))})
        two = Series1.monomials(ring, self.cap, {0: 2})
        n = 1
        while n <= self.cap:
            n *= 2
            t = t * (two - self * t)
        return t.certified(self.prec)

    def reversion(self) -> "Series1":
        """Compositional inverse ``b`` with ``self(b(X)) = X`` to cap."""
        ring = self.ring
        if self.c[0] != 0:
            raise ValueError("series must have zero constant term")
        if ring.raw_valuation(self.c[1]) != 0:
            raise ZeroDivisionError("linear coefficient is not a unit")
        D = self.cap
        Xs = Series1.X(ring, D)
        b = Series1.monomials(ring, D, {1: RingElement(ring, ring.raw_inverse(self.c[1]))})
        deriv = self.derivative().with_cap(D)
        n = 1
        while n <= D:
            n *= 2
            b = b - (self.compose(b) - Xs) * deriv.compose(b).inverse()
        return b.certified(self.prec)

    def derivative(self) -> "Series1":
        """Termwise derivative; the cap drops by one."""
        ring = self.ring
        if self.cap == 0:
            return Series1.zero(ring, 0)
        c = [ring.reduce(k * self.c[k]) for k in range(1, self.cap + 1)]
        return Series1._raw(ring, c, self.cap - 1, self.prec)

    def integrate(self) -> "FracSeries1":
        """Termwise antiderivative over the fraction field; the cap grows by one."""
        return FracSeries1.from_series(self).integrate()

    def to_frac(self) -> "FracSeries1":
        return FracSeries1.from_series(self)

    def order(self):
        """Index of the first nonzero coefficient (None for the zero series)."""
        return self.first_nonzero()

    # -- display -----------------------------------------------------------
    def __str__(self):
        terms = []
        for k, r in enumerate(self.c):
            if r == 0:
                continue
            e = self.ring.element_text(r).split(" (mod")[0]
            if self.ring.f > 1 and "+" in e:
                e = f"({e})"
            terms.append(e if k == 0 else f"{e}*X" if k == 1 else f"{e}*X^{k}")
        body = " + ".join(terms) if terms else "0"
        return f"{body} + O(X^{self.cap + 1})"

    def __repr__(self):
        return f"Series1({self})"

    def to_json(self) -> list[str]:
        return [self.ring.element_text(r) for r in self.c]

    @classmethod
    def from_json(cls, ring, data) -> "Series1":
        return cls(ring, [ring.parse(t) for t in data])


def s_mul(a: Series1, b: Series1) -> Series1:
    return a * b


def s_compose(outer: Series1, inner: Series1) -> Series1:
    return outer.compose(inner)


def s_reversion(a: Series1) -> Series1:
    return a.reversion()


def s_derivative(a):
    return a.derivative()


def s_integrate(a):
    return a.integrate()


def required_cap(q: int, n: int) -> int:
    """Smallest cap that sees every coefficient of ``[pi^n]`` down to its ``X^(q^n)`` term."""
    return q**n


def check_cap(cap: int, q: int, n: int) -> None:
    need = required_cap(q, n)
    if cap < need:
        raise CapError(f"cap {cap} too small for level {n} with q={q}: need D >= {need}")


# ---------------------------------------------------------------------------


class FracSeries1:
    """A truncated power series over the fraction field, one :class:`FieldElement` per term."""

    __slots__ = ("ring", "cap", "c")

    def __init__(self, ring, coeffs, cap=None):
        if cap is None:
            cap = len(coeffs) - 1
        self.ring = ring
        self.cap = cap
        self.c = list(coeffs)[:cap + 1]
        big = ring.N + 10**6
        while len(self.c) < cap + 1:
            self.c.append(FieldElement.zero(ring, big))

    @classmethod
    def from_series(cls, s: Series1) -> "FracSeries1":
        return cls(s.ring, [FieldElement.from_raw(s.ring, r, s.prec) for r in s.c], s.cap)

    @property
    def precision(self) -> int:
        """Worst absolute precision over the coefficients."""
        return min(x.absprec for x in self.c)

    def __getitem__(self, k) -> FieldElement:
        return self.c[k]

    def _check(self, other):
        if other.cap != self.cap:
            raise CapError(f"cap mismatch: {self.cap} vs {other.cap}")

    def __add__(self, other):
        other = _as_frac(other)
        self._check(other)
        return FracSeries1(self.ring, [a + b for a, b in zip(self.c, other.c)], self.cap)

    def __sub__(self, other):
        other = _as_frac(other)
        self._check(other)
        return FracSeries1(self.ring, [a - b for a, b in zip(self.c, other.c)], self.cap)

    def __neg__(self):
        return FracSeries1(self.ring, [-a for a in self.c], self.cap)

    def scale(self, s: FieldElement) -> "FracSeries1":
        return FracSeries1(self.ring, [s * a for a in self.c], self.cap)

    def __mul__(self, other):
        if isinstance(other, FieldElement):
            return self.scale(other)
        if isinstance(other, int):
            return FracSeries1(self.ring, [a.mul_int(other) for a in self.c], self.cap)
        other = _as_frac(other)
        self._check(other)
        D = self.cap
        out = []
        for k in range(D + 1):
            acc = None
            for i in range(k + 1):
                t = self.c[i] * other.c[k - i]
                acc = t if acc is None else acc + t
            out.append(acc)
        return FracSeries1(self.ring, out, D)

    __rmul__ = __mul__

    def compose(self, inner) -> "FracSeries1":
        inner = _as_frac(inner)
        self._check(inner)
        if not (inner.c[0].is_zero):
            raise ValueError("inner series must have zero constant term")
        D = self.cap
        acc = FracSeries1(self.ring, [self.c[D]], D)
        for k in range(D - 1, -1, -1):
            acc = acc * inner
            acc.c[0] = acc.c[0] + self.c[k]
        return acc

    def derivative(self) -> "FracSeries1":
        return FracSeries1(self.ring, [self.c[k].mul_int(k) for k in range(1, self.cap + 1)], self.cap - 1)

    def integrate(self) -> "FracSeries1":
        big = self.ring.N + 10**6
        c = [FieldElement.zero(self.ring, big)]
        c += [self.c[k].div_int(k + 1) for k in range(self.cap + 1)]
        return FracSeries1(self.ring, c, self.cap + 1)

    def reversion(self) -> "FracSeries1":
        """Compositional inverse, solved degree by degree with precision tracking."""
        if not self.c[0].is_zero:
            raise ValueError("series must have zero constant term")
        D = self.cap
        a1inv = self.c[1].inverse()
        big = self.ring.N + 10**6
        zero = FieldElement.zero(self.ring, big)
        b = [zero, a1inv] + [zero] * (D - 1)
        # powers[j][k] = coefficient of X^k in b^j, filled as b grows
        powers = {1: b}
        for j in range(2, D + 1):
            powers[j] = [zero] * (D + 1)
        for k in range(2, D + 1):
            for j in range(2, k + 1):
                acc = zero
                prev = powers[j - 1]
                for i in range(1, k - j + 2):
                    # zero entries still carry a precision bound, so keep them
                    acc = acc + b[i] * prev[k - i]
                powers[j][k] = acc
            s = zero
            for j in range(2, k + 1):
                s = s + self.c[j] * powers[j][k]
            b[k] = -(s * a1inv)
        return FracSeries1(self.ring, b, D)

    def truncate(self, cap):
        return FracSeries1(self.ring, self.c[:cap + 1], cap)

    def is_integral(self) -> bool:
        return all(x.is_zero or x.val >= 0 for x in self.c)

    def first_nonintegral(self):
        for k, x in enumerate(self.c):
            if not x.is_zero and x.val < 0:
                return k
        return None

    def to_series(self, ring=None) -> Series1:
        """Integral series at the worst coefficient precision (clipped to the ring)."""
        ring = ring or self.ring
        prec = max(min(self.precision, ring.N), 0)
        return Series1._raw(ring, [x.to_raw(ring) for x in self.c], self.cap, prec)

    def agrees_with(self, other, absprec=None) -> bool:
        other = _as_frac(other)
        return all(a.agrees_with(b, absprec) for a, b in zip(self.c, other.c))

    def __str__(self):
        return " + ".join(f"({x})*X^{k}" for k, x in enumerate(self.c) if not x.is_zero) + f" + O(X^{self.cap + 1})"


def _as_frac(s):
    if isinstance(s, FracSeries1):
        return s
    if isinstance(s, Series1):
        return FracSeries1.from_series(s)
    raise TypeError(f"expected a series, got {type(s).__name__}")


# ---------------------------------------------------------------------------


def _tri(D):
    return (D + 1) * (D + 2) // 2


class Series2:
    """A two-variable series truncated at total degree ``D``.

    ``comps[d]`` lists the coefficients of ``X^d, X^(d-1) Y, ..., Y^d``.
    """

    __slots__ = ("ring", "cap", "comps", "prec", "_packed")

    def __init__(self, ring, comps, cap=None, prec=None):
        if cap is None:
            cap = len(comps) - 1
        self.ring = ring
        self.cap = cap
        self.comps = [list(comps[d]) if d < len(comps) else [0] * (d + 1) for d in range(cap + 1)]
        self.prec = ring.N if prec is None else min(prec, ring.N)
        self._packed = None

    @classmethod
    def from_table(cls, ring, table, cap=None):
        """From ``table[i][j]`` = coefficient of ``X^i Y^j`` (ragged, missing entries zero)."""
        if cap is None:
            cap = max((i + j for i, row in enumerate(table) for j in range(len(row))), default=0)
        comps = [[0] * (d + 1) for d in range(cap + 1)]
        for i, row in enumerate(table):
            for j, v in enumerate(row):
                if i + j <= cap:
                    comps[i + j][j] = _coerce_raw(ring, v)
        return cls(ring, comps, cap)

    @classmethod
    def from_dict(cls, ring, cap, terms: dict):
        comps = [[0] * (d + 1) for d in range(cap + 1)]
        for (i, j), v in terms.items():
            if i + j <= cap:
                comps[i + j][j] = _coerce_raw(ring, v)
        return cls(ring, comps, cap)

    @classmethod
    def zero(cls, ring, cap):
        return cls(ring, [[0] * (d + 1) for d in range(cap + 1)], cap)

    def coeff(self, i, j) -> RingElement:
        return RingElement(self.ring, self.comps[i + j][j])

    def table(self) -> list[list[RingElement]]:
        return [[self.coeff(i, j) for j in range(self.cap + 1 - i)] for i in range(self.cap + 1)]

    def nonzero_terms(self):
        for d, comp in enumerate(self.comps):
            for j, r in enumerate(comp):
                if r:
                    yield d - j, j, r

    def _check(self, other):
        if other.ring != self.ring:
            raise ValueError(f"mismatched rings: {self.ring} vs {other.ring}")
        if other.cap != self.cap:
            raise CapError(f"cap mismatch: {self.cap} vs {other.cap}")

    def __add__(self, other):
        self._check(other)
        red = self.ring.reduce
        comps = [[red(a + b) for a, b in zip(x, y)] for x, y in zip(self.comps, other.comps)]
        return Series2(self.ring, comps, self.cap, min(self.prec, other.prec))

    def __sub__(self, other):
        self._check(other)
        red = self.ring.reduce
        comps = [[red(a - b) for a, b in zip(x, y)] for x, y in zip(self.comps, other.comps)]
        return Series2(self.ring, comps, self.cap, min(self.prec, other.prec))

    def __eq__(self, other):
        if not isinstance(other, Series2):
            return NotImplemented
        if other.ring != self.ring or other.cap != self.cap:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return self.first_nonzero() is None

    def first_nonzero(self):
        """``(i, j)`` of the lowest-degree coefficient nonzero at certified precision."""
        pk = self.ring.p**self.prec
        unpack_ = self.ring.unpack
        for d, comp in enumerate(self.comps):
            for j, r in enumerate(comp):
                if r and any(x % pk for x in unpack_(r)):
                    return (d - j, j)
        return None

    def certified(self, prec):
        return Series2(self.ring, self.comps, self.cap, min(prec, self.prec))

    def truncate(self, cap):
        return Series2(self.ring, self.comps[:cap + 1], cap, self.prec)

    def reduce_to(self, N):
        target = self.ring.with_precision(N)
        conv = target.raw_convert
        comps = [[conv(r, self.ring) for r in comp] for comp in self.comps]
        return Series2(target, comps, self.cap, min(self.prec, N))

    def lift_to(self, ring):
        conv = ring.raw_convert
        comps = [[conv(r, self.ring) for r in comp] for comp in self.comps]
        return Series2(ring, comps, self.cap, ring.N if self.prec >= self.ring.N else self.prec)

    def change_ring(self, ring):
        comps = [[ring(RingElement(self.ring, r)).raw for r in comp] for comp in self.comps]
        return Series2(ring, comps, self.cap, self.prec)

    def swap(self) -> "Series2":
        """``S(Y, X)``."""
        return Series2(self.ring, [comp[::-1] for comp in self.comps], self.cap, self.prec)

    # -- packing ---------------------------------------------------------
    def packed_comps(self):
        if self._packed is None:
            self._packed = [pack(self.ring, comp) for comp in self.comps]
        return self._packed

    def packed_flat(self) -> int:
        return pack(self.ring, [r for comp in self.comps for r in comp])

    @classmethod
    def from_flat(cls, ring, big, cap, prec=None):
        flat = unpack(ring, big, _tri(cap))
        comps, pos = [], 0
        for d in range(cap + 1):
            comps.append(flat[pos:pos + d + 1])
            pos += d + 1
        return cls(ring, comps, cap, prec)

    # -- products and substitutions ----------------------------------------
    def __mul__(self, other):
        if not isinstance(other, Series2):
            s = _coerce_raw(self.ring, other)
            red = self.ring.reduce
            return Series2(self.ring, [[red(s * r) for r in comp] for comp in self.comps], self.cap, self.prec)
        self._check(other)
        return self._mul(other, 0)

    __rmul__ = __mul__

    def _mul(self, other, start):
        ring, D = self.ring, self.cap
        pa, pb = self.packed_comps(), other.packed_comps()
        lo_a = _low_degree(self.comps)
        lo_b = _low_degree(other.comps)
        comps = [[0] * (d + 1) for d in range(D + 1)]
        if lo_a is not None and lo_b is not None:
            for d in range(max(start, lo_a + lo_b), D + 1):
                acc = 0
                for e in range(lo_a, d - lo_b + 1):
                    if pa[e] and pb[d - e]:
                        acc += pa[e] * pb[d - e]
                if acc:
                    comps[d] = unpack(ring, acc, d + 1)
        return Series2(ring, comps, D, min(self.prec, other.prec))

    def powers(self, kmax: int) -> list["Series2"]:
        """``[S^0, S^1, ..., S^kmax]`` truncated at the cap (S must vanish at 0)."""
        if self.comps[0][0] != 0:
            raise ValueError("series must have zero constant term")
        one = Series2.zero(self.ring, self.cap)
        one.comps[0] = [1]
        out = [one, self]
        for k in range(2, kmax + 1):
            out.append(out[-1]._mul(self, k))
        return out

    def compose_outer(self, outer: Series1, powers=None) -> "Series2":
        """``outer(S(X, Y))``."""
        ring, D = self.ring, self.cap
        if outer.cap < D:
            raise CapError("outer series cap below two-variable cap")
        if powers is None:
            powers = self.powers(D)
        acc = 0
        for k in range(D + 1):
            if outer.c[k]:
                acc += outer.c[k] * powers[k].packed_flat()
        prec = min([self.prec, outer.prec])
        return Series2.from_flat(ring, acc, D, prec)

    def _row_combos(self, b: Series1):
        """``B_i(T) = sum_j c_ij b(T)^j`` for each i, as lists of raw coefficients."""
        ring, D = self.ring, self.cap
        bp = _packed_powers(b, D)
        combos = []
        for i in range(D + 1):
            acc = 0
            for j in range(D + 1 - i):
                r = self.comps[i + j][j]
                if r:
                    acc += r * bp[j]
            combos.append(unpack(ring, acc, D + 1) if acc else None)
        return combos

    def eval_at(self, a: Series1, b: Series1) -> Series1:
        """``S(a(X), b(X))`` as a one-variable series."""
        ring, D = self.ring, self.cap
        for s in (a, b):
            if s.cap != D or s.ring != ring:
                raise CapError("substituted series must share ring and cap")
            if s.c[0] != 0:
                raise ValueError("substituted series must have zero constant term")
        combos = self._row_combos(b)
        ap = _packed_powers(a, D)
        acc = 0
        for i, row in enumerate(combos):
            if row is not None:
                acc += ap[i] * pack(ring, row)
        c = unpack(ring, acc, D + 1)
        return Series1._raw(ring, c, D, min(self.prec, a.prec, b.prec))

    def substitute(self, a: Series1, b: Series1) -> "Series2":
        """``S(a(X), b(Y))`` as a two-variable series."""
        ring, D = self.ring, self.cap
        for s in (a, b):
            if s.cap != D or s.ring != ring:
                raise CapError("substituted series must share ring and cap")
            if s.c[0] != 0:
                raise ValueError("substituted series must have zero constant term")
        combos = self._row_combos(b)
        apow = _powers(a, D)
        packed_rows = [pack(ring, row) if row is not None else 0 for row in combos]
        comps = [[0] * (d + 1) for d in range(D + 1)]
        for n in range(D + 1):
            acc = 0
            for i in range(n + 1):
                r = apow[i][n]
                if r and packed_rows[i]:
                    acc += r * packed_rows[i]
            if acc:
                row = unpack(ring, acc, D + 1 - n)
                for m, r in enumerate(row):
                    comps[n + m][m] = r
        return Series2(ring, comps, D, min(self.prec, a.prec, b.prec))

    def at_y_zero(self) -> Series1:
        """``S(X, 0)``."""
        return Series1._raw(self.ring, [comp[0] for comp in self.comps], self.cap, self.prec)

    def dy_at_zero(self) -> Series1:
        """``(dS/dY)(X, 0)``, cap reduced by one."""
        c = [self.comps[i + 1][1] for i in range(self.cap)]
        return Series1._raw(self.ring, c, self.cap - 1, self.prec)

    # -- display -----------------------------------------------------------
    def to_json(self) -> list[list[str]]:
        text = self.ring.element_text
        return [[text(self.comps[i + j][j]) for j in range(self.cap + 1 - i)] for i in range(self.cap + 1)]

    @classmethod
    def from_json(cls, ring, table) -> "Series2":
        return cls.from_table(ring, [[ring.parse(t) for t in row] for row in table], len(table) - 1)

    def __str__(self):
        terms = []
        for i, j, r in self.nonzero_terms():
            e = self.ring.element_text(r).split(" (mod")[0]
            if self.ring.f > 1 and "+" in e:
                e = f"({e})"
            mon = "*".join(m for m in (_mono("X", i), _mono("Y", j)) if m)
            terms.append(f"{e}*{mon}" if mon else e)
        return (" + ".join(terms) if terms else "0") + f" + O(deg {self.cap + 1})"


def _mono(v, k):
    return "" if k == 0 else v if k == 1 else f"{v}^{k}"


def _low_degree(comps):
    for d, comp in enumerate(comps):
        if any(comp):
            return d
    return None


def _powers(a: Series1, kmax: int) -> list[list[int]]:
    out = [[1] + [0] * a.cap]
    cur = a
    for _ in range(1, kmax + 1):
        out.append(cur.c)
        cur = cur * a
    return out


def _packed_powers(a: Series1, kmax: int) -> list[int]:
    return [pack(a.ring, c) for c in _powers(a, kmax)]
