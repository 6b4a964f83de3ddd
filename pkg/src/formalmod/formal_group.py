"""Formal group laws and formal modules over unramified p-adic rings."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .padic import AtLeast, FieldElement, PrecisionError, RingElement, UnramifiedRing, teichmuller, vp_int
from .series import CapError, FracSeries1, Series1, Series2, pack, unpack


class AxiomError(ValueError):
    """A formal group (or module) axiom fails; names the axiom and the monomial."""

    def __init__(self, axiom: str, monomial: tuple, detail: str = ""):
        self.axiom = axiom
        self.monomial = monomial
        msg = f"{axiom} axiom fails at monomial {monomial}"
        super().__init__(msg + (f": {detail}" if detail else ""))


class RingTooSmall(ValueError):
    """The coefficient ring lacks the roots of unity an operation needs."""


@dataclass(frozen=True)
class HeightBound:
    """No unit coefficient up to the cap: the height exceeds ``lower``."""

    lower: int

    def __str__(self):
        return f"h > {self.lower}"


# ---------------------------------------------------------------------------


class FormalGroupLaw:
    """A validated one-dimensional commutative formal group law ``F(X, Y)``."""

    def __init__(self, F: Series2):
        self.F = F
        self.ring = F.ring
        self.cap = F.cap
        self._powers = None

    def powers(self):
        if self._powers is None:
            self._powers = self.F.powers(self.cap)
        return self._powers

    def __eq__(self, other):
        return isinstance(other, FormalGroupLaw) and self.F == other.F

    __hash__ = None

    def __repr__(self):
        return f"FormalGroupLaw({self.F})"


def _unit_check(F: Series2):
    pk = F.ring.p**F.prec
    unpack_ = F.ring.unpack

    def nz(r):
        return r and any(x % pk for x in unpack_(r))

    for d in range(F.cap + 1):
        want = 1 if d == 1 else 0
        for j, mono in ((0, (d, 0)), (d, (0, d))):
            r = F.comps[d][j]
            diff = F.ring.reduce(r - want)
            if nz(diff):
                raise AxiomError("unit", mono, f"coefficient {F.ring.element_text(r)}")


def _comm_check(F: Series2):
    pk = F.ring.p**F.prec
    red = F.ring.reduce
    unpack_ = F.ring.unpack
    for d, comp in enumerate(F.comps):
        for j in range(d + 1):
            diff = red(comp[j] - comp[d - j])
            if diff and any(x % pk for x in unpack_(diff)):
                raise AxiomError("commutativity", (d - j, j))


def associativity_defect(F: Series2, powers=None):
    """First monomial ``(a, b, c)`` of ``X^a Y^b Z^c`` where F(F(X,Y),Z) and F(X,F(Y,Z)) differ.

    Both sides are read off the powers of F: the left side's coefficient is
    ``sum_i c[i][c] * [F^i]_(a,b)`` and the right side's is
    ``sum_j c[a][j] * [F^j]_(b,c)``.  Returns None when they agree to cap.
    """
    ring, D = F.ring, F.cap
    if powers is None:
        powers = F.powers(D)
    pk = ring.p**F.prec
    red = ring.reduce
    unpack_ = ring.unpack
    flat = [P.packed_flat() for P in powers]
    rows = [pack(ring, [F.comps[i + j][j] for j in range(D + 1 - i)]) for i in range(D + 1)]
    best = None
    for a in range(D + 1):
        # right side: G_a = sum_j c[a][j] F^j, restricted to total degree D - a
        acc = 0
        for j in range(D + 1 - a):
            r = F.comps[a + j][j]
            if r:
                acc += r * flat[j]
        G = Series2.from_flat(ring, acc, D) if acc else Series2.zero(ring, D)
        for b in range(D + 1 - a):
            acc = 0
            for i in range(D + 1):
                if a + b < i:
                    break
                r = powers[i].comps[a + b][b]
                if r:
                    acc += r * rows[i]
            n = D + 1 - a - b
            left = unpack(ring, acc, n) if acc else [0] * n
            for c in range(n):
                diff = red(left[c] - G.comps[b + c][c])
                if diff and any(x % pk for x in unpack_(diff)):
                    cand = (a + b + c, a, b, c)
                    if best is None or cand < best:
                        best = cand
                    break
    return None if best is None else best[1:]


def fgl_verify(F: Series2) -> FormalGroupLaw:
    """Validate unit, commutativity and associativity axioms to the cap."""
    if F.cap < 2:
        raise CapError("formal group law needs cap >= 2")
    _unit_check(F)
    _comm_check(F)
    bad = associativity_defect(F)
    if bad is not None:
        raise AxiomError("associativity", bad)
    return FormalGroupLaw(F)


def additive_law(ring, cap) -> Series2:
    return Series2.from_dict(ring, cap, {(1, 0): 1, (0, 1): 1})


def multiplicative_law(ring, cap) -> Series2:
    return Series2.from_dict(ring, cap, {(1, 0): 1, (0, 1): 1, (1, 1): 1})


# ---------------------------------------------------------------------------
# Intertwining solver


@dataclass
class SolveResult:
    """Outcome of a degree-by-degree solve.

    ``status`` is ``"ok"``, ``"obstructed"`` (a coefficient is not integral) or
    ``"undecidable"`` (precision ran out before integrality could be decided).
    ``degree`` is the first failing degree; ``series`` holds what was solved.
    """

    status: str
    series: Series1
    prec: int
    degree: int | None = None
    valuation: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.status == "ok"


def intertwine(A: Series1, B: Series1, c, cap: int | None = None) -> SolveResult:
    """The series ``phi = c X + ...`` with ``phi(A(X)) = B(phi(X))``.

    ``A`` and ``B`` must share the linear coefficient ``lam``; each new
    coefficient is found by dividing by ``lam^k - lam``.  Over the fraction
    field the solution is unique; the result reports whether it is integral.

    Precision: the data are known modulo ``p^N``.  A perturbation of ``phi_i``
    enters degree ``k`` through ``[A^i]_k`` (a unit only on the unit path of A)
    and through ``j B_j phi^(j-1)`` (divisible by p when ``j B_j`` is for all
    j >= 2), so the certified precision of ``phi_k`` is
    ``min(N, P_i + gain_ik) - v(lam^k - lam)`` over ``i < k``.
    """
    ring = A.ring
    if B.ring != ring:
        raise ValueError("A and B must share a ring")
    D = min(A.cap, B.cap) if cap is None else cap
    A, B = A.truncate(D), B.truncate(D)
    if A.c[0] or B.c[0]:
        raise ValueError("series must have zero constant term")
    lam = A.c[1]
    if B.c[1] != lam:
        raise ValueError("A and B must have the same linear coefficient")
    p = ring.p
    red = ring.reduce
    c = c.raw if isinstance(c, RingElement) else ring.raw_from_int(c)
    N_in = min(A.prec, B.prec)

    # does every j*B_j (j >= 2) vanish mod p?
    b_gain = 1
    for j in range(2, D + 1):
        if B.c[j] and ring.raw_valuation(ring.reduce(j * B.c[j])) == 0:
            b_gain = 0
            break

    # A-power table: apow[i][k] = [A^i]_k
    apow = [None, A.c]
    cur = A
    for _ in range(2, D + 1):
        cur = cur * A
        apow.append(cur.c)
    a_unit = [[False] * (D + 1) for _ in range(D + 1)]
    for i in range(1, D + 1):
        for k in range(i, D + 1):
            r = apow[i][k]
            if r and ring.raw_valuation(r) == 0:
                a_unit[i][k] = True
    jmax = max((j for j in range(2, D + 1) if B.c[j]), default=1)

    phi = [0] * (D + 1)
    phi[1] = c
    P = [N_in] * (D + 1)
    # T[j][k] = [phi^j]_k
    T = {1: phi}
    for j in range(2, jmax + 1):
        T[j] = [0] * (D + 1)
    lam_pows = [1]
    for _ in range(D):
        lam_pows.append(red(lam_pows[-1] * lam))
    if not c:
        return SolveResult("ok", Series1._raw(ring, [0] * (D + 1), D, N_in), N_in)

    for k in range(2, D + 1):
        for j in range(2, min(k, jmax) + 1):
            prev = T[j - 1]
            acc = 0
            for i in range(1, k - j + 2):
                if phi[i] and prev[k - i]:
                    acc += phi[i] * prev[k - i]
            T[j][k] = red(acc) if acc else 0
        acc = 0
        for j in range(2, min(k, jmax) + 1):
            if B.c[j] and T[j][k]:
                acc += B.c[j] * T[j][k]
        for i in range(1, k):
            if phi[i] and apow[i][k]:
                acc -= phi[i] * apow[i][k]
        num = red(acc)
        bound = N_in
        for i in range(1, k):
            gain = 0 if a_unit[i][k] else 1
            bound = min(bound, P[i] + min(gain, b_gain))
        div = red(lam_pows[k] - lam)
        vdiv = ring.raw_valuation(div)
        if isinstance(vdiv, AtLeast):
            raise PrecisionError(f"divisor lam^{k} - lam vanishes at precision {ring.N}")
        vnum = ring.raw_valuation(num)
        vnum_known = vnum if not isinstance(vnum, AtLeast) and vnum < bound else None
        partial = Series1._raw(ring, phi[:k] + [0] * (D + 1 - k), D, min(P[:k]))
        if vnum_known is not None and vnum_known < vdiv:
            return SolveResult("obstructed", partial, min(P[:k]), k, vnum_known - vdiv)
        if vnum_known is None and bound < vdiv:
            return SolveResult("undecidable", partial, min(P[:k]), k)
        P[k] = bound - vdiv
        if P[k] < 1:
            return SolveResult("undecidable", partial, min(P[:k]), k)
        q = ring.raw_divexact_p(num, vdiv)
        u = ring.raw_divexact_p(div, vdiv)
        phi[k] = red(q * ring.raw_inverse(u))
    prec = min(P[1:]) if D >= 1 else N_in
    return SolveResult("ok", Series1._raw(ring, phi, D, prec), prec)


# ---------------------------------------------------------------------------


def is_homomorphism(phi: Series1, F: Series2, G: Series2, F_powers=None):
    """``phi(F(X,Y)) == G(phi(X), phi(Y))`` to cap; returns the first bad monomial or None."""
    lhs = F.compose_outer(phi, F_powers)
    rhs = G.substitute(phi, phi)
    diff = lhs - rhs
    diff = diff.certified(min(lhs.prec, rhs.prec))
    return diff.first_nonzero()


class FormalModule:
    """A formal group law together with its ``[p]``-series (and optionally ``[omega]``).

    ``frobenius`` carries the Lubin-Tate certificate when the module came from
    :func:`formalmod.lubin_tate.lt_group`.
    """

    def __init__(self, fgl: FormalGroupLaw, pi_series: Series1, omega_series: Series1 | None = None,
                 frobenius=None, check: bool = True):
        if not isinstance(fgl, FormalGroupLaw):
            fgl = fgl_verify(fgl) if check else FormalGroupLaw(fgl)
        self.fgl = fgl
        self.pi_series = pi_series
        self.omega_series = omega_series
        self.frobenius = frobenius
        self.height_cache = None
        if check:
            self.validate()

    @property
    def ring(self) -> UnramifiedRing:
        return self.fgl.ring

    @property
    def cap(self) -> int:
        return self.fgl.cap

    @property
    def F(self) -> Series2:
        return self.fgl.F

    @property
    def p(self) -> int:
        return self.ring.p

    @property
    def prec(self) -> int:
        return min(self.F.prec, self.pi_series.prec)

    def validate(self):
        ring, p = self.ring, self.ring.p
        pi = self.pi_series
        if pi.ring != ring or pi.cap != self.cap:
            raise CapError("pi series must share ring and cap with F")
        if pi.c[0] != 0 or pi.c[1] != ring.raw_from_int(p):
            raise AxiomError("pi-linear", (1,), "linear coefficient of [pi] must be p")
        bad = is_homomorphism(pi, self.F, self.F, self.fgl.powers())
        if bad is not None:
            raise AxiomError("pi-endomorphism", bad)
        om = self.omega_series
        if om is not None:
            w = om[1]
            if not w.is_unit():
                raise AxiomError("omega-linear", (1,), "linear coefficient must be a unit")
            if not _is_root_of_unity(w):
                raise AxiomError("omega-linear", (1,), "linear coefficient is not a root of unity")
            bad = is_homomorphism(om, self.F, self.F, self.fgl.powers())
            if bad is not None:
                raise AxiomError("omega-endomorphism", bad)
            d = (pi.compose(om) - om.compose(pi)).first_nonzero()
            if d is not None:
                raise AxiomError("omega-commutes", (d,))
        return self

    def __repr__(self):
        return f"FormalModule(ring={self.ring}, cap={self.cap})"

    # -- interchange -------------------------------------------------------
    def to_json(self) -> dict:
        ring = self.ring
        out = {"p": ring.p, "f": ring.f, "N": ring.N, "D": self.cap,
               "F": self.F.to_json(), "pi": self.pi_series.to_json()}
        if self.omega_series is not None:
            out["omega"] = self.omega_series.to_json()
        if ring.f > 1:
            out["modulus"] = list(ring.modulus)
        if self.frobenius is not None:
            out["frobenius"] = {"q": self.frobenius.q, "f": self.frobenius.f.to_json()}
        return out

    @classmethod
    def from_json(cls, data: dict, check: bool = True) -> "FormalModule":
        ring = UnramifiedRing(int(data["p"]), int(data["f"]), int(data["N"]), data.get("modulus"))
        D = int(data["D"])
        F = Series2.from_json(ring, data["F"])
        if F.cap != D:
            raise CapError(f"F table has cap {F.cap}, descriptor says D={D}")
        pi = Series1.from_json(ring, data["pi"])
        om = Series1.from_json(ring, data["omega"]) if data.get("omega") else None
        frob = None
        if data.get("frobenius"):
            from .lubin_tate import lt_validate

            fr = data["frobenius"]
            frob = lt_validate(Series1.from_json(ring, fr["f"]), int(fr["q"]))
            if frob.f != pi:
                raise AxiomError("frobenius", (1,), "pi series differs from the Frobenius series")
        return cls(F if not check else fgl_verify(F), pi, om, frobenius=frob, check=check)


def _is_root_of_unity(w: RingElement) -> bool:
    # roots of unity in O_E: mu_(q-1), times +-1 when p = 2
    return w ** (2 * (w.ring.q - 1)) == 1


def additive_module(ring, cap) -> FormalModule:
    pi = Series1.monomials(ring, cap, {1: ring.p})
    return FormalModule(additive_law(ring, cap), pi)


def multiplicative_module(ring, cap) -> FormalModule:
    """``F = X + Y + XY`` with ``[p](X) = (1+X)^p - 1``."""
    p = ring.p
    pi = Series1.monomials(ring, cap, {k: math.comb(p, k) for k in range(1, p + 1)})
    return FormalModule(multiplicative_law(ring, cap), pi)


# ---------------------------------------------------------------------------
# Group operations


def _law(m):
    if isinstance(m, FormalModule):
        return m.F
    if isinstance(m, FormalGroupLaw):
        return m.F
    return m


def fplus(m, a: Series1, b: Series1) -> Series1:
    """``a +_F b = F(a(X), b(X))``."""
    if a.c[0] or b.c[0]:
        raise ValueError("fplus needs series with zero constant term")
    return _law(m).eval_at(a, b)


def _dy(F: Series2) -> Series2:
    ring, D = F.ring, F.cap
    comps = [[0] * (d + 1) for d in range(D + 1)]
    for d in range(1, D + 1):
        for j in range(1, d + 1):
            r = F.comps[d][j]
            if r:
                comps[d - 1][j - 1] = ring.reduce(j * r)
    return Series2(ring, comps, D, F.prec)


def inv_F(m) -> Series1:
    """Formal inverse ``i(X)`` with ``F(X, i(X)) = 0`` (Newton iteration)."""
    F = _law(m)
    ring, D = F.ring, F.cap
    X = Series1.X(ring, D)
    Fy = _dy(F)
    iota = -X
    n = 1
    while n <= D:
        n *= 2
        iota = iota - F.eval_at(X, iota) * Fy.eval_at(X, iota).inverse()
    return iota.certified(F.prec)


def int_mult(m, k: int) -> Series1:
    """``[k](X)`` built from the group law by double-and-add."""
    F = _law(m)
    ring, D = F.ring, F.cap
    base = Series1.X(ring, D)
    if k < 0:
        base, k = inv_F(m), -k
    result = Series1.zero(ring, D)
    while k:
        if k & 1:
            result = F.eval_at(result, base)
        base = F.eval_at(base, base)
        k >>= 1
    return result.certified(F.prec)


def transport(m: FormalModule, u: Series1, check: bool = False) -> FormalModule:
    """The module carried along ``u``: ``G = u(F(v(X), v(Y)))`` with ``v = u^-1``.

    ``u`` is then an isomorphism ``F -> G``.  ``u`` needs a unit linear term.
    """
    v = u.reversion()
    G = m.F.substitute(v, v).compose_outer(u)
    pi = u.compose(m.pi_series.compose(v))
    om = u.compose(m.omega_series.compose(v)) if m.omega_series is not None else None
    return FormalModule(FormalGroupLaw(G), pi, om, check=check)


def height(m: FormalModule):
    """Height from the first unit coefficient of ``[pi](X)``: returns h or a :class:`HeightBound`.

    ``m`` is a module or a bare ``[pi]``-series.
    """
    pi = m if isinstance(m, Series1) else m.pi_series
    ring, p = pi.ring, pi.ring.p
    units = [i for i in range(1, pi.cap + 1) if pi.c[i] and ring.raw_valuation(pi.c[i]) == 0]
    if not units:
        lower = 0
        while p ** (lower + 1) <= pi.cap:
            lower += 1
        result = HeightBound(lower)
    else:
        first = units[0]
        h = 0
        n = first
        while n % p == 0:
            n //= p
            h += 1
        if n != 1 or h == 0:
            raise AxiomError("height", (first,), f"first unit index {first} is not a power of {p}")
        bad = [i for i in units if i % first]
        if bad:
            raise AxiomError("height", (bad[0],), f"[pi] mod p is not a series in X^{first}")
        result = h
    if not isinstance(m, Series1):
        m.height_cache = result
    return result


def flog(m) -> FracSeries1:
    """Formal logarithm ``int dX / F_Y(X, 0)``, normalised with log'(0) = 1."""
    F = _law(m)
    inv = F.dy_at_zero().inverse()
    for k in range(1, F.cap + 1):
        if (vp_int(k, F.ring.p) or 0) >= inv.prec:
            raise PrecisionError(f"cannot divide by {k} at degree {k}: precision {inv.prec} exhausted")
    return inv.integrate()


def fexp(m) -> FracSeries1:
    """Formal exponential, the compositional inverse of :func:`flog`."""
    return flog(m).reversion()


def primitive_root_of_unity(ring: UnramifiedRing, order: int) -> RingElement:
    """Teichmuller lift of an element of exact order ``order`` in the residue field."""
    if (ring.q - 1) % order:
        raise RingTooSmall(f"mu_{order} is not contained in the ring (q_E - 1 = {ring.q - 1})")
    gamma = ring.primitive_residue()
    small = ring.with_precision(1)
    r = small.raw_pow(small.pack(gamma), (ring.q - 1) // order)
    return teichmuller(ring, small.unpack(r))


def module_structure_solve(m: FormalModule, q: int) -> SolveResult:
    """Look for ``[omega](X) = omega X + ...`` on ``m`` with omega of order q - 1.

    On success ``result.series`` commutes with ``[pi]`` and is an endomorphism
    of F; otherwise ``result.degree`` is the first obstructed degree.
    """
    ring = m.ring
    p = ring.p
    n, h = q, 0
    while n % p == 0:
        n //= p
        h += 1
    if n != 1 or h == 0:
        raise ValueError(f"q={q} is not a power of p={p}")
    omega = primitive_root_of_unity(ring, q - 1)
    res = intertwine(m.pi_series, m.pi_series, omega)
    if res:
        phi = res.series
        bad = is_homomorphism(phi, m.F, m.F, m.fgl.powers())
        if bad is not None:
            return SolveResult("obstructed", phi, res.prec, sum(bad))
    return res
