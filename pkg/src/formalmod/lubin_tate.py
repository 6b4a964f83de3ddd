"""Lubin-Tate formal modules for the parameter p over unramified rings.

A Frobenius series ``f`` satisfies ``f = pX mod deg 2`` and ``f = X^q mod p``.
Its coefficients are read as exact integers (their representatives in
``[0, p^N)``), so every construction here can be run at a higher internal
precision and truncated back: the results are certified to the full ring
precision ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .formal_group import AxiomError, FormalGroupLaw, FormalModule, SolveResult, intertwine
from .padic import PrecisionError, RingElement, UnramifiedRing
from .series import CapError, Series1, Series2, pack, unpack


class LubinTateError(ValueError):
    """A congruence required of a Frobenius series fails."""

    def __init__(self, message, degree):
        self.degree = degree
        super().__init__(message)


@dataclass(frozen=True)
class FrobeniusSeries:
    f: Series1
    q: int
    h: int

    @property
    def ring(self) -> UnramifiedRing:
        return self.f.ring

    @property
    def cap(self) -> int:
        return self.f.cap


def _log_p(q, p):
    h, n = 0, q
    while n % p == 0:
        n //= p
        h += 1
    if n != 1 or h == 0:
        raise ValueError(f"q={q} is not a positive power of p={p}")
    return h


def lt_validate(f: Series1, q: int) -> FrobeniusSeries:
    ring = f.ring
    p = ring.p
    h = _log_p(q, p)
    if f.cap < q:
        raise CapError(f"cap {f.cap} below q={q}")
    if f.c[0] != 0:
        raise LubinTateError("constant term must vanish", 0)
    if f.c[1] != ring.raw_from_int(p):
        raise LubinTateError(f"linear coefficient must be p={p}", 1)
    for k in range(2, f.cap + 1):
        r = f.c[k]
        residue = tuple(x % p for x in ring.unpack(r))
        if k == q:
            if residue != (1,) + (0,) * (ring.f - 1):
                raise LubinTateError(f"coefficient of X^{q} must be congruent to 1 mod p", k)
        elif any(residue):
            raise LubinTateError(f"coefficient of X^{k} must be divisible by p", k)
    return FrobeniusSeries(f, q, h)


def canonical_frobenius(ring: UnramifiedRing, q: int, cap: int) -> FrobeniusSeries:
    """``pX + X^q``."""
    return lt_validate(Series1.monomials(ring, cap, {1: ring.p, q: 1}), q)


def guard_digits(q: int, cap: int) -> int:
    """Digits lost by the degree-by-degree Lubin-Tate solves up to ``cap``.

    A coefficient of degree d is certified to ``min(M, P_e + 1 (e < d),
    P_(d/q)) - 1``: every dependency carries a factor p except the one through
    ``X -> X^q``.  Returns ``M - min_d P_d``.
    """
    P = [0] * (cap + 1)  # P[1] = 0: the linear coefficient is exact
    worst = 0
    run = 10**9  # min over e in [2, d) of P_e
    for d in range(2, cap + 1):
        bound = min(0, run + 1)
        if d % q == 0:
            bound = min(bound, P[d // q])
        P[d] = bound - 1
        run = min(run, P[d])
        worst = min(worst, P[d])
    return -worst


def _work_ring(ring, q, cap):
    return ring.with_precision(ring.N + guard_digits(q, cap))


def lt_group(frob: FrobeniusSeries, cap: int | None = None, check: bool = False) -> FormalModule:
    """The Lubin-Tate formal group ``F_f`` with ``f(F) = F(f, f)``, as a formal module.

    Solved by total degree: the degree-d component ``E_d`` satisfies
    ``(p - p^d) E_d = [F_<d(f(X), f(Y))]_d - sum_k f_k [F^k]_d``.
    """
    ring, q = frob.ring, frob.q
    D = frob.cap if cap is None else cap
    if D > frob.cap:
        raise CapError(f"cap {D} exceeds the Frobenius series cap {frob.cap}")
    work = _work_ring(ring, q, D)
    p = ring.p
    red = work.reduce
    fw = frob.f.truncate(D).lift_to(work)

    # fp[i] = coefficients of f^i, with sparse index lists
    fp = [[1] + [0] * D, fw.c]
    cur = fw
    for _ in range(2, D + 1):
        cur = cur * fw
        fp.append(cur.c)
    nz = [[a for a, r in enumerate(row) if r] for row in fp]
    kmax = max((k for k in range(2, D + 1) if fw.c[k]), default=1)

    comps = [[0] * (d + 1) for d in range(D + 1)]
    comps[1] = [1, 1]
    packed = [0] * (D + 1)
    packed[1] = pack(work, comps[1])
    # acc[d][b]: running sum of c_ij [f^i]_a [f^j]_b over solved (i, j)
    acc = [[0] * (d + 1) for d in range(D + 1)]

    def absorb(d):
        comp = comps[d]
        for j, cij in enumerate(comp):
            if not cij:
                continue
            i = d - j
            for a in nz[i]:
                s = red(cij * fp[i][a])
                if not s:
                    continue
                rowj, lim = fp[j], D - a
                for b in nz[j]:
                    if b > lim:
                        break
                    acc[a + b][b] += s * rowj[b]

    absorb(1)
    # powk[k][d] = packed [F^k]_d for 2 <= k <= kmax
    powk = {k: [0] * (D + 1) for k in range(2, kmax + 1)}
    powk[1] = packed
    powraw = {k: [None] * (D + 1) for k in range(2, kmax + 1)}
    for d in range(2, D + 1):
        num = [red(x) for x in acc[d]]
        for k in range(2, min(d, kmax) + 1):
            s = 0
            prevk = powk[k - 1]
            for e in range(1, d - k + 2):
                if packed[e] and prevk[d - e]:
                    s += packed[e] * prevk[d - e]
            if s:
                comp = unpack(work, s, d + 1)
                powraw[k][d] = comp
                powk[k][d] = pack(work, comp)
                fk = fw.c[k]
                if fk:
                    num = [red(x - fk * y) for x, y in zip(num, comp)]
        # divide by p - p^d = p (1 - p^(d-1))
        unit_inv = pow(1 - p ** (d - 1), -1, work.pN)
        new = []
        for j, x in enumerate(num):
            if x and work.raw_valuation(x) == 0:
                raise AxiomError("lubin-tate-solver", (d - j, j), "numerator not divisible by p")
            new.append(red(work.raw_divexact_p(x, 1) * unit_inv))
        comps[d] = new
        packed[d] = pack(work, new) if any(new) else 0
        absorb(d)

    F = Series2(work, comps, D).reduce_to(ring.N)
    pi = frob.f.truncate(D)
    if D != frob.cap:
        frob = FrobeniusSeries(pi, frob.q, frob.h)
    return FormalModule(FormalGroupLaw(F), pi, frobenius=frob, check=check)


def _bracket(frob_a: FrobeniusSeries, frob_b: FrobeniusSeries, a, cap) -> SolveResult:
    ring = frob_a.ring
    D = min(frob_a.cap, frob_b.cap) if cap is None else cap
    work = _work_ring(ring, frob_a.q, D)
    A = frob_a.f.truncate(D).lift_to(work)
    B = frob_b.f.truncate(D).lift_to(work)
    res = intertwine(A, B, work(a))
    if not res:
        raise PrecisionError(f"Lubin-Tate solve failed ({res.status}) at degree {res.degree}")
    if res.prec < ring.N:
        raise PrecisionError(f"certified precision {res.prec} below ring precision {ring.N}")
    return res


def lt_bracket(frob: FrobeniusSeries, a, cap: int | None = None) -> Series1:
    """``[a]_f``: the endomorphism of ``F_f`` with linear term ``a`` commuting with f.

    ``a`` (an int, a coordinate list or a ring element of any precision) is
    read through its coordinates as an exact element.  ``[a]_f mod p^N`` is
    not a function of ``a mod p^N``, so pass ``a`` at the precision it is
    actually known to; digits beyond ``N`` plus the guard are not used.
    """
    res = _bracket(frob, frob, a, cap)
    return res.series.reduce_to(frob.ring.N)


def lt_iso(f: FrobeniusSeries, g: FrobeniusSeries, cap: int | None = None) -> Series1:
    """``u = X + ...`` with ``u o f = g o u``; it carries ``F_f`` isomorphically onto ``F_g``."""
    if f.q != g.q:
        raise ValueError(f"mismatched q: {f.q} vs {g.q}")
    if f.ring != g.ring:
        raise ValueError(f"mismatched rings: {f.ring} vs {g.ring}")
    res = _bracket(f, g, 1, cap)
    return res.series.reduce_to(f.ring.N)


def lt_residual(m: FormalModule) -> Series2:
    """``f(F(X,Y)) - F(f(X), f(Y))`` for a module with pi series f."""
    F, f = m.F, m.pi_series
    return F.compose_outer(f, m.fgl.powers()) - F.substitute(f, f)
