"""Finite-precision detection of homomorphisms and endomorphism rings.

The c-map sends a homomorphism ``F -> G`` to its linear coefficient.  For a
candidate c, the unique fraction-field homomorphism with linear term c is
``exp_G(c log_F(X))``; it is also the unique series with that linear term
intertwining the ``[p]``-series, which is how it is computed here (no
denominators beyond the ones forced by integrality).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formal_group import FormalModule, SolveResult, height, intertwine, is_homomorphism
from .lubin_tate import lt_iso
from .padic import PrecisionError, RingElement, UnramifiedRing, teichmuller
from .series import Series1


class UndecidableError(PrecisionError):
    """Integrality of some candidate could not be decided at the working precision."""


@dataclass
class CTest:
    """Outcome of :func:`c_integral_test`; ``integral`` is True, False or None (undecidable)."""

    integral: bool | None
    witness: Series1 | None
    degree: int | None = None
    prec: int | None = None

    def __bool__(self):
        return bool(self.integral)


def _same_ring(F: FormalModule, G: FormalModule):
    if F.ring != G.ring:
        raise ValueError(f"modules live over different rings: {F.ring} vs {G.ring}")
    if F.cap != G.cap:
        raise ValueError(f"modules have different caps: {F.cap} vs {G.cap}")


def c_integral_test(F: FormalModule, G: FormalModule, c) -> CTest:
    """Is ``exp_G(c log_F(X))`` integral to the cap?"""
    _same_ring(F, G)
    c = F.ring(c)
    res = intertwine(F.pi_series, G.pi_series, c)
    if res.status == "ok":
        return CTest(True, res.series, None, res.prec)
    if res.status == "obstructed":
        return CTest(False, None, res.degree, res.prec)
    return CTest(None, None, res.degree, res.prec)


@dataclass
class EndoRingReport:
    m: int
    found_c: list[RingElement]
    residue_degree: int
    full_height: bool
    saturated: bool
    height: object = None
    proxy: bool = True

    def residues(self) -> set[tuple[int, ...]]:
        return {c.coeffs for c in self.found_c}

    def to_json(self) -> dict:
        return {"m": self.m, "found_c": [str(c) for c in self.found_c],
                "residue_degree": self.residue_degree, "full_height": self.full_height,
                "saturated": self.saturated, "saturation_is_proxy": self.proxy}


def _residue_field_degree(ring_m: UnramifiedRing, found) -> int:
    p = ring_m.p
    residues = {tuple(x % p for x in c.coeffs) for c in found}
    k, size = 0, 1
    while size < len(residues):
        size *= p
        k += 1
    if size != len(residues):
        raise AssertionError(f"residues of detected ring do not form a field ({len(residues)} elements)")
    return k


def _check_closed(found: list[RingElement]):
    s = set(found)
    for a in found:
        for b in found:
            if a + b not in s or a * b not in s:
                raise AssertionError(f"detected set not closed under ring operations at ({a}, {b})")


def endo_ring(F: FormalModule, m: int = 3, exhaustive: bool = False) -> EndoRingReport:
    """Detect ``End(F)`` modulo ``p^m`` through the c-map.

    Every endomorphism ring contains ``Z_p`` (checked by testing c = 1), so by
    default only one representative per coset of ``Z/p^m`` is tested: the
    candidates with vanishing constant coordinate.  ``exhaustive=True`` tests
    every residue class.
    """
    ring = F.ring
    p = ring.p
    ring_m = ring.with_precision(m)
    pm = p**m

    def test(coeffs):
        res = c_integral_test(F, F, ring(list(coeffs)))
        if res.integral is None:
            raise UndecidableError(f"undecidable at (degree {res.degree}, precision {res.prec}) for c={coeffs}")
        return res.integral

    if not test((1,)):
        raise AssertionError("c = 1 not detected: module data inconsistent")
    found = []
    if exhaustive or ring.f == 1:
        for coeffs in itertools.product(range(pm), repeat=ring.f):
            coeffs = tuple(reversed(coeffs))
            if test(coeffs):
                found.append(coeffs)
    else:
        for tail in itertools.product(range(pm), repeat=ring.f - 1):
            if test((0,) + tail):
                found.extend((c0,) + tail for c0 in range(pm))
    elems = sorted({ring_m(list(c)) for c in found}, key=lambda e: tuple(reversed(e.coeffs)))
    _check_closed(elems)
    h = height(F)
    rdeg = _residue_field_degree(ring_m, elems)
    full = isinstance(h, int) and rdeg == h
    report = EndoRingReport(m, elems, rdeg, full, False, h)
    report.saturated = saturation_check(report) if m >= 2 else False
    return report


def saturation_check(report: EndoRingReport) -> bool:
    """Finite-precision stand-in for integral closedness of the detected ring.

    (i) if c is in the set and c = 0 mod p then c/p is in it modulo p^(m-1);
    (ii) the set contains the Teichmuller lifts of its own residues.
    """
    m = report.m
    if m < 2 or not report.found_c:
        return False
    ring_m = report.found_c[0].ring
    p = ring_m.p
    reduced = {tuple(x % p ** (m - 1) for x in c.coeffs) for c in report.found_c}
    have = {c.coeffs for c in report.found_c}
    for c in report.found_c:
        coeffs = c.coeffs
        if all(x % p == 0 for x in coeffs):
            half = tuple((x // p) % p ** (m - 1) for x in coeffs)
            if half not in reduced:
                return False
    residues = {tuple(x % p for x in c.coeffs) for c in report.found_c}
    for r in residues:
        if any(r):
            if teichmuller(ring_m, r).coeffs not in have:
                return False
    return True


# ---------------------------------------------------------------------------


def _units_mod(ring: UnramifiedRing, m: int):
    """Units mod p^m as omega (1 + p t): Teichmuller digit, then the rest."""
    p = ring.p
    seen = set()
    one = ring.one
    yield one
    seen.add(one.raw)
    for r in ring.residues():
        r = tuple(reversed(r))
        if not any(r):
            continue
        w = teichmuller(ring, r)
        for t in itertools.product(range(p ** (m - 1)), repeat=ring.f):
            c = w * (1 + p * ring(list(reversed(t))))
            c = ring(list(x % p**m for x in c.coeffs))
            if c.raw not in seen:
                seen.add(c.raw)
                yield c


def isomorphism_search(F: FormalModule, G: FormalModule, m: int = 2) -> SolveResult:
    """An isomorphism ``u: F -> G`` with unit linear term, or the obstruction found.

    Lubin-Tate pairs with equal q are handled by the canonical iso; otherwise
    unit candidates mod p^m are tried in turn.
    """
    _same_ring(F, G)
    hF, hG = height(F), height(G)
    if not (isinstance(hF, int) and isinstance(hG, int)) or hF != hG:
        return SolveResult("obstructed", None, 0, None, reason=f"heights differ: {hF} vs {hG}")
    if F.frobenius is not None and G.frobenius is not None and F.frobenius.q == G.frobenius.q:
        u = lt_iso(F.frobenius, G.frobenius, F.cap)
        bad = is_homomorphism(u, F.F, G.F, F.fgl.powers())
        if bad is not None:
            return SolveResult("obstructed", u, u.prec, sum(bad), reason=f"iso residual at {bad}")
        return SolveResult("ok", u, u.prec)
    last = None
    for c in _units_mod(F.ring, m):
        res = intertwine(F.pi_series, G.pi_series, c)
        if res.status == "undecidable":
            last = res
            continue
        if not res:
            last = last or res
            continue
        bad = is_homomorphism(res.series, F.F, G.F, F.fgl.powers())
        if bad is None:
            return res
    if last is None:
        return SolveResult("obstructed", None, 0, None, reason="no unit candidate is a homomorphism")
    last.reason = "no integral unit candidate"
    return last


@dataclass
class HomReport:
    nonzero: bool
    witness: Series1 | None
    kernel_size_hint: int | None
    linear_coefficient: RingElement | None = None


def hom_report(F: FormalModule, G: FormalModule, m: int = 2) -> HomReport:
    """Search for a nonzero integral homomorphism, lowest linear valuation first.

    The kernel hint ``p^(h v_p(c))`` is a heuristic, not a certified order.
    """
    _same_ring(F, G)
    ring = F.ring
    p = ring.p
    cands = [c for c in ring.with_precision(m).elements_mod(m) if c.raw]
    cands.sort(key=lambda c: (c.valuation(), tuple(reversed(c.coeffs))))
    h = height(F)
    for c in cands:
        res = c_integral_test(F, G, ring(c))
        if res.integral:
            v = c.valuation()
            hint = p ** (h * v) if isinstance(h, int) else None
            return HomReport(True, res.witness, hint, ring(c))
    return HomReport(False, None, None)
