"""Torsion points through Newton polygons of iterated ``[pi]``-series.

Torsion points are never computed as field elements.  Everything is read off
the lower convex hull of ``(i, v(a_i))``: a segment of slope ``-s`` and
horizontal length ``l`` stands for ``l`` roots of valuation ``s``.  All slope
arithmetic is done with :class:`fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

from .formal_group import FormalModule, HeightBound, height
from .padic import AtLeast, PrecisionError
from .series import CapError, Series1, check_cap


def _frac_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class NewtonPolygon:
    """Segments as ``(root valuation, length)``, root valuations decreasing."""

    segments: list[tuple[Fraction, int]]
    source_degrees: tuple[int, int]
    vertices: list[tuple[int, int]] = field(default_factory=list)

    @property
    def total_length(self) -> int:
        return sum(length for _, length in self.segments)

    def restrict(self, lo: int, hi: int) -> list[tuple[Fraction, int]]:
        """Segments clipped to abscissae ``[lo, hi]``."""
        out = []
        for (x0, _), (x1, _), (s, _) in zip(self.vertices, self.vertices[1:], self.segments):
            a, b = max(x0, lo), min(x1, hi)
            if b > a:
                out.append((s, b - a))
        return out


def _valuation_point(s: Series1, i):
    r = s.c[i]
    if not r:
        return AtLeast(s.prec)
    v = s.ring.raw_valuation(r)
    if isinstance(v, AtLeast) or v >= s.prec:
        return AtLeast(s.prec)
    return v


def newton_polygon(s: Series1, span=None) -> NewtonPolygon:
    """Lower convex hull of ``{(i, v(a_i)) : lo <= i <= hi}``.

    Coefficients known only as ``>= bound`` may be skipped when the bound lies
    strictly above the hull; otherwise the precision is insufficient.
    """
    lo, hi = (1, s.cap) if span is None else span
    if hi > s.cap:
        raise CapError(f"span reaches degree {hi} but cap is {s.cap}")
    exact, bounded = [], []
    for i in range(lo, hi + 1):
        v = _valuation_point(s, i)
        (bounded if isinstance(v, AtLeast) else exact).append((i, v if not isinstance(v, AtLeast) else v.bound))
    if not exact or exact[0][0] != lo or exact[-1][0] != hi:
        raise PrecisionError(
            f"insufficient precision: endpoint coefficient of degree {lo if not exact or exact[0][0] != lo else hi} "
            f"is zero to precision {s.prec}")
    hull: list[tuple[int, int]] = []
    for pt in exact:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)

    def hull_y(x):
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            if x1 <= x <= x2:
                return Fraction(y1) + Fraction(y2 - y1, x2 - x1) * (x - x1)
        return Fraction(hull[0][1])

    for i, b in bounded:
        if b <= hull_y(i):
            raise PrecisionError(
                f"insufficient precision: coefficient of degree {i} known only as >= {b}, "
                f"could be a vertex of the polygon")
    segments = [(Fraction(y1 - y2, x2 - x1), x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])]
    return NewtonPolygon(segments, (lo, hi), hull)


# ---------------------------------------------------------------------------


def _exact_q(m: FormalModule) -> int:
    h = height(m)
    if isinstance(h, HeightBound):
        raise PrecisionError(f"height not certified ({h}); torsion analysis needs an exact height")
    return m.p**h


def pi_power(m: FormalModule, n: int) -> Series1:
    """``[pi^n]``: the n-fold composite of the pi series."""
    if n < 1:
        raise ValueError("n must be positive")
    check_cap(m.cap, _exact_q(m), n)
    s = m.pi_series
    out = s
    for _ in range(n - 1):
        out = s.compose(out)
    return out


@dataclass
class TorsionReport:
    n: int
    q: int
    new_point_count: int
    new_valuation: Fraction | list | None
    cumulative_count: int
    new_segments: list = field(default_factory=list)

    def valuations(self) -> list[Fraction]:
        return [s for s, _ in self.new_segments]

    def to_json(self) -> dict:
        v = self.new_valuation
        if isinstance(v, list):
            v = [_frac_text(x) for x in v]
        elif v is not None:
            v = _frac_text(v)
        return {"n": self.n, "new_count": self.new_point_count, "valuation": v,
                "cumulative_count": self.cumulative_count}


def torsion_valuations(m: FormalModule, n: int) -> TorsionReport:
    """Valuations and counts of the points killed by ``pi^n`` but not ``pi^(n-1)``."""
    q = _exact_q(m)
    if n == 0:
        return TorsionReport(0, q, 0, None, 0)
    s = pi_power(m, n)
    poly = newton_polygon(s, (1, q**n))
    total = poly.total_length
    if total != q**n - 1:
        raise AssertionError(f"root count {total} differs from q^n - 1 = {q**n - 1}")
    new = poly.restrict(q ** (n - 1), q**n)
    count = sum(length for _, length in new)
    vals = [v for v, _ in new]
    val = vals[0] if len(vals) == 1 else vals
    return TorsionReport(n, q, count, val, total, new)


@dataclass
class DivisionFieldReport:
    n: int
    q: int
    predicted_degree: int | None
    ramification_index: int
    totally_ramified: bool | None
    single_generator: bool | None
    m_lower: int = 1
    m_value: int | None = None
    m_upper: int | None = None
    full_height: bool = False
    torsion: TorsionReport | None = None

    def to_json(self) -> dict:
        t = self.torsion.to_json() if self.torsion else {}
        return {"n": self.n, "new_count": t.get("new_count"), "valuation": t.get("valuation"),
                "degree": self.predicted_degree, "e": self.ramification_index,
                "totally_ramified": self.totally_ramified, "m": self.m_value,
                "m_bounds": [self.m_lower, self.m_upper]}


def certify_full_height(m: FormalModule, depth: int = 2) -> bool:
    from .endo import endo_ring

    cached = getattr(m, "full_height_cache", None)
    if cached is None:
        cached = endo_ring(m, depth).full_height
        m.full_height_cache = cached
    return cached


def division_field_report(m: FormalModule, n: int, full_height: bool | None = None) -> DivisionFieldReport:
    """Degree and ramification of the level-n division field.

    With full height certified the degree is ``q^(n-1)(q-1)`` (the order of
    the unit group at level n); the ramification index is at least the
    denominator of a new torsion valuation, and when that denominator already
    equals the degree a single new point generates the field.  Without full
    height only the lower bound and ``1 <= m <= h`` are reported.
    """
    if n < 1:
        raise ValueError("n must be positive")
    t = torsion_valuations(m, n)
    q = t.q
    h = height(m)
    if full_height is None:
        full_height = certify_full_height(m)
    e = lcm(*(v.denominator for v in t.valuations()))
    if not full_height:
        return DivisionFieldReport(n, q, None, e, None, None, 1, None, h, False, t)
    degree = q ** (n - 1) * (q - 1)
    if degree % e:
        raise AssertionError(f"ramification index {e} does not divide degree {degree}")
    single = any(v.denominator == degree for v in t.valuations())
    return DivisionFieldReport(n, q, degree, e, degree == e, single, 1, 1 if single else None, h, True, t)


@dataclass
class MSequence:
    entries: list[tuple[int, int, int | None, int | None]]
    monotone: bool
    last_certified_level: int
    truncated: bool = False
    message: str = ""

    def to_json(self) -> dict:
        return {"levels": [{"n": n, "m_lower": lo, "m_value": v, "m_upper": hi} for n, lo, v, hi in self.entries],
                "monotone": self.monotone, "last_certified_level": self.last_certified_level,
                "truncated": self.truncated}


def m_sequence(m: FormalModule, n_max: int, full_height: bool | None = None) -> MSequence:
    """``(n, m_lower, m_value, m_upper)`` for n = 1..n_max; values are never guessed."""
    entries = []
    truncated, message = False, ""
    for n in range(1, n_max + 1):
        try:
            r = division_field_report(m, n, full_height)
        except (CapError, PrecisionError) as exc:
            truncated, message = True, str(exc)
            break
        full_height = r.full_height
        entries.append((n, r.m_lower, r.m_value, r.m_upper))
    values = [v for _, _, v, _ in entries if v is not None]
    monotone = all(a <= b for a, b in zip(values, values[1:]))
    last = entries[-1][0] if entries else 0
    return MSequence(entries, monotone, last, truncated, message)
