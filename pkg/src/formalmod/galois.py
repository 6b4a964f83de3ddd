"""Finite matrix groups at level n and their derived series.

In the full-height case the Galois group of the level-n division field is
the unit group of ``O/p^n`` with ``O`` unramified of degree h over ``Z_p``.
It is realised here as multiplication-by-unit matrices in the basis
``1, g, ..., g^(h-1)`` (matrices act on column coordinates).
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .padic import UnramifiedRing

Matrix = tuple  # tuple of row tuples

GROUP_SIZE_LIMIT = 2**16


class GroupTooLarge(ValueError):
    pass


def identity(h: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(h)) for i in range(h))


def mat_mul(a: Matrix, b: Matrix, mod: int) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) % mod for col in cols) for row in a)


def mat_inv(a: Matrix, p: int, mod: int) -> Matrix:
    """Gauss-Jordan inverse mod ``p^n``; pivots are chosen among units."""
    h = len(a)
    m = [list(row) + list(e) for row, e in zip(a, identity(h))]
    for col in range(h):
        piv = next((r for r in range(col, h) if m[r][col] % p), None)
        if piv is None:
            raise ValueError("matrix is not invertible mod p")
        m[col], m[piv] = m[piv], m[col]
        inv = pow(m[col][col], -1, mod)
        m[col] = [x * inv % mod for x in m[col]]
        for r in range(h):
            if r != col and m[r][col]:
                t = m[r][col]
                m[r] = [(x - t * y) % mod for x, y in zip(m[r], m[col])]
    return tuple(tuple(row[h:]) for row in m)


def commutator(a: Matrix, b: Matrix, p: int, mod: int) -> Matrix:
    return mat_mul(mat_mul(a, b, mod), mat_mul(mat_inv(a, p, mod), mat_inv(b, p, mod), mod), mod)


@dataclass(frozen=True)
class FiniteMatrixGroup:
    p: int
    n: int
    h: int
    elements: frozenset
    generators: tuple

    @property
    def mod(self) -> int:
        return self.p**self.n

    @property
    def order(self) -> int:
        return len(self.elements)

    def is_abelian(self) -> bool:
        mod = self.mod
        return all(mat_mul(a, b, mod) == mat_mul(b, a, mod)
                   for a, b in itertools.combinations(self.generators, 2))

    def reduce(self, n: int) -> set:
        """Image of the elements modulo ``p^n``."""
        mod = self.p**n
        return {tuple(tuple(x % mod for x in row) for row in a) for a in self.elements}


def closure(generators, p: int, n: int, h: int, limit: int = GROUP_SIZE_LIMIT) -> FiniteMatrixGroup:
    """The subgroup generated by ``generators``, by breadth-first products."""
    mod = p**n
    gens = tuple(dict.fromkeys(generators))
    one = identity(h)
    seen = {one}
    queue = deque([one])
    while queue:
        a = queue.popleft()
        for g in gens:
            b = mat_mul(a, g, mod)
            if b not in seen:
                seen.add(b)
                if len(seen) > limit:
                    raise GroupTooLarge(f"group exceeds {limit} elements")
                queue.append(b)
    return FiniteMatrixGroup(p, n, h, frozenset(seen), gens)


def multiplication_matrix(ring: UnramifiedRing, a) -> Matrix:
    """Matrix of ``x -> a x`` in the basis of powers of the generator."""
    a = ring(a)
    cols = []
    basis = ring.one
    g = ring([0, 1]) if ring.f > 1 else ring.one
    for _ in range(ring.f):
        cols.append((a * basis).coeffs)
        basis = basis * g
    return tuple(zip(*cols))


def unit_group_image(p: int, h: int, n: int, limit: int = GROUP_SIZE_LIMIT) -> FiniteMatrixGroup:
    """``(O/p^n)^x`` as h x h matrices over ``Z/p^n``; O unramified of degree h."""
    if n < 1:
        raise ValueError("level n must be positive")
    if p ** (h * n) > limit:
        raise GroupTooLarge(f"q^n = {p ** (h * n)} exceeds the enumeration guard {limit}")
    ring = UnramifiedRing(p, h, n)
    units = [u for u in ring.elements_mod(n) if u.is_unit()]
    gens = [multiplication_matrix(ring, ring.teichmuller(ring.primitive_residue()))]
    G = closure(gens, p, n, h, limit)
    # add missing units one at a time until the closure is everything
    for u in units:
        mat = multiplication_matrix(ring, u)
        if mat not in G.elements:
            gens.append(mat)
            G = closure(gens, p, n, h, limit)
    return G


def general_linear_group(p: int, h: int, n: int = 1, limit: int = GROUP_SIZE_LIMIT) -> FiniteMatrixGroup:
    """All invertible h x h matrices over ``Z/p^n`` (for contrast)."""
    mod = p**n
    if mod ** (h * h) > limit:
        raise GroupTooLarge(f"{mod ** (h * h)} matrices exceed the enumeration guard {limit}")
    elems = []
    for entries in itertools.product(range(mod), repeat=h * h):
        a = tuple(tuple(entries[i * h:(i + 1) * h]) for i in range(h))
        try:
            mat_inv(a, p, mod)
        except ValueError:
            continue
        elems.append(a)
    return FiniteMatrixGroup(p, n, h, frozenset(elems), tuple(sorted(elems)))


def derived_subgroup(G: FiniteMatrixGroup) -> FiniteMatrixGroup:
    """``[G, G]``: the normal closure of commutators of generators."""
    p, mod = G.p, G.mod
    gens = G.generators
    comms = {commutator(a, b, p, mod) for a in gens for b in gens}
    comms.discard(identity(G.h))
    H = closure(sorted(comms), G.p, G.n, G.h)
    while True:
        extra = set()
        for s in gens:
            s_inv = mat_inv(s, p, mod)
            for c in H.generators:
                conj = mat_mul(mat_mul(s, c, mod), s_inv, mod)
                if conj not in H.elements:
                    extra.add(conj)
        if not extra:
            return H
        H = closure(list(H.generators) + sorted(extra), G.p, G.n, G.h)


@dataclass
class GaloisLevelReport:
    order: int
    abelian: bool
    derived_lengths: list[int]
    solvable_at_level: bool
    ab_quotient_order: int

    def to_json(self, p=None, h=None, n=None) -> dict:
        return {"p": p, "h": h, "n": n, "order": self.order, "abelian": self.abelian,
                "derived_lengths": self.derived_lengths, "solvable": self.solvable_at_level}


def derived_series(G: FiniteMatrixGroup) -> GaloisLevelReport:
    lengths = [G.order]
    cur = G
    while True:
        nxt = derived_subgroup(cur)
        if nxt.order == cur.order:
            break
        lengths.append(nxt.order)
        cur = nxt
        if nxt.order == 1:
            break
    ab = G.order // lengths[1] if len(lengths) > 1 else 1
    return GaloisLevelReport(G.order, G.is_abelian(), lengths, lengths[-1] == 1, ab)


def almost_semisimple_check(G) -> bool:
    """True iff ``G = [G, G]``, i.e. the abelianisation is trivial."""
    report = G if isinstance(G, GaloisLevelReport) else derived_series(G)
    return report.ab_quotient_order == 1


def level_compatible(p: int, h: int, n: int) -> bool:
    """Reduction mod ``p^(n-1)`` maps level n onto level n-1."""
    if n < 2:
        return True
    return unit_group_image(p, h, n).reduce(n - 1) == set(unit_group_image(p, h, n - 1).elements)
