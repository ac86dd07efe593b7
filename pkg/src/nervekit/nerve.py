"""Nerve complexes of finite coverings.

A complex is stored by its maximal simplices (facets); every subset of a
facet is a simplex. On a finite sample the nerve of a covering is the
downward closure of the sets ``S(x) = {j : x in U_j}``, which makes the
facet form cheap to build even when individual simplices are large.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import NerveTruncated, NoStableRadius, NonMonotoneFamily, VertexCountMismatch
from .metric_core import Covering

Simplex = tuple[int, ...]


def _maximal(sets: Iterable[frozenset]) -> list[frozenset]:
    uniq = sorted(set(sets), key=len, reverse=True)
    kept: list[frozenset] = []
    for s in uniq:
        if not any(s <= k for k in kept):
            kept.append(s)
    return kept


@dataclass(frozen=True, eq=False)
class NerveComplex:
    n_vertices: int
    facets: tuple[Simplex, ...]
    _by_vertex: dict = field(default=None, repr=False, compare=False)

    @classmethod
    def from_sets(cls, n_vertices: int, sets: Iterable[Iterable[int]]) -> "NerveComplex":
        """Downward closure of ``sets`` plus every vertex as a 0-simplex."""
        pool = [frozenset(int(v) for v in s) for s in sets]
        pool += [frozenset([v]) for v in range(n_vertices)]
        facets = sorted(tuple(sorted(s)) for s in _maximal(p for p in pool if p))
        for s in facets:
            if s[-1] >= n_vertices or s[0] < 0:
                raise ValueError(f"simplex {s} uses a vertex outside 0..{n_vertices - 1}")
        by_vertex: dict[int, list[frozenset]] = {v: [] for v in range(n_vertices)}
        for s in facets:
            fs = frozenset(s)
            for v in s:
                by_vertex[v].append(fs)
        return cls(n_vertices, tuple(facets), by_vertex)

    @property
    def dim(self) -> int:
        return max((len(f) for f in self.facets), default=0) - 1

    def __contains__(self, simplex: Iterable[int]) -> bool:
        s = frozenset(simplex)
        if not s:
            return True
        v = min(s)
        if v < 0 or v >= self.n_vertices:
            return False
        return any(s <= f for f in self._by_vertex[v])

    def facets_containing(self, simplex: Iterable[int]) -> list[Simplex]:
        s = frozenset(simplex)
        return [tuple(sorted(f)) for f in self._by_vertex[min(s)] if s <= f]

    def simplices(self, max_dim: int | None = None, limit: int = 2_000_000) -> list[Simplex]:
        """All simplices up to ``max_dim``, sorted by (dimension, vertices)."""
        top = self.dim if max_dim is None else min(max_dim, self.dim)
        out: set[Simplex] = set()
        for f in self.facets:
            for k in range(1, min(len(f), top + 1) + 1):
                out.update(itertools.combinations(f, k))
                if len(out) > limit:
                    raise NerveTruncated(f"more than {limit} simplices; pass a smaller max_dim", witness=limit)
        return sorted(out, key=lambda s: (len(s), s))

    def f_vector(self, max_dim: int | None = None) -> list[int]:
        counts: dict[int, int] = {}
        for s in self.simplices(max_dim):
            counts[len(s) - 1] = counts.get(len(s) - 1, 0) + 1
        return [counts.get(k, 0) for k in range(max(counts) + 1)] if counts else []

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.f_vector()))

    def is_subcomplex_of(self, other: "NerveComplex") -> bool:
        return self.n_vertices == other.n_vertices and all(f in other for f in self.facets)

    def one_skeleton_components(self) -> int:
        parent = list(range(self.n_vertices))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for f in self.facets:
            for v in f[1:]:
                ra, rb = find(f[0]), find(v)
                if ra != rb:
                    parent[rb] = ra
        return len({find(v) for v in range(self.n_vertices)})

    def to_json(self) -> dict:
        return {"n_vertices": self.n_vertices, "simplices": [list(f) for f in self.facets]}

    @classmethod
    def from_json(cls, obj: dict) -> "NerveComplex":
        return cls.from_sets(obj["n_vertices"], obj["simplices"])


def build_nerve(cov: Covering, max_dim: int | None = None) -> NerveComplex:
    """Nerve of ``cov`` computed on the sample.

    ``max_dim`` is a guard, not a truncation: if the nerve has a simplex of
    higher dimension :class:`NerveTruncated` is raised instead of silently
    dropping it.
    """
    rows = cov.members
    sets = {frozenset(np.flatnonzero(r).tolist()) for r in rows}
    K = NerveComplex.from_sets(len(cov), sets)
    if max_dim is not None and K.dim > max_dim:
        biggest = max(K.facets, key=len)
        raise NerveTruncated(
            f"nerve has dimension {K.dim} > max_dim {max_dim}",
            witness=list(biggest),
        )
    return K


def nerves_equal(a: NerveComplex, b: NerveComplex) -> bool:
    if a.n_vertices != b.n_vertices:
        raise VertexCountMismatch(
            f"nerves have {a.n_vertices} and {b.n_vertices} vertices",
            witness=(a.n_vertices, b.n_vertices),
        )
    return set(a.facets) == set(b.facets)


def stable_threshold(
    family: Callable[[float], NerveComplex | Covering],
    r_min: float,
    r_max: float,
    c0: float,
    steps: int = 200,
) -> float:
    """Radius ``r`` whose nerve does not change on ``[r - c0, r + c0]``.

    Candidates are the ``steps`` grid points of ``[r_min + c0, r_max - c0]``,
    tried from the middle outward. Each candidate is accepted when the
    nerves at ``r - c0`` and ``r + c0`` coincide; by monotonicity the nerve
    is then constant on the whole window.
    """
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    lo, hi = r_min + c0, r_max - c0
    if lo > hi:
        raise NoStableRadius(
            f"window 2*c0={2 * c0:.6g} exceeds the radius range [{r_min:.6g}, {r_max:.6g}]",
            witness=(r_min, r_max, c0),
        )
    cache: dict[float, NerveComplex] = {}

    def nerve_at(r: float) -> NerveComplex:
        if r not in cache:
            out = family(r)
            cache[r] = out if isinstance(out, NerveComplex) else build_nerve(out)
        return cache[r]

    grid = np.linspace(lo, hi, max(steps, 1)) if steps > 1 else np.array([(lo + hi) / 2])
    mid = (lo + hi) / 2
    order = sorted(range(len(grid)), key=lambda i: (abs(grid[i] - mid), grid[i]))
    if len(grid) % 2 == 1:
        grid[len(grid) // 2] = mid
    for i in order:
        r = float(grid[i])
        below, above = nerve_at(r - c0), nerve_at(r + c0)
        if not below.is_subcomplex_of(above):
            raise NonMonotoneFamily(f"nerve at {r - c0:.6g} is not contained in nerve at {r + c0:.6g}", witness=r)
        if nerves_equal(below, above):
            return r
    raise NoStableRadius(
        f"no radius in [{lo:.6g}, {hi:.6g}] with a stable nerve for c0={c0:.6g}",
        witness=(r_min, r_max, c0),
    )


def lift_covering_nerve(cov: Covering, other_space, radius: float | None = None) -> NerveComplex:
    """Nerve of the covering with the same center indices and radius on ``other_space``."""
    from .metric_core import ball_covering

    r = cov.radius if radius is None else radius
    return build_nerve(ball_covering(other_space, cov.centers, r, cov.scale))


def simplex_key(simplex: Sequence[int]) -> Simplex:
    return tuple(sorted(int(v) for v in simplex))
