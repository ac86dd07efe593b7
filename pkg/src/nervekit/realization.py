"""epsilon-geometric realizations of simplicial complexes.

Vertex ``j`` is the ``j``-th standard vector of norm ``eps`` in ``R^N``, so a
point is a sparse weight vector ``theta`` and the ambient distance is
``eps * ||theta_a - theta_b||_2``.
"""

from __future__ import annotations

import itertools
import math
import weakref
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import ApexInput, Disconnected, ScaleMismatch
from .nerve import NerveComplex, Simplex

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class RealizationPoint:
    """``sum_j theta(v_j) v_j`` with zero weights dropped."""

    weights: tuple[tuple[int, float], ...]
    scale: float

    @classmethod
    def from_weights(cls, weights: Mapping[int, float], scale: float, check: bool = True) -> "RealizationPoint":
        items = tuple(sorted((int(j), float(w)) for j, w in weights.items() if w != 0.0))
        if check:
            if not items:
                raise ValueError("a realization point needs a nonempty support")
            total = math.fsum(w for _, w in items)
            if abs(total - 1.0) > WEIGHT_TOL:
                raise ValueError(f"weights sum to {total!r}, not 1")
            if any(w < 0.0 or w > 1.0 + WEIGHT_TOL for _, w in items):
                raise ValueError("weights must lie in [0, 1]")
        return cls(items, float(scale))

    @classmethod
    def vertex(cls, j: int, scale: float) -> "RealizationPoint":
        return cls(((int(j), 1.0),), float(scale))

    @classmethod
    def barycenter(cls, simplex: Sequence[int], scale: float) -> "RealizationPoint":
        s = sorted(int(v) for v in simplex)
        return cls(tuple((v, 1.0 / len(s)) for v in s), float(scale))

    @property
    def support(self) -> Simplex:
        return tuple(j for j, _ in self.weights)

    def as_dict(self) -> dict[int, float]:
        return dict(self.weights)

    def coords(self, simplex: Sequence[int]) -> np.ndarray:
        """Barycentric coordinates over the vertices of ``simplex``."""
        d = self.as_dict()
        extra = set(d) - set(simplex)
        if extra:
            raise ValueError(f"support {self.support} is not inside {tuple(simplex)}")
        return np.array([d.get(v, 0.0) for v in simplex])

    @classmethod
    def from_coords(cls, simplex: Sequence[int], lam: np.ndarray, scale: float) -> "RealizationPoint":
        return cls(tuple((int(v), float(w)) for v, w in zip(simplex, lam) if w != 0.0), float(scale))

    def to_json(self) -> dict:
        return {"weights": {str(j): w for j, w in self.weights}, "scale": self.scale}

    @classmethod
    def from_json(cls, obj: dict) -> "RealizationPoint":
        return cls.from_weights({int(k): v for k, v in obj["weights"].items()}, obj["scale"])


def _check_scale(a: RealizationPoint, b: RealizationPoint) -> None:
    if a.scale != b.scale:
        raise ScaleMismatch(f"scales {a.scale!r} and {b.scale!r} differ", witness=(a.scale, b.scale))


def ambient_distance(a: RealizationPoint, b: RealizationPoint) -> float:
    _check_scale(a, b)
    da, db = a.as_dict(), b.as_dict()
    sq = math.fsum((da.get(j, 0.0) - db.get(j, 0.0)) ** 2 for j in set(da) | set(db))
    return a.scale * math.sqrt(sq)


def dense_weights(points: Sequence[RealizationPoint]) -> tuple[np.ndarray, list[int]]:
    verts = sorted({j for p in points for j, _ in p.weights})
    col = {v: i for i, v in enumerate(verts)}
    W = np.zeros((len(points), len(verts)))
    for r, p in enumerate(points):
        for j, w in p.weights:
            W[r, col[j]] = w
    return W, verts


def pairwise_euclidean(W: np.ndarray) -> np.ndarray:
    sq = (W * W).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2 * W @ W.T
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def realization_metric(eps: float):
    """Pairwise ambient distances for a list of realization points."""

    def pairwise(points: Sequence[RealizationPoint]) -> np.ndarray:
        W, _ = dense_weights(points)
        return eps * pairwise_euclidean(W)

    return pairwise


def lerp_points(a: RealizationPoint, b: RealizationPoint, lam: float) -> RealizationPoint:
    """``(1 - lam) a + lam b``, exact at ``lam`` in {0, 1}."""
    if lam == 0.0:
        return a
    if lam == 1.0 or a == b:
        return b
    da, db = a.as_dict(), b.as_dict()
    w = {j: (1 - lam) * da.get(j, 0.0) + lam * db.get(j, 0.0) for j in set(da) | set(db)}
    return RealizationPoint.from_weights(w, a.scale, check=False)


# -- barycentric decomposition and radial projection -------------------------


def barycentric_decomposition(theta: RealizationPoint) -> tuple[float, RealizationPoint | None]:
    """Write ``theta = t x_* + (1 - t) y`` with ``x_*`` the barycenter of its carrier.

    Returns ``(t, y)`` with ``y`` on the boundary of the carrier simplex, or
    ``(1.0, None)`` at the barycenter itself. Vertices return ``(0, theta)``.
    """
    simplex = theta.support
    k1 = len(simplex)
    lam = theta.coords(simplex)
    if k1 == 1:
        return 0.0, theta
    t = k1 * float(lam.min())
    if t >= 1.0 - 1e-15:
        return 1.0, None
    y = (lam - t / k1) / (1 - t)
    # every coordinate attaining the minimum vanishes; rounding can leave residues
    y[lam <= lam.min() * (1 + 1e-12)] = 0.0
    y[y < 1e-15] = 0.0
    if y.sum() == 0.0:
        return 1.0, None
    y /= y.sum()
    return t, RealizationPoint.from_coords(simplex, y, theta.scale)


def recompose(t: float, y: RealizationPoint | None, simplex: Sequence[int], scale: float) -> RealizationPoint:
    """Inverse of :func:`barycentric_decomposition` on ``simplex``."""
    simplex = sorted(simplex)
    bary = np.full(len(simplex), 1.0 / len(simplex))
    lam = bary if y is None else t * bary + (1 - t) * y.coords(simplex)
    return RealizationPoint.from_coords(simplex, lam, scale)


def radial_projection_coords(lam: np.ndarray, t: float, eps: float) -> tuple[np.ndarray, float]:
    """Radial projection in barycentric coordinates of one simplex.

    Projects ``(lam, t)`` from ``(barycenter, 2 eps)`` onto
    ``sigma x 0  union  boundary(sigma) x [0, eps]``.
    """
    k1 = len(lam)
    if k1 < 2:
        raise ValueError("radial projection needs a simplex of dimension >= 1")
    if not 0.0 <= t <= 2 * eps:
        raise ValueError(f"height {t!r} outside [0, 2 eps]")
    star = 1.0 / k1
    if t >= 2 * eps and np.all(np.abs(lam - star) < 1e-15):
        raise ApexInput("the ray from the projection apex through itself is undefined", witness=(tuple(lam), t))
    if t == 0.0 or np.any(lam == 0.0):
        return lam.copy(), float(t)
    lam_base = 2 * eps / (2 * eps - t) if t < 2 * eps else math.inf
    below = lam < star
    if below.any():
        ratios = np.full(k1, math.inf)
        ratios[below] = star / (star - lam[below])
        lam_bd = float(ratios.min())
    else:
        lam_bd = math.inf
    hit = min(lam_base, lam_bd)
    if hit <= 1.0:
        # numerically on the target already: snap to the face the ray would hit
        psi = lam.copy()
        if lam_base <= lam_bd:
            return psi, 0.0
        psi[psi < 1e-12] = 0.0
        return psi / psi.sum(), float(t)
    psi = star + hit * (lam - star)
    if lam_bd <= lam_base:
        psi[ratios <= lam_bd * (1 + 1e-14)] = 0.0
    psi[psi < 1e-15] = 0.0
    psi /= psi.sum()
    if lam_base <= lam_bd:
        u = 0.0
    else:
        u = min(max(2 * eps + hit * (t - 2 * eps), 0.0), t)
    return psi, float(u)


def radial_projection(
    simplex: Sequence[int], theta: RealizationPoint, t: float, eps: float
) -> tuple[RealizationPoint, float]:
    """``rho(theta, t) = (psi, u)`` for the simplex ``sigma``.

    ``rho`` is the identity on ``sigma x 0`` and on ``boundary(sigma) x [0, eps]``.
    """
    simplex = tuple(sorted(simplex))
    psi, u = radial_projection_coords(theta.coords(simplex), t, eps)
    if u == t and np.array_equal(psi, theta.coords(simplex)):
        return theta, t
    return RealizationPoint.from_coords(simplex, psi, theta.scale), u


def barycentric_grid(n_vertices: int, order: int) -> np.ndarray:
    """All barycentric points with denominators ``order`` (rows sum to 1)."""
    rows = []
    for combo in itertools.combinations_with_replacement(range(n_vertices), order):
        counts = np.bincount(combo, minlength=n_vertices)
        rows.append(counts / order)
    return np.array(rows)


def sorted_partitions(n_parts: int, order: int) -> np.ndarray:
    """Partitions of ``order`` into at most ``n_parts`` parts, as sorted barycentric rows.

    These represent the barycentric grid up to permutation of vertices.
    """
    out = []

    def rec(remaining: int, max_part: int, prefix: list[int]):
        if remaining == 0:
            out.append(prefix + [0] * (n_parts - len(prefix)))
            return
        if len(prefix) == n_parts:
            return
        for p in range(min(remaining, max_part), 0, -1):
            rec(remaining - p, p, prefix + [p])

    rec(order, order, [])
    return np.array(out, dtype=float) / order


def radial_projection_lipschitz(dim: int, eps: float, order: int = 4, heights: int = 9) -> float:
    """Measured Lipschitz constant of ``rho`` on a grid of ``sigma x [0, eps]`` (L1 product)."""
    lam = barycentric_grid(dim + 1, order)
    ts = np.linspace(0.0, eps, heights)
    pts = [(row, t) for row in lam for t in ts]
    img = [radial_projection_coords(row, float(t), eps) for row, t in pts]
    P = np.array([np.append(eps * row, t) for row, t in pts])
    Q = np.array([np.append(eps * row, u) for row, u in img])

    def l1(M):
        base = pairwise_euclidean(M[:, :-1])
        return base + np.abs(M[:, -1][:, None] - M[:, -1][None, :])

    dp, dq = l1(P), l1(Q)
    mask = dp > 1e-15
    return float((dq[mask] / dp[mask]).max())


# -- length metric via subdivision graphs ------------------------------------


class RealizationGraph:
    """Complete graphs on the order-``k`` barycentric grid of every facet.

    Shortest paths give an upper bound on the length metric of ``|K|``.
    """

    def __init__(self, K: NerveComplex, subdivision: int = 3, eps: float = 1.0, max_nodes: int = 200_000):
        self.K = K
        self.subdivision = subdivision
        self.eps = eps
        index: dict[tuple, int] = {}
        coords: list[dict[int, float]] = []
        facet_nodes: list[list[int]] = []
        for f in K.facets:
            grid = barycentric_grid(len(f), subdivision)
            ids = []
            for row in grid:
                key = tuple((v, int(round(w * subdivision))) for v, w in zip(f, row) if w > 0)
                if key not in index:
                    index[key] = len(coords)
                    coords.append({v: c / subdivision for v, c in key})
                ids.append(index[key])
                if len(coords) > max_nodes:
                    raise ValueError(f"subdivision graph exceeds {max_nodes} nodes")
            facet_nodes.append(ids)
        self.node_weights = coords
        self.facet_nodes = facet_nodes

    def _edges(self, extra: list[RealizationPoint]):
        pts = [RealizationPoint(tuple(sorted(c.items())), self.eps) for c in self.node_weights] + extra
        n = len(pts)
        rows, cols, vals = [], [], []

        def connect(ids: list[int]):
            sub = [pts[i] for i in ids]
            W, _ = dense_weights(sub)
            D = self.eps * pairwise_euclidean(W)
            ii, jj = np.triu_indices(len(ids), 1)
            idx = np.asarray(ids)
            rows.extend(idx[ii].tolist())
            cols.extend(idx[jj].tolist())
            vals.extend(np.maximum(D[ii, jj], 1e-300).tolist())

        for f, ids in zip(self.K.facets, self.facet_nodes):
            fs = set(f)
            members = list(ids)
            for e, p in enumerate(extra):
                if set(p.support) <= fs:
                    members.append(len(self.node_weights) + e)
            connect(members)
        return coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()

    def distance(self, a: RealizationPoint, b: RealizationPoint) -> float:
        if a == b:
            return 0.0
        for p in (a, b):
            if p.support not in self.K:
                raise ValueError(f"support {p.support} is not a simplex of the complex")
        G = self._edges([a, b])
        n0 = len(self.node_weights)
        d = dijkstra(G, directed=False, indices=n0)[n0 + 1]
        if not np.isfinite(d):
            raise Disconnected("points lie in different components", witness=(a.support, b.support))
        return float(d)


_GRAPHS: "weakref.WeakKeyDictionary[NerveComplex, dict]" = weakref.WeakKeyDictionary()


def realization_graph(K: NerveComplex, subdivision: int, eps: float) -> RealizationGraph:
    per = _GRAPHS.setdefault(K, {})
    key = (subdivision, eps)
    if key not in per:
        per[key] = RealizationGraph(K, subdivision, eps)
    return per[key]


def length_distance(K: NerveComplex, a: RealizationPoint, b: RealizationPoint, subdivision: int = 3) -> float:
    """Upper bound on the length metric of ``|K|_eps`` between ``a`` and ``b``."""
    _check_scale(a, b)
    return realization_graph(K, subdivision, a.scale).distance(a, b)
