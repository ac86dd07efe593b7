"""Lipschitz extension over polyhedra, homotopies between close maps, and the transfer map.

Extensions are built skeleton by skeleton. On a simplex ``sigma`` outside
the prescribed part, a point ``x = t x_* + (1 - t) y`` with ``y`` on the
boundary is sent to ``phi(f(y), eps t)``, where ``phi`` contracts a
sample ball ``U_sigma`` that contains the image of the boundary. Each
``U_sigma`` is the smallest sample-centered ball enclosing a set known to
contain ``f(boundary sigma)``: vertex values, caller-supplied hulls for the
prescribed subcomplex, and the balls already chosen for lower faces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import NoContainingBall, NotConvex, TooFar
from ..maps import DiscreteHomotopy, DiscreteMap, sample_metric, tabulate, time_grid
from ..metric_core import Covering
from ..model_spaces import BallContraction, ModelSpace
from ..nerve import NerveComplex, Simplex, simplex_key
from ..realization import RealizationPoint, barycentric_decomposition, realization_metric

PointMap = Callable[[RealizationPoint], int]
Hull = Callable[[Simplex], np.ndarray]


class PolyhedralExtension:
    """Extension ``f~`` of a map given on vertices and on a subcomplex ``L``."""

    def __init__(
        self,
        model: ModelSpace,
        eps: float,
        vertex_value: Callable[[int], int],
        in_L: Callable[[Simplex], bool] | None = None,
        on_L: PointMap | None = None,
        hull_L: Hull | None = None,
    ):
        if (in_L is None) != (on_L is None) or (in_L is None) != (hull_L is None):
            raise ValueError("in_L, on_L and hull_L must be given together")
        self.model = model
        self.eps = float(eps)
        self.vertex_value = vertex_value
        self.in_L = in_L or (lambda s: False)
        self.on_L = on_L
        self.hull_L = hull_L
        self._balls: dict[Simplex, BallContraction] = {}

    def hull(self, sigma: Simplex) -> np.ndarray:
        """Samples known to contain ``f~(sigma)``."""
        if len(sigma) == 1:
            return np.array([self.vertex_value(sigma[0])])
        if self.in_L(sigma):
            return np.asarray(self.hull_L(sigma), dtype=int)
        return self.contraction(sigma).members

    def contraction(self, sigma: Sequence[int]) -> BallContraction:
        key = simplex_key(sigma)
        phi = self._balls.get(key)
        if phi is not None:
            return phi
        faces = [key[:i] + key[i + 1:] for i in range(len(key))]
        need = np.unique(np.concatenate([self.hull(f) for f in faces]))
        try:
            c, members, _ = self.model.enclosing_ball(need)
        except NotConvex as exc:
            raise NoContainingBall(
                f"image of the boundary of {key} fits in no contractible ball (radius {exc.witness:.6g})",
                witness=key,
            ) from exc
        phi = BallContraction(self.model, members, c, self.eps)
        self._balls[key] = phi
        return phi

    def __call__(self, theta: RealizationPoint) -> int:
        sigma = theta.support
        if len(sigma) == 1:
            return int(self.vertex_value(sigma[0]))
        if self.in_L(sigma):
            return int(self.on_L(theta))
        t, y = barycentric_decomposition(theta)
        phi = self.contraction(sigma)
        if y is None:
            return phi.center
        return phi(self(y), self.eps * t)

    def max_ball_radius(self) -> float:
        return max((phi.radius for phi in self._balls.values()), default=0.0)


def lipschitz_extension(
    K: NerveComplex,
    vertex_values: Sequence[int] | Callable[[int], int],
    model: ModelSpace,
    eps: float,
    L: NerveComplex | None = None,
    on_L: PointMap | None = None,
    hull_L: Hull | None = None,
) -> PolyhedralExtension:
    """Extend ``v_j -> vertex_values[j]`` (and ``on_L`` on ``|L|``) over ``|K|``."""
    vv = vertex_values if callable(vertex_values) else (lambda j, _v=list(vertex_values): int(_v[j]))
    if len(K.facets) and max(max(f) for f in K.facets) >= K.n_vertices:
        raise ValueError("complex uses undeclared vertices")
    if L is None:
        return PolyhedralExtension(model, eps, vv)
    if not L.is_subcomplex_of(K):
        raise ValueError("L must be a subcomplex of K")
    return PolyhedralExtension(model, eps, vv, lambda s: s in L, on_L, hull_L)


def extension_map(ext: PolyhedralExtension, points: Sequence[RealizationPoint]) -> DiscreteMap:
    return DiscreteMap(
        "extension",
        list(points),
        [ext(p) for p in points],
        realization_metric(ext.eps),
        ext.model.metric(),
    )


# -- prism triangulation -------------------------------------------------------


def prism_point(theta: RealizationPoint, tau: float, offset: int) -> RealizationPoint:
    """``(theta, tau)`` in the staircase triangulation of ``|K| x [0, 1]``.

    Bottom copies keep their vertex index ``j``; top copies become
    ``offset + j``. With tail sums ``c_i = sum_{j >= i} lam_j`` the point
    lies in the simplex ``{a_0..a_i, b_i..b_k}`` where ``c_{i+1} <= tau <= c_i``.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"prism height {tau!r} outside [0, 1]")
    verts = theta.support
    lam = theta.coords(verts)
    k = len(verts) - 1
    c = np.append(np.cumsum(lam[::-1])[::-1], 0.0)
    c[0] = 1.0
    i = k
    while i > 0 and tau > c[i]:
        i -= 1
    w: dict[int, float] = {}
    for j, v in enumerate(verts):
        if j < i:
            w[v] = float(lam[j])
        elif j > i:
            w[offset + v] = float(lam[j])
    top = tau - c[i + 1]
    w[offset + verts[i]] = float(top)
    w[verts[i]] = w.get(verts[i], 0.0) + float(lam[i] - top)
    return RealizationPoint.from_weights({j: x for j, x in w.items() if x > 0.0}, theta.scale, check=False)


def _split(sigma: Simplex, offset: int) -> tuple[Simplex, Simplex]:
    return tuple(v for v in sigma if v < offset), tuple(v - offset for v in sigma if v >= offset)


def _unshift(theta: RealizationPoint, offset: int) -> RealizationPoint:
    return RealizationPoint(tuple((j - offset, w) for j, w in theta.weights), theta.scale)


@dataclass
class ClosenessHomotopy:
    homotopy: DiscreteHomotopy
    uniform_distance: float
    extension: PolyhedralExtension


def homotopy_from_closeness(
    f0: PointMap,
    f1: PointMap,
    model: ModelSpace,
    eps: float,
    points: Sequence[RealizationPoint],
    n_vertices: int,
    hull0: Hull,
    hull1: Hull,
    within: float | None = None,
    steps: int = 16,
) -> ClosenessHomotopy:
    """Homotopy from ``f0`` to ``f1`` over ``[0, eps]`` through the prism triangulation.

    ``hull0(sigma)`` and ``hull1(sigma)`` must contain the images of the
    simplex ``sigma`` under ``f0`` and ``f1``. Raises :class:`TooFar` when
    the two maps are more than ``within`` (default ``eps``) apart on ``points``.
    """
    limit = eps if within is None else within
    d = model.dist
    v0 = [f0(p) for p in points]
    v1 = [f1(p) for p in points]
    gaps = np.array([d[a, b] for a, b in zip(v0, v1)])
    worst = int(np.argmax(gaps)) if len(gaps) else 0
    uniform = float(gaps.max()) if len(gaps) else 0.0
    if uniform > limit:
        raise TooFar(
            f"maps are {uniform:.6g} apart at point {worst}, more than {limit:.6g}",
            witness=worst,
        )
    N = int(n_vertices)

    def vertex_value(v: int) -> int:
        if v < N:
            return f0(RealizationPoint.vertex(v, eps))
        return f1(RealizationPoint.vertex(v - N, eps))

    def in_L(sigma: Simplex) -> bool:
        return sigma[-1] < N or sigma[0] >= N

    def on_L(theta: RealizationPoint) -> int:
        if theta.support[0] >= N:
            return f1(_unshift(theta, N))
        return f0(theta)

    def hull_L(sigma: Simplex) -> np.ndarray:
        if sigma[0] >= N:
            return hull1(tuple(v - N for v in sigma))
        return hull0(sigma)

    ext = PolyhedralExtension(model, eps, vertex_value, in_L, on_L, hull_L)
    cache0 = {p: a for p, a in zip(points, v0)}
    cache1 = {p: b for p, b in zip(points, v1)}

    def value(p: RealizationPoint, s: float) -> int:
        if s == 0.0:
            return cache0[p]
        if s == eps:
            return cache1[p]
        return ext(prism_point(p, s / eps, N))

    h = tabulate("closeness", list(points), time_grid(eps, steps), value, realization_metric(eps), model.metric())
    return ClosenessHomotopy(h, uniform, ext)


# -- transfer ------------------------------------------------------------------


@dataclass
class TransferResult:
    """``F = f~ o Theta`` together with its displacement from the reference map."""

    map: DiscreteMap
    extension: PolyhedralExtension
    vertex_targets: list[int]
    displacement: float
    displacement_witness: int


def transfer_map(
    cov: Covering,
    thetas: Sequence[RealizationPoint],
    reference: Sequence[int],
    model_target: ModelSpace,
) -> TransferResult:
    """Transfer ``X -> Y`` through the nerve of ``cov``.

    ``reference[x]`` is the given approximation ``X -> Y``; vertex ``v_j`` is
    sent to ``p_j' = reference[p_j]`` and the map is extended over the nerve.
    The displacement is ``max_x |F(x) reference(x)|``.
    """
    eps = cov.scale
    targets = [int(reference[c]) for c in cov.centers]
    ext = PolyhedralExtension(model_target, eps, lambda j: targets[j])
    values = [ext(th) for th in thetas]
    d = model_target.dist
    gaps = np.array([d[v, int(reference[x])] for x, v in enumerate(values)])
    w = int(np.argmax(gaps))
    F = DiscreteMap("transfer", list(range(len(values))), values, sample_metric(cov.space), model_target.metric())
    return TransferResult(F, ext, targets, float(gaps[w]), w)
