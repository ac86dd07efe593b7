"""Cones, the spaces D and M, and the homotopies H and F.

* ``K(M)`` is the Euclidean cone of height ``eps``; all points of height
  ``eps`` are the apex, stored canonically as ``ConePoint(None, eps)``.
* ``D`` is the set of pairs ``(theta, x)`` with ``x`` in ``U_{supp theta}``.
* ``M`` is the mapping cylinder: pairs ``(theta, [x, t])`` over ``D``.

Products carry the Euclidean product metric; homotopy domains add time
with the L1 distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import NotInD
from ..maps import DiscreteHomotopy, lerp, tabulate, time_grid
from ..metric_core import Covering, FiniteMetricSpace
from ..realization import RealizationPoint, dense_weights, lerp_points, pairwise_euclidean
from .partition import PartitionOfUnity


@dataclass(frozen=True)
class ConePoint:
    base: int | None
    height: float

    @property
    def is_apex(self) -> bool:
        return self.base is None


def cone_point(x: int | None, t: float, eps: float) -> ConePoint:
    """``[x, t]`` with every height ``>= eps`` identified to the apex."""
    if x is None or t >= eps:
        return ConePoint(None, float(eps))
    if t < 0:
        raise ValueError(f"negative cone height {t!r}")
    return ConePoint(int(x), float(t))


def apex(eps: float) -> ConePoint:
    return ConePoint(None, float(eps))


def _cone_formula(a: np.ndarray, b: np.ndarray, d: np.ndarray) -> np.ndarray:
    # (a - b)^2 + 4ab sin^2(d/2) equals a^2 + b^2 - 2ab cos d without cancellation
    half = np.minimum(np.pi, d) / 2
    return np.sqrt((a - b) ** 2 + 4 * a * b * np.sin(half) ** 2)


def cone_distance(a: ConePoint, b: ConePoint, eps: float, base_distance: float | FiniteMetricSpace) -> float:
    """Cone metric ``sqrt((eps-t)^2 + (eps-t')^2 - 2(eps-t)(eps-t') cos min(pi, |xx'|))``.

    ``base_distance`` is either ``|xx'|`` or the space to read it from.
    """
    ra, rb = eps - a.height, eps - b.height
    if a.is_apex or b.is_apex:
        return abs(ra - rb)
    if isinstance(base_distance, FiniteMetricSpace):
        d = float(base_distance.dist[a.base, b.base])
    else:
        d = float(base_distance)
    return float(_cone_formula(np.float64(ra), np.float64(rb), np.float64(d)))


def _cone_arrays(points: Sequence[ConePoint], dist: np.ndarray, eps: float) -> np.ndarray:
    base = np.array([-1 if p.base is None else p.base for p in points])
    r = np.array([eps - p.height for p in points])
    safe = np.where(base < 0, 0, base)
    d = dist[np.ix_(safe, safe)]
    out = _cone_formula(r[:, None], r[None, :], d)
    apex_rows = base < 0
    if apex_rows.any():
        ab = np.abs(r[:, None] - r[None, :])
        mask = apex_rows[:, None] | apex_rows[None, :]
        out = np.where(mask, ab, out)
    np.fill_diagonal(out, 0.0)
    return out


def cone_metric(space: FiniteMetricSpace, eps: float):
    def pairwise(points: Sequence[ConePoint]) -> np.ndarray:
        return _cone_arrays(points, space.dist, eps)

    return pairwise


@dataclass(frozen=True)
class DPoint:
    """A point ``(theta, x)`` of D."""

    theta: RealizationPoint
    x: int


@dataclass(frozen=True)
class CylinderPoint:
    """A point ``(theta, [x, t])`` of the mapping cylinder M."""

    theta: RealizationPoint
    cone: ConePoint

    @property
    def in_D(self) -> bool:
        return not self.cone.is_apex and self.cone.height == 0.0

    def to_D(self) -> DPoint:
        if not self.in_D:
            raise NotInD(f"cylinder point at height {self.cone.height!r} is not in D", witness=self)
        return DPoint(self.theta, self.cone.base)


def iota(p: DPoint) -> CylinderPoint:
    return CylinderPoint(p.theta, ConePoint(p.x, 0.0))


def psi_embed(theta: RealizationPoint, eps: float) -> CylinderPoint:
    """``Psi(theta) = (theta, apex)``."""
    return CylinderPoint(theta, apex(eps))


def d_metric(space: FiniteMetricSpace, eps: float):
    def pairwise(points: Sequence[DPoint]) -> np.ndarray:
        W, _ = dense_weights([p.theta for p in points])
        a = eps * pairwise_euclidean(W)
        idx = np.array([p.x for p in points])
        b = space.dist[np.ix_(idx, idx)]
        return np.sqrt(a * a + b * b)

    return pairwise


def cylinder_metric(space: FiniteMetricSpace, eps: float):
    def pairwise(points: Sequence[CylinderPoint]) -> np.ndarray:
        W, _ = dense_weights([p.theta for p in points])
        a = eps * pairwise_euclidean(W)
        b = _cone_arrays([p.cone for p in points], space.dist, eps)
        return np.sqrt(a * a + b * b)

    return pairwise


def check_in_D(p: DPoint, cov: Covering) -> None:
    supp = list(p.theta.support)
    if not cov.members[p.x, supp].all():
        raise NotInD(f"x={p.x} is not in U_{tuple(supp)}", witness=p)


def H_value(pou: PartitionOfUnity, p: DPoint, s: float) -> DPoint:
    """``H(theta, x, s) = ((s/eps) Theta(x) + (1 - s/eps) theta, x)``."""
    eps = pou.scale
    return DPoint(lerp_points(p.theta, pou.theta(p.x), s / eps), p.x)


def homotopy_H(pou: PartitionOfUnity, points: Sequence[DPoint], steps: int = 16) -> DiscreteHomotopy:
    """Deformation retraction of D onto ``tau(M) = {(Theta(x), x)}``."""
    cov = pou.covering
    for p in points:
        check_in_D(p, cov)
    eps = pou.scale
    m = d_metric(cov.space, eps)
    return tabulate("H", points, time_grid(eps, steps), lambda p, s: H_value(pou, p, s), m, m)


def F_value(p: CylinderPoint, s: float, eps: float) -> CylinderPoint:
    """``F(theta, [x, t], s) = (theta, [x, (1 - s/eps) t + s])``."""
    c = p.cone
    if c.is_apex:
        return p
    # (1 - s/eps) t + s = lerp(t, eps, s/eps)
    h = lerp(c.height, eps, s / eps)
    return CylinderPoint(p.theta, cone_point(c.base, h, eps))


def homotopy_F(points: Sequence[CylinderPoint], space: FiniteMetricSpace, eps: float, steps: int = 16) -> DiscreteHomotopy:
    """Deformation retraction of M onto ``Psi(|N|)`` (the apex section)."""
    m = cylinder_metric(space, eps)
    return tabulate("F", points, time_grid(eps, steps), lambda p, s: F_value(p, s, eps), m, m)


def tau(pou: PartitionOfUnity, x: int) -> DPoint:
    return DPoint(pou.theta(x), int(x))


def in_tau_image(pou: PartitionOfUnity) -> Callable[[DPoint], bool]:
    def pred(p: DPoint) -> bool:
        return p.theta == pou.theta(p.x)

    return pred


def in_psi_image(p: CylinderPoint) -> bool:
    return p.cone.is_apex


def points_close(metric, a, b, tol: float = 1e-12) -> bool:
    if a == b:
        return True
    return float(metric([a, b])[0, 1]) <= tol
