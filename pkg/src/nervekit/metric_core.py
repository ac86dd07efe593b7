"""Finite metric spaces, nets, ball coverings and doubling estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AsymmetricMatrix,
    EmptySpace,
    InvalidMetric,
    NegativeEntry,
    TriangleViolation,
)

METRIC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A labelled point set with its full distance matrix.

    Build instances through :func:`validate_metric`; the constructor itself
    does not check the metric axioms.
    """

    labels: tuple
    dist: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.dist.setflags(write=False)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self) else 0.0

    def ball(self, center: int, radius: float) -> np.ndarray:
        """Indices of the open ball ``B(center, radius)`` on the sample."""
        return np.flatnonzero(self.dist[center] < radius)

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "dist": self.dist.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteMetricSpace":
        return validate_metric(obj["dist"], labels=obj.get("labels"))


def validate_metric(matrix, labels: Sequence | None = None, tol: float = METRIC_TOL) -> FiniteMetricSpace:
    """Check the metric axioms and wrap ``matrix`` as a :class:`FiniteMetricSpace`.

    The worst triangle violation is reported as ``(i, k, j)`` meaning
    ``dist[i][k] > dist[i][j] + dist[j][k]``.
    """
    d = np.array(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InvalidMetric(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        bad = tuple(int(v) for v in np.argwhere(~np.isfinite(d))[0])
        raise InvalidMetric("distance matrix has non-finite entries", witness=bad)
    if np.any(d < 0):
        bad = tuple(int(v) for v in np.argwhere(d < 0)[0])
        raise NegativeEntry(f"negative distance at {bad}", witness=bad)
    n = d.shape[0]
    diag = np.abs(np.diag(d))
    if n and diag.max() > tol:
        i = int(diag.argmax())
        raise InvalidMetric(f"nonzero diagonal entry at {i}", witness=(i, i))
    asym = np.abs(d - d.T)
    if n and asym.max() > tol:
        i, j = np.unravel_index(int(asym.argmax()), asym.shape)
        raise AsymmetricMatrix(f"dist[{i}][{j}] != dist[{j}][{i}]", witness=(int(i), int(j)))

    worst, witness = 0.0, None
    for j in range(n):
        excess = d - (d[:, j, None] + d[None, j, :])
        flat = int(excess.argmax())
        if excess.flat[flat] > worst:
            i, k = np.unravel_index(flat, excess.shape)
            worst, witness = float(excess.flat[flat]), (int(i), int(k), j)
    if worst > tol:
        i, k, j = witness
        raise TriangleViolation(
            f"triangle inequality fails: dist[{i}][{k}]={d[i, k]!r} > "
            f"dist[{i}][{j}] + dist[{j}][{k}] = {d[i, j] + d[j, k]!r}",
            witness=witness,
        )

    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    if labels is None:
        labels = range(n)
    labels = tuple(labels)
    if len(labels) != n:
        raise InvalidMetric(f"{len(labels)} labels for {n} points")
    return FiniteMetricSpace(labels, d)


def maximal_discrete_set(X: FiniteMetricSpace, delta: float, seed: int | None = None) -> list[int]:
    """Greedy maximal ``delta``-discrete subset of ``X``.

    Points are visited in index order when ``seed`` is None, otherwise in a
    permutation drawn from ``numpy.random.default_rng(seed)``. Returned
    points are pairwise at distance ``>= delta`` and every point of ``X``
    lies at distance ``< delta`` from one of them.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = len(X)
    order = np.arange(n) if seed is None else np.random.default_rng(seed).permutation(n)
    covered = np.zeros(n, dtype=bool)
    picked = []
    for i in order:
        if covered[i]:
            continue
        picked.append(int(i))
        covered |= X.dist[i] < delta
    return picked


@dataclass(frozen=True, eq=False)
class Covering:
    """Open-ball covering ``{B(p_j, radius)}`` of a finite sample.

    ``members`` is the boolean incidence matrix (point x element).
    """

    space: FiniteMetricSpace = field(repr=False)
    centers: tuple[int, ...]
    radius: float
    scale: float
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.members.setflags(write=False)

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def elements(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.members[:, j]) for j in range(len(self))]

    def element(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.members[:, j])

    def containing(self, x: int) -> tuple[int, ...]:
        """Indices ``j`` with ``x`` in ``U_j``."""
        return tuple(int(j) for j in np.flatnonzero(self.members[x]))

    def intersection(self, simplex: Sequence[int]) -> np.ndarray:
        """Sample points of ``U_sigma``, the intersection of the listed elements."""
        return np.flatnonzero(self.members[:, list(simplex)].all(axis=1))

    def covers(self) -> bool:
        return bool(self.members.any(axis=1).all())

    def to_json(self) -> dict:
        return {
            "centers": list(self.centers),
            "radius": self.radius,
            "scale": self.scale,
            "elements": [e.tolist() for e in self.elements],
        }

    @classmethod
    def from_json(cls, space: FiniteMetricSpace, obj: dict) -> "Covering":
        cov = ball_covering(space, obj["centers"], obj["radius"], obj["scale"])
        if "elements" in obj:
            stored = [sorted(e) for e in obj["elements"]]
            if stored != [e.tolist() for e in cov.elements]:
                raise ValueError("stored elements do not match the balls B(p_j, radius)")
        return cov


def ball_covering(X: FiniteMetricSpace, centers: Sequence[int], radius: float, scale: float) -> Covering:
    centers = tuple(int(c) for c in centers)
    members = X.dist[:, list(centers)] < radius
    return Covering(X, centers, float(radius), float(scale), members)


def build_ball_covering(X: FiniteMetricSpace, eps: float, seed: int | None = None) -> Covering:
    """Covering by ``2*eps``-balls around a maximal ``eps/2``-discrete set.

    Every ``eps``-ball of the sample then lies in some element: a point
    within ``eps/2`` of a center ``p`` has ``B(x, eps)`` inside ``B(p, 2 eps)``.
    """
    if len(X) == 0:
        raise EmptySpace("cannot cover an empty space")
    if eps <= 0:
        raise ValueError("eps must be positive")
    centers = maximal_discrete_set(X, eps / 2, seed)
    return ball_covering(X, centers, 2 * eps, eps)


def max_overlap(cov: Covering) -> int:
    """``L = max_j #{i : U_i meets U_j}`` (``U_j`` itself included)."""
    m = cov.members.astype(np.int64)
    meets = (m.T @ m) > 0
    return int(meets.sum(axis=1).max())


def ball_containment_witness(cov: Covering, radius: float | None = None) -> int | None:
    """First sample ``x`` whose ``radius``-ball (default: the scale) fits in no element.

    Returns None when every ball fits, i.e. when condition (1) of a good
    covering holds on the sample.
    """
    r = cov.scale if radius is None else radius
    X = cov.space
    for x in range(len(X)):
        ball = X.dist[x] < r
        # element j contains the ball iff no ball point is outside U_j
        outside = (ball[:, None] & ~cov.members).any(axis=0)
        if outside.all():
            return x
    return None


def dist_to_complement(X: FiniteMetricSpace, U: Sequence[int], x: int) -> float:
    """Distance from ``x`` to the nearest sample outside ``U``.

    Returns 0 for ``x`` outside ``U`` and ``math.inf`` when ``U`` is the
    whole space.
    """
    inside = np.zeros(len(X), dtype=bool)
    inside[np.asarray(U, dtype=int)] = True
    if not inside[x]:
        return 0.0
    if inside.all():
        return math.inf
    return float(X.dist[x, ~inside].min())


def complement_distances(cov: Covering) -> np.ndarray:
    """Matrix ``f[x, j]`` of distances to the complement of each element."""
    X = cov.space
    n, N = cov.members.shape
    f = np.zeros((n, N))
    for j in range(N):
        inside = cov.members[:, j]
        if inside.all():
            f[:, j] = math.inf
            continue
        f[inside, j] = X.dist[np.ix_(inside, ~inside)].min(axis=1)
    return f


def doubling_constant(X: FiniteMetricSpace, radii: Sequence[float]) -> list[int]:
    """Greedy upper bound on the doubling constant at each radius.

    For each ``r`` this is the max over centers ``c`` of the number of open
    ``r/2``-balls needed to cover the closed ball of radius ``r`` around
    ``c``, where balls are chosen greedily (largest number of newly covered
    points first, lowest index on ties) among all sample-centered balls.
    """
    out = []
    for r in radii:
        if r <= 0:
            raise ValueError("radii must be positive")
        near = (X.dist < r / 2).astype(np.float64)
        worst = 0
        for c in range(len(X)):
            uncovered = X.dist[c] <= r
            count = 0
            while uncovered.any():
                gain = near @ uncovered
                y = int(np.argmax(gain))
                uncovered &= near[y] == 0
                count += 1
            worst = max(worst, count)
        out.append(worst)
    return out
