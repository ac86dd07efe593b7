"""Sampled model spaces with closed-form geodesics and ball contractions.

Four kinds are supported: ``circle(R)``, ``sphere(R)``, ``flat_torus(a, b)``
and ``interval(length)``. Samples sit on a deterministic lattice; an
optional ``jitter`` moves each sample by at most that arc length, which is
how the close-but-not-isometric twins used for stability and transfer
experiments are produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadContraction, NotConvex, UnsupportedKind
from .maps import DiscreteHomotopy, Metric, sample_metric, tabulate, time_grid
from .metric_core import FiniteMetricSpace, validate_metric

KINDS = ("circle", "sphere", "flat_torus", "interval")

# contractions reach their center by time eps / ARRIVAL_DIVISOR (a divisor keeps eps/10 exact)
ARRIVAL_DIVISOR = 10
PATH_STEPS = 64


def _wrap(delta: np.ndarray, period: float) -> np.ndarray:
    """Signed shortest displacement on a circle of the given period."""
    return (delta + period / 2) % period - period / 2


@dataclass(frozen=True, eq=False)
class ModelSpace:
    kind: str
    params: dict
    coords: np.ndarray = field(repr=False)
    space: FiniteMetricSpace = field(repr=False)

    def __len__(self) -> int:
        return len(self.space)

    @property
    def dist(self) -> np.ndarray:
        return self.space.dist

    @property
    def convexity_radius(self) -> float:
        p = self.params
        if self.kind == "circle":
            return 2 * math.pi * p["R"] / 4
        if self.kind == "sphere":
            return math.pi * p["R"] / 2
        if self.kind == "flat_torus":
            return min(p["a"], p["b"]) / 4
        return math.inf

    @property
    def spacing(self) -> float:
        """Largest nearest-neighbour distance among the samples."""
        if len(self) < 2:
            return 0.0
        d = self.dist + np.diag(np.full(len(self), np.inf))
        return float(d.min(axis=1).max())

    def metric(self) -> Metric:
        return sample_metric(self.space)

    # -- closed-form geometry -------------------------------------------------

    def distances_from(self, point: np.ndarray) -> np.ndarray:
        """Intrinsic distances from an arbitrary model point to every sample."""
        return _distances(self.kind, self.params, np.asarray(point, dtype=float), self.coords)

    def geodesic_point(self, x: int, y: int, s: float) -> np.ndarray:
        """Model point at fraction ``s`` along a shortest path from sample x to y."""
        a, b = self.coords[x], self.coords[y]
        p = self.params
        if self.kind == "circle":
            C = 2 * math.pi * p["R"]
            return (a + s * _wrap(b - a, C)) % C
        if self.kind == "interval":
            return a + s * (b - a)
        if self.kind == "flat_torus":
            period = np.array([p["a"], p["b"]])
            return (a + s * _wrap(b - a, period)) % period
        # sphere: slerp between unit vectors
        cos_w = float(np.clip(a @ b, -1.0, 1.0))
        w = math.atan2(float(np.linalg.norm(np.cross(a, b))), cos_w)
        if w < 1e-15:
            return a.copy()
        v = (math.sin((1 - s) * w) * a + math.sin(s * w) * b) / math.sin(w)
        return v / np.linalg.norm(v)

    def snap(self, point: np.ndarray, candidates: Sequence[int] | None = None) -> int:
        """Nearest sample to ``point``; ties go to the lowest index."""
        d = self.distances_from(point)
        if candidates is None:
            return int(np.argmin(d))
        cand = np.sort(np.asarray(candidates, dtype=int))
        return int(cand[np.argmin(d[cand])])

    def geodesic(self, x: int, y: int, s: float) -> int:
        if s == 0.0:
            return int(x)
        if s == 1.0:
            return int(y)
        return self.snap(self.geodesic_point(x, y, s))

    def chebyshev_center(self, subset: Sequence[int], candidates: Sequence[int] | None = None) -> tuple[int, float]:
        """Candidate minimizing the max distance to ``subset`` (defaults to the subset itself)."""
        S = np.asarray(subset, dtype=int)
        cand = S if candidates is None else np.asarray(candidates, dtype=int)
        cand = np.sort(cand)
        spread = self.dist[np.ix_(cand, S)].max(axis=1)
        k = int(np.argmin(spread))
        return int(cand[k]), float(spread[k])

    def enclosing_ball(self, subset: Sequence[int]) -> tuple[int, np.ndarray, float]:
        """Smallest sample-centered open ball containing ``subset``.

        Returns ``(center, members, radius)``. Raises :class:`NotConvex`
        when the needed radius reaches the convexity radius.
        """
        c, r = self.chebyshev_center(subset, np.arange(len(self)))
        if r >= self.convexity_radius:
            raise NotConvex(
                f"enclosing ball radius {r:.6g} reaches convexity radius {self.convexity_radius:.6g}",
                witness=r,
            )
        open_r = r * (1 + 1e-9) + 1e-12
        members = np.flatnonzero(self.dist[c] < open_r)
        return c, members, r

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "coords": self.coords.tolist()}

    @classmethod
    def from_json(cls, obj: dict, space: FiniteMetricSpace | None = None) -> "ModelSpace":
        kind, params = obj["kind"], dict(obj["params"])
        coords = np.asarray(obj["coords"], dtype=float)
        if space is None:
            space = validate_metric(_distance_matrix(kind, params, coords))
        return cls(kind, params, coords, space)


def _distances(kind: str, p: dict, point: np.ndarray, coords: np.ndarray) -> np.ndarray:
    if kind == "circle":
        C = 2 * math.pi * p["R"]
        return np.abs(_wrap(coords - point, C))
    if kind == "interval":
        return np.abs(coords - point)
    if kind == "flat_torus":
        period = np.array([p["a"], p["b"]])
        return np.linalg.norm(_wrap(coords - point, period), axis=-1)
    cross = np.linalg.norm(np.cross(coords, point), axis=-1)
    return p["R"] * np.arctan2(cross, coords @ point)


def _distance_matrix(kind: str, p: dict, coords: np.ndarray) -> np.ndarray:
    n = len(coords)
    d = np.empty((n, n))
    for i in range(n):
        d[i] = _distances(kind, p, coords[i], coords)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def _fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = math.pi * (3 - math.sqrt(5)) * np.arange(n)
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _torus_shape(n: int, a: float, b: float) -> tuple[int, int]:
    rows = max(1, int(round(math.sqrt(n * b / a))))
    while n % rows:
        rows -= 1
    return rows, n // rows


DEFAULT_PARAMS = {
    "circle": {"R": 1 / (2 * math.pi)},
    "sphere": {"R": 1.0},
    "flat_torus": {"a": 1.0, "b": 1.0},
    "interval": {"length": 1.0},
}


def generate(
    kind: str,
    n_samples: int,
    seed: int = 0,
    jitter: float = 0.0,
    check: bool = True,
    **params,
) -> ModelSpace:
    """Lattice samples of a model space and their intrinsic distance matrix.

    ``seed`` only drives the jitter; with ``jitter=0`` the output does not
    depend on it. The flat torus uses a ``rows x cols`` lattice with
    ``rows * cols == n_samples`` and ``rows`` as close to square as possible.
    """
    if kind not in KINDS:
        raise UnsupportedKind(f"unsupported model kind {kind!r}; expected one of {KINDS}", witness=kind)
    if n_samples < 2:
        raise ValueError("need at least two samples")
    p = dict(DEFAULT_PARAMS[kind])
    unknown = set(params) - set(p)
    if unknown:
        raise ValueError(f"unknown parameters for {kind}: {sorted(unknown)}")
    p.update({k: float(v) for k, v in params.items()})
    rng = np.random.default_rng(seed)

    if kind == "circle":
        C = 2 * math.pi * p["R"]
        coords = np.arange(n_samples) * (C / n_samples)
        if jitter:
            coords = (coords + rng.uniform(-jitter, jitter, n_samples)) % C
    elif kind == "interval":
        coords = np.linspace(0.0, p["length"], n_samples)
        if jitter:
            coords = np.clip(coords + rng.uniform(-jitter, jitter, n_samples), 0.0, p["length"])
    elif kind == "flat_torus":
        rows, cols = _torus_shape(n_samples, p["a"], p["b"])
        u, v = np.meshgrid(np.arange(cols) * (p["a"] / cols), np.arange(rows) * (p["b"] / rows))
        coords = np.stack([u.ravel(), v.ravel()], axis=1)
        if jitter:
            ang = rng.uniform(0, 2 * math.pi, n_samples)
            rad = jitter * np.sqrt(rng.uniform(0, 1, n_samples))
            coords = coords + np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
            coords %= np.array([p["a"], p["b"]])
    else:
        coords = _fibonacci_sphere(n_samples)
        if jitter:
            # rotate each sample by an angle <= jitter / R about a random tangent axis
            tang = rng.normal(size=(n_samples, 3))
            tang -= (tang * coords).sum(axis=1, keepdims=True) * coords
            tang /= np.linalg.norm(tang, axis=1, keepdims=True)
            ang = rng.uniform(0, jitter / p["R"], n_samples)
            coords = np.cos(ang)[:, None] * coords + np.sin(ang)[:, None] * tang
            coords /= np.linalg.norm(coords, axis=1, keepdims=True)

    d = _distance_matrix(kind, p, coords)
    if check:
        space = validate_metric(d)
    else:
        space = FiniteMetricSpace(tuple(range(n_samples)), d)
    return ModelSpace(kind, p, coords, space)


class BallContraction:
    """Strong contraction of a geodesically convex sample set to its center.

    ``phi(x, t)`` follows the shortest path from ``x`` to the center at
    uniform speed ``10 * radius / eps``, so every point of ``U`` has arrived
    by ``t = eps / 10`` and ``phi(., t) == center`` afterwards. Path points
    are snapped to the nearest member of ``U`` and the distance to the
    center is kept nonincreasing along each path.
    """

    def __init__(self, model: ModelSpace, members: Sequence[int], center: int, eps: float):
        self.model = model
        self.members = np.sort(np.asarray(members, dtype=int))
        self.center = int(center)
        self.eps = float(eps)
        if self.center not in set(self.members.tolist()):
            raise BadContraction("contraction center must belong to U", witness=self.center)
        self.radius = float(model.dist[self.center, self.members].max())
        if self.radius >= model.convexity_radius:
            raise NotConvex(
                f"radius {self.radius:.6g} reaches convexity radius {model.convexity_radius:.6g}",
                witness=self.radius,
            )
        self.arrival = self.eps / ARRIVAL_DIVISOR
        self._paths: dict[int, np.ndarray] = {}
        self._member_set = frozenset(self.members.tolist())

    def __contains__(self, x: int) -> bool:
        return x in self._member_set

    def path(self, x: int) -> np.ndarray:
        p = self._paths.get(x)
        if p is None:
            p = self._build_path(x)
            self._paths[x] = p
        return p

    def _build_path(self, x: int) -> np.ndarray:
        c, d = self.center, self.model.dist
        steps = np.empty(PATH_STEPS + 1, dtype=int)
        steps[0] = x
        best = d[x, c]
        for k in range(1, PATH_STEPS):
            y = self.model.snap(self.model.geodesic_point(x, c, k / PATH_STEPS), self.members)
            if d[y, c] <= best:
                best = d[y, c]
                steps[k] = y
            else:
                steps[k] = steps[k - 1]
        steps[PATH_STEPS] = c
        return steps

    def arrival_time(self, x: int) -> float:
        if self.radius == 0.0:
            return 0.0
        return self.arrival * min(1.0, float(self.model.dist[x, self.center]) / self.radius)

    def __call__(self, x: int | None, t: float) -> int:
        """``phi(x, t)``; ``x=None`` stands for the cone apex and needs ``t >= eps/10``."""
        if x is None:
            if t >= self.arrival:
                return self.center
            raise BadContraction(f"apex evaluated at t={t!r} < eps/10", witness=t)
        if t <= 0.0:
            return int(x)
        if x == self.center or t >= self.arrival:
            return self.center
        T = self.arrival_time(x)
        if t >= T:
            return self.center
        k = int(round(t / T * PATH_STEPS))
        return int(self.path(x)[k])


def contraction_oracle(model: ModelSpace, U: Sequence[int], eps: float, center: int | None = None) -> BallContraction:
    """Contraction of ``U`` toward ``center`` (default: its Chebyshev center on ``U``)."""
    U = np.asarray(U, dtype=int)
    if len(U) == 0:
        raise ValueError("cannot contract an empty set")
    if center is None:
        center, _ = model.chebyshev_center(U)
    return BallContraction(model, U, center, eps)


def ball_contraction(
    model: ModelSpace,
    U: Sequence[int],
    eps: float,
    center: int | None = None,
    steps: int = 16,
) -> DiscreteHomotopy:
    """Tabulate the contraction of ``U`` on ``U x time_grid(eps)``."""
    phi = contraction_oracle(model, U, eps, center)
    dom = [int(x) for x in phi.members]
    return tabulate(
        f"contraction[c={phi.center}]",
        dom,
        time_grid(eps, steps),
        phi,
        model.metric(),
        model.metric(),
    )
