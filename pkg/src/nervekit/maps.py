"""Sampled maps and homotopies shared by every module.

A map is stored as its graph on a finite domain sample together with two
pairwise-distance callables, one for the domain and one for the codomain.
A metric callable takes a sequence of points and returns their square
distance matrix; this keeps Lipschitz measurement generic over sample
points, realization points, cone points and cylinder points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .metric_core import FiniteMetricSpace

Metric = Callable[[Sequence[Any]], np.ndarray]

DEFAULT_TIME_STEPS = 16


def sample_metric(space: FiniteMetricSpace) -> Metric:
    dist = space.dist

    def pairwise(points: Sequence[int]) -> np.ndarray:
        idx = np.asarray(points, dtype=int)
        return dist[np.ix_(idx, idx)]

    return pairwise


@dataclass(frozen=True, eq=False)
class DiscreteMap:
    name: str
    domain: list
    values: list
    domain_metric: Metric = field(repr=False)
    codomain_metric: Metric = field(repr=False)

    def __post_init__(self):
        if len(self.domain) != len(self.values):
            raise ValueError(f"{self.name}: {len(self.domain)} domain points but {len(self.values)} values")

    def __len__(self) -> int:
        return len(self.domain)


@dataclass(frozen=True, eq=False)
class DiscreteHomotopy:
    """``h : domain x [t_0, t_m] -> codomain`` sampled on a time grid.

    ``values[k][i]`` is ``h(domain[i], times[k])``.
    """

    name: str
    domain: list
    times: np.ndarray
    values: list
    domain_metric: Metric = field(repr=False)
    codomain_metric: Metric = field(repr=False)

    def __post_init__(self):
        if len(self.values) != len(self.times):
            raise ValueError(f"{self.name}: {len(self.times)} times but {len(self.values)} slices")
        if any(len(row) != len(self.domain) for row in self.values):
            raise ValueError(f"{self.name}: ragged value table")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError(f"{self.name}: time grid must be strictly increasing")

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])

    def start(self) -> list:
        return self.values[0]

    def end(self) -> list:
        return self.values[-1]

    def slice_map(self, k: int) -> DiscreteMap:
        return DiscreteMap(
            f"{self.name}[t={self.times[k]:.6g}]",
            self.domain,
            self.values[k],
            self.domain_metric,
            self.codomain_metric,
        )


def time_grid(span: float, steps: int = DEFAULT_TIME_STEPS) -> np.ndarray:
    """``steps + 1`` uniform times on ``[0, span]`` with exact endpoints."""
    t = np.linspace(0.0, span, steps + 1)
    t[0], t[-1] = 0.0, span
    return t


def tabulate(
    name: str,
    domain: Sequence,
    times: np.ndarray,
    fn: Callable[[Any, float], Any],
    domain_metric: Metric,
    codomain_metric: Metric,
) -> DiscreteHomotopy:
    values = [[fn(p, float(t)) for p in domain] for t in times]
    return DiscreteHomotopy(name, list(domain), np.asarray(times, dtype=float), values, domain_metric, codomain_metric)


def lerp(a: float, b: float, lam: float) -> float:
    """``(1 - lam) a + lam b`` returning the endpoints exactly at 0 and 1."""
    if lam == 0.0:
        return a
    if lam == 1.0:
        return b
    return a + lam * (b - a)
