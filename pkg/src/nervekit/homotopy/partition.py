"""Partitions of unity subordinate to a covering and the map Theta into the nerve."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import SupportNotSimplex, ThinCovering
from ..maps import DiscreteMap, sample_metric
from ..metric_core import Covering, FiniteMetricSpace, complement_distances, max_overlap
from ..nerve import NerveComplex
from ..realization import RealizationPoint, realization_metric


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """``xi[x, j] = f_j(x) / sum_i f_i(x)`` with ``f_j`` the distance to the complement of ``U_j``."""

    covering: Covering = field(repr=False)
    values: np.ndarray = field(repr=False)
    complement: np.ndarray = field(repr=False)

    @property
    def scale(self) -> float:
        return self.covering.scale

    def theta(self, x: int) -> RealizationPoint:
        row = self.values[x]
        nz = np.flatnonzero(row)
        return RealizationPoint(tuple((int(j), float(row[j])) for j in nz), self.scale)

    def lipschitz_bound(self) -> float:
        """``(1 + 2L) / eps``, from bounding the two terms of the quotient rule."""
        return (1 + 2 * max_overlap(self.covering)) / self.scale

    def theta_lipschitz_bound(self) -> float:
        """``2L (1 + 2L)``: at most ``2L`` weights change between two points."""
        L = max_overlap(self.covering)
        return 2 * L * (1 + 2 * L)


def partition_of_unity(X: FiniteMetricSpace, cov: Covering) -> PartitionOfUnity:
    if X is not cov.space:
        raise ValueError("covering was built on a different space")
    f = complement_distances(cov)
    total = f.sum(axis=1)
    thin = np.flatnonzero(total < cov.scale)
    if len(thin):
        x = int(thin[0])
        raise ThinCovering(
            f"sum of complement distances at sample {x} is {total[x]:.6g} < eps = {cov.scale:.6g}",
            witness=x,
        )
    xi = np.empty_like(f)
    for x in range(len(X)):
        row = f[x]
        if math.isinf(total[x]):
            inf = np.isinf(row)
            xi[x] = inf / inf.sum()
        else:
            xi[x] = row / total[x]
    # rows are renormalized so that they sum to one up to rounding of fsum
    xi /= xi.sum(axis=1, keepdims=True)
    return PartitionOfUnity(cov, xi, f)


def theta_point(pou: PartitionOfUnity, x: int) -> RealizationPoint:
    return pou.theta(x)


def theta_map(pou: PartitionOfUnity, K: NerveComplex | None = None) -> DiscreteMap:
    """``Theta(x) = sum_j xi_j(x) v_j`` for every sample ``x``."""
    X = pou.covering.space
    pts = [pou.theta(x) for x in range(len(X))]
    if K is not None:
        for x, p in enumerate(pts):
            if p.support not in K:
                raise SupportNotSimplex(f"supp Theta({x}) = {p.support} is not a simplex", witness=x)
    return DiscreteMap("Theta", list(range(len(X))), pts, sample_metric(X), realization_metric(pou.scale))


def xi_map(pou: PartitionOfUnity, j: int) -> DiscreteMap:
    """``xi_j`` as a real-valued map on the sample."""
    X = pou.covering.space
    vals = pou.values[:, j].tolist()

    def real_line(v):
        a = np.asarray(v, dtype=float)
        return np.abs(a[:, None] - a[None, :])

    return DiscreteMap(f"xi_{j}", list(range(len(X))), vals, sample_metric(X), real_line)
