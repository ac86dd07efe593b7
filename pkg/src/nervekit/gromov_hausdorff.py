"""epsilon-approximations, exact Gromov-Hausdorff values on tiny spaces, and homotopy certificates.

Two versions of the Gromov-Hausdorff distance are computed:

* ``approx_gh``: the least ``eps`` admitting ``eps``-approximations
  ``f: X -> Y`` and ``g: Y -> X`` (distortion and covering defect of each);
* ``distortion_gh``: half the least distortion of a correspondence.

Every correspondence contains ``graph f  union  graph g^T`` for some maps
``f`` and ``g``, and distortion only grows with the relation, so the
minimum over correspondences equals the minimum over such unions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainMismatch, EndpointMismatch, TimeMismatch, TooLarge
from .maps import DiscreteHomotopy, DiscreteMap
from .metric_core import FiniteMetricSpace
from .verify import LipschitzReport, measured_lipschitz

DEFAULT_CAP = 5
# one side of the map-pair enumeration is materialized as an array
MAX_MAPS = 1_000_000


def _positions(points, pool) -> np.ndarray:
    index = {p: i for i, p in enumerate(pool)}
    try:
        return np.array([index[p] for p in points], dtype=int)
    except KeyError as exc:
        raise DomainMismatch(f"value {exc.args[0]!r} is not a point of the other space", witness=exc.args[0]) from None


def map_defects(dX: np.ndarray, dY: np.ndarray, f: np.ndarray) -> tuple[float, float]:
    """``(distortion, covering defect)`` of ``f: X -> Y`` given as an index array."""
    dis = float(np.abs(dY[np.ix_(f, f)] - dX).max()) if len(f) else 0.0
    codef = float(dY[:, f].min(axis=1).max()) if len(dY) else 0.0
    return dis, codef


def approximation_defect(f: DiscreteMap, g: DiscreteMap) -> float:
    """``max(dis f, dis g, codef f, codef g)`` for ``f: X -> Y`` and ``g: Y -> X``."""
    X, Y = list(f.domain), list(g.domain)
    fi = _positions(f.values, Y)
    gi = _positions(g.values, X)
    dX = f.domain_metric(X)
    dY = g.domain_metric(Y)
    return max(*map_defects(dX, dY, fi), *map_defects(dY, dX, gi))


@dataclass(frozen=True)
class ApproxPair:
    f: DiscreteMap
    g: DiscreteMap
    defect: float

    @classmethod
    def build(cls, f: DiscreteMap, g: DiscreteMap) -> "ApproxPair":
        return cls(f, g, approximation_defect(f, g))


def _all_maps(n_from: int, n_to: int) -> np.ndarray:
    if n_from == 0:
        return np.zeros((1, 0), dtype=int)
    return np.array(list(itertools.product(range(n_to), repeat=n_from)), dtype=int)


def gh_exact_small(X: FiniteMetricSpace, Y: FiniteMetricSpace, cap: int = DEFAULT_CAP) -> tuple[float, float]:
    """Exhaustive ``(distortion_gh, approx_gh)`` for spaces of at most ``cap`` points."""
    nX, nY = len(X), len(Y)
    if nX > cap or nY > cap:
        raise TooLarge(f"spaces have {nX} and {nY} points; cap is {cap}", witness=(nX, nY, cap))
    if nY**nX > MAX_MAPS or nX**nY > MAX_MAPS:
        raise TooLarge(f"{nY}^{nX} or {nX}^{nY} maps exceed the enumeration limit {MAX_MAPS}", witness=(nX, nY, cap))
    dX, dY = np.asarray(X.dist), np.asarray(Y.dist)
    Fs, Gs = _all_maps(nX, nY), _all_maps(nY, nX)

    def own(maps: np.ndarray, d_src: np.ndarray, d_dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dis = np.abs(d_dst[maps[:, :, None], maps[:, None, :]] - d_src[None]).max(axis=(1, 2))
        codef = d_dst[:, maps].min(axis=2).max(axis=0)
        return dis, codef

    disF, codF = own(Fs, dX, dY)
    disG, codG = own(Gs, dY, dX)
    approx = max(float(np.maximum(disF, codF).min()), float(np.maximum(disG, codG).min()))

    # cross terms |dX(x, g y) - dY(f x, y)| indexed [x, y, x'] for a fixed f
    best = np.inf
    ys = np.arange(nY)
    order = np.argsort(disF)
    for fi in order:
        if disF[fi] >= best:
            break
        f = Fs[fi]
        A = np.abs(dX[:, None, :] - dY[f][:, :, None])  # [x, y, x']
        Ay = A.transpose(1, 2, 0)  # [y, x', x]
        cross = Ay[ys[None, :], Gs].max(axis=(1, 2))
        total = np.maximum(np.maximum(disG, cross), disF[fi])
        best = min(best, float(total.min()))
    return 0.5 * best, approx


def correspondence_distortion_gh(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Half the least distortion over every relation with full projections (brute force)."""
    nX, nY = len(X), len(Y)
    cells = [(x, y) for x in range(nX) for y in range(nY)]
    best = np.inf
    for mask in range(1, 1 << len(cells)):
        R = [cells[k] for k in range(len(cells)) if mask >> k & 1]
        if {x for x, _ in R} != set(range(nX)) or {y for _, y in R} != set(range(nY)):
            continue
        dis = max(abs(X.dist[a, c] - Y.dist[b, d]) for a, b in R for c, d in R)
        best = min(best, dis)
    return 0.5 * float(best)


@dataclass(frozen=True)
class LHCertificate:
    pair: ApproxPair
    F: DiscreteHomotopy
    G: DiscreteHomotopy
    lipschitz: float
    time_span: float
    reports: tuple[LipschitzReport, ...]

    @property
    def bound(self) -> float:
        """Upper bound for the Lipschitz homotopy distance at this constant."""
        return max(self.pair.defect, self.time_span)

    def to_json(self) -> dict:
        return {
            "defect": self.pair.defect,
            "lipschitz": self.lipschitz,
            "time_span": self.time_span,
            "bound": self.bound,
            "reports": [r.to_json() for r in self.reports],
        }


def _check_ends(H: DiscreteHomotopy, first: DiscreteMap, second: DiscreteMap, label: str) -> None:
    """Raise :class:`EndpointMismatch` naming the worst offending point, if any."""
    pos = {p: i for i, p in enumerate(first.domain)}
    spos = {p: i for i, p in enumerate(second.domain)}
    for i, x in enumerate(H.domain):
        if x not in pos:
            raise DomainMismatch(f"{label}: homotopy point {x!r} is not in the domain", witness=x)
    comp = [second.values[spos[first.values[pos[x]]]] for x in H.domain]
    for k, want, end in ((0, comp, "0"), (-1, list(H.domain), "end")):
        bad = [i for i, (a, b) in enumerate(zip(H.values[k], want)) if a != b]
        if bad:
            gaps = [float(H.codomain_metric([H.values[k][i], want[i]])[0, 1]) for i in bad]
            w = bad[int(np.argmax(gaps))]
            target = "the composite" if end == "0" else "the identity"
            raise EndpointMismatch(
                f"{label}(., {end}) differs from {target} at {H.domain[w]!r} by {max(gaps):.6g}",
                witness=H.domain[w],
            )


def lh_certificate(pair: ApproxPair, F: DiscreteHomotopy, G: DiscreteHomotopy) -> LHCertificate:
    """Check ``F(., 0) = g o f``, ``F(., end) = 1_X`` (and symmetrically for ``G``) and measure constants."""
    if not np.isclose(F.span, G.span, rtol=0, atol=1e-15):
        raise TimeMismatch(f"time spans {F.span!r} and {G.span!r} differ", witness=(F.span, G.span))
    _check_ends(F, pair.f, pair.g, "F")
    _check_ends(G, pair.g, pair.f, "G")
    reports = tuple(measured_lipschitz(m) for m in (pair.f, pair.g, F, G))
    C = max(r.lipschitz for r in reports)
    return LHCertificate(pair, F, G, C, F.span, reports)
