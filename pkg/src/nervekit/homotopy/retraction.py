"""Retractions of the mapping cylinder onto D and the inverse map zeta.

For each simplex ``sigma`` a strong deformation retraction ``Phi_sigma`` of
``sigma x K(U_sigma)`` onto ``sigma x U_sigma x 0  union  boundary(sigma) x K(U_sigma)``
is evaluated in closed form. Vertices use the cone-collapsing formula

    Phi([x, t], s) = [phi(x, (s/eps) t), (g(s)/eps) t]

and higher simplices use the radial projection ``rho = (psi, u)`` from
``(barycenter, 2 eps)`` together with the blending height ``w`` and the
cutoffs ``mu`` and ``nu``.

Gluing the end maps ``Phi_sigma(., eps)`` over decreasing supports gives the
retraction ``Phi_bar`` of the cylinder onto D, and ``zeta = q o Phi_bar o Psi``.

Two families of contractible domains are provided:

* :class:`IntersectionFamily` uses ``U_sigma`` = the intersection of the
  covering elements, contracted to its Chebyshev center.
* :class:`NestedFamily` builds the nested domains ``U_tau`` containing
  ``B_tau`` and every ``U_sigma`` of a coface, as sample-centered balls.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from ..errors import BadContraction, MissingFamilyMember, NotConvex, RadiusOverflow
from ..maps import DiscreteHomotopy, DiscreteMap, lerp, sample_metric, tabulate, time_grid
from ..metric_core import Covering
from ..model_spaces import BallContraction, ModelSpace
from ..nerve import NerveComplex, Simplex, simplex_key
from ..realization import (
    RealizationPoint,
    barycentric_grid,
    lerp_points,
    radial_projection_coords,
    realization_metric,
    sorted_partitions,
)
from .cylinder import ConePoint, CylinderPoint, apex, cone_point, cylinder_metric
from .partition import PartitionOfUnity

OMEGA0_LEVEL = 0.1
OMEGA1_LEVEL = 0.5
OMEGA_ORDER = 12
OMEGA_HEIGHTS = 33


# -- profile functions ---------------------------------------------------------


def g_profile(s: float, eps: float) -> float:
    """``eps`` on ``[0, eps/3]``, then linear down to ``0`` at ``eps``."""
    if s <= eps / 3:
        return eps
    if s >= eps:
        return 0.0
    return eps * (eps - s) / (2 * eps / 3)


def mu_profile(s: float, eps: float) -> float:
    if s <= eps / 2:
        return 0.0
    if s >= 2 * eps / 3:
        return eps
    return eps * (s - eps / 2) / (eps / 6)


def nu_profile(s: float, eps: float) -> float:
    if s <= 2 * eps / 3:
        return 0.0
    if s >= 3 * eps / 4:
        return eps
    return eps * (s - 2 * eps / 3) / (eps / 12)


# -- distances to Omega_0 and Omega_1 ------------------------------------------


@dataclass(frozen=True)
class OmegaGrid:
    """Sample of ``sigma x [0, 1]`` (heights in units of ``eps``) split by ``u``.

    ``u`` is invariant under permutations of the vertices, so the grid keeps
    one representative per orbit with coordinates sorted in decreasing
    order; the distance from ``(lam, t)`` to the grid part of ``Omega_i`` is
    then attained against ``sort(lam)``.
    """

    omega0: np.ndarray  # rows (sorted lam..., height)
    omega1: np.ndarray


@lru_cache(maxsize=None)
def omega_grid(n_vertices: int, order: int = OMEGA_ORDER, heights: int = OMEGA_HEIGHTS) -> OmegaGrid:
    lam = sorted_partitions(n_vertices, order)
    hs = np.linspace(0.0, 1.0, heights)
    rows0, rows1 = [], []
    for row in lam:
        for h in hs:
            _, u = radial_projection_coords(row, float(h), 1.0)
            point = np.append(row, h)
            if u <= OMEGA0_LEVEL:
                rows0.append(point)
            if u >= OMEGA1_LEVEL:
                rows1.append(point)
    return OmegaGrid(np.array(rows0), np.array(rows1))


def omega_distances(lam: np.ndarray, t: float, u: float, eps: float) -> tuple[float, float]:
    """``(s0, s1)``: zero exactly on ``Omega_i``, grid distance elsewhere."""
    grid = omega_grid(len(lam))
    key = np.append(np.sort(lam)[::-1], t / eps)

    def dist(rows: np.ndarray) -> float:
        diff = rows - key
        return eps * float(np.sqrt((diff * diff).sum(axis=1)).min())

    s0 = 0.0 if u <= OMEGA0_LEVEL * eps else dist(grid.omega0)
    s1 = 0.0 if u >= OMEGA1_LEVEL * eps else dist(grid.omega1)
    return s0, s1


def blend_height(lam: np.ndarray, t: float, u: float, eps: float) -> float:
    """``w = (s1 u + s0 t) / (s0 + s1)`` with ``w = u`` on Omega_0 and ``w = t`` on Omega_1."""
    if u == t:
        return t
    s0, s1 = omega_distances(lam, t, u, eps)
    if s0 == 0.0:
        return u
    if s1 == 0.0:
        return t
    return (s1 * u + s0 * t) / (s0 + s1)


# -- families of contractible domains -----------------------------------------


class RetractionFamily:
    """Domains ``U_sigma`` with their contractions, indexed by nerve simplices."""

    mode = "abstract"

    def __init__(self, model: ModelSpace, cov: Covering, K: NerveComplex):
        if model.space is not cov.space:
            raise ValueError("covering must be built on the model's sample")
        self.model = model
        self.cov = cov
        self.K = K
        self.eps = cov.scale
        self._contractions: dict[Simplex, BallContraction] = {}

    def _check(self, sigma: Sequence[int]) -> Simplex:
        key = simplex_key(sigma)
        if not key or key not in self.K:
            raise MissingFamilyMember(f"no domain for {key}: not a simplex of the nerve", witness=key)
        return key

    def domain(self, sigma: Sequence[int]) -> np.ndarray:
        raise NotImplementedError

    def center(self, sigma: Sequence[int]) -> int | None:
        return None

    def contraction(self, sigma: Sequence[int]) -> BallContraction:
        key = self._check(sigma)
        phi = self._contractions.get(key)
        if phi is None:
            U = self.domain(key)
            c = self.center(key)
            if c is None:
                c, _ = self.model.chebyshev_center(U)
            phi = BallContraction(self.model, U, c, self.eps)
            self._contractions[key] = phi
        return phi


class IntersectionFamily(RetractionFamily):
    """``U_sigma`` = intersection of the covering elements of ``sigma``."""

    mode = "good"

    def __init__(self, model: ModelSpace, cov: Covering, K: NerveComplex):
        super().__init__(model, cov, K)
        self._domains: dict[Simplex, np.ndarray] = {}

    def domain(self, sigma: Sequence[int]) -> np.ndarray:
        key = self._check(sigma)
        U = self._domains.get(key)
        if U is None:
            U = self.cov.intersection(key)
            if len(U) == 0:
                raise MissingFamilyMember(f"empty intersection for {key}", witness=key)
            self._domains[key] = U
        return U


class NestedFamily(RetractionFamily):
    """Nested domains: ``U_sigma`` contains ``B_sigma`` and ``U_tau`` contains ``U_sigma`` for faces ``tau``.

    Built lazily by reverse induction: the domain of a simplex is the
    smallest sample-centered ball enclosing its ball intersection and the
    domains of its immediate cofaces.
    """

    mode = "domination"

    def __init__(self, model: ModelSpace, cov: Covering, K: NerveComplex):
        super().__init__(model, cov, K)
        self._balls: dict[Simplex, tuple[int, np.ndarray, float]] = {}

    def cofaces(self, sigma: Simplex) -> list[Simplex]:
        out = set()
        s = set(sigma)
        for f in self.K.facets_containing(sigma):
            for v in f:
                if v not in s:
                    out.add(simplex_key(sigma + (v,)))
        return sorted(out)

    def _ball(self, sigma: Sequence[int]) -> tuple[int, np.ndarray, float]:
        key = self._check(sigma)
        hit = self._balls.get(key)
        if hit is not None:
            return hit
        parts = [self.cov.intersection(key)]
        parts += [self._ball(c)[1] for c in self.cofaces(key)]
        need = np.unique(np.concatenate(parts))
        try:
            ball = self.model.enclosing_ball(need)
        except NotConvex as exc:
            raise RadiusOverflow(
                f"domain for {key} needs radius {exc.witness:.6g}, beyond the convexity radius",
                witness=key,
            ) from exc
        self._balls[key] = ball
        return ball

    def domain(self, sigma: Sequence[int]) -> np.ndarray:
        return self._ball(sigma)[1]

    def center(self, sigma: Sequence[int]) -> int:
        return self._ball(sigma)[0]

    def radius(self, sigma: Sequence[int]) -> float:
        return self._ball(sigma)[2]


def retraction_family(model: ModelSpace, cov: Covering, K: NerveComplex, mode: str = "good") -> RetractionFamily:
    if mode == "good":
        return IntersectionFamily(model, cov, K)
    if mode == "domination":
        return NestedFamily(model, cov, K)
    raise ValueError(f"unknown family mode {mode!r}")


def nested_family(cov: Covering, K: NerveComplex, model: ModelSpace) -> dict[Simplex, np.ndarray]:
    """All nested domains, checked against both containment conditions."""
    fam = NestedFamily(model, cov, K)
    out = {s: fam.domain(s) for s in K.simplices()}
    for s, U in out.items():
        Us = set(U.tolist())
        if not set(cov.intersection(s).tolist()) <= Us:
            raise AssertionError(f"U_{s} misses part of B_{s}")
        for c in fam.cofaces(s):
            if not set(out[c].tolist()) <= Us:
                raise AssertionError(f"U_{s} does not contain U_{c}")
    return out


def check_arrival(phi: BallContraction) -> None:
    """Raise :class:`BadContraction` unless every member is at the center by ``eps/10``."""
    t = phi.arrival
    for x in phi.members:
        if phi(int(x), t) != phi.center:
            raise BadContraction(f"sample {int(x)} has not reached the center at t = eps/10", witness=int(x))


# -- Phi_sigma -----------------------------------------------------------------


def _cone(phi: BallContraction, x: int | None, time: float, height: float, eps: float) -> ConePoint:
    if height >= eps:
        return apex(eps)
    return cone_point(phi(x, time), height, eps)


def phi_sigma_eval(family: RetractionFamily, sigma: Sequence[int], p: CylinderPoint, s: float) -> CylinderPoint:
    """``Phi_sigma(p, s)`` for a point ``p`` of ``sigma x K(U_sigma)``."""
    eps = family.eps
    sigma = simplex_key(sigma)
    if not set(p.theta.support) <= set(sigma):
        raise ValueError(f"support {p.theta.support} is not a face of {sigma}")
    phi = family.contraction(sigma)
    x = p.cone.base
    t = p.cone.height
    if x is not None and x not in phi:
        raise ValueError(f"cone base {x} is not in U_{sigma}")
    if len(sigma) == 1:
        height = (g_profile(s, eps) / eps) * t
        return CylinderPoint(p.theta, _cone(phi, x, (s / eps) * t, height, eps))
    lam = p.theta.coords(sigma)
    psi_c, u = radial_projection_coords(lam, t, eps)
    if u == t and np.array_equal(psi_c, lam):
        psi = p.theta
    else:
        psi = RealizationPoint.from_coords(sigma, psi_c, p.theta.scale)
    w = blend_height(lam, t, u, eps)
    theta = psi if s == eps else lerp_points(p.theta, psi, s / eps)
    height = lerp(t, w, nu_profile(s, eps) / eps)
    return CylinderPoint(theta, _cone(phi, x, (mu_profile(s, eps) / eps) * (t - u), height, eps))


def phi_sigma_target(sigma: Sequence[int]):
    """Membership in ``sigma x U x 0  union  boundary(sigma) x K(U)``."""
    full = len(simplex_key(sigma))

    def pred(p: CylinderPoint) -> bool:
        return len(p.theta.support) < full or (not p.cone.is_apex and p.cone.height == 0.0)

    return pred


def phi_sigma_domain(
    family: RetractionFamily,
    sigma: Sequence[int],
    order: int = 3,
    bases: int = 6,
    heights: int = 5,
) -> list[CylinderPoint]:
    """Grid of ``sigma x K(U_sigma)``: barycentric grid times spread bases and heights, plus the apex."""
    eps = family.eps
    sigma = simplex_key(sigma)
    U = family.domain(sigma)
    pick = U[np.unique(np.linspace(0, len(U) - 1, min(bases, len(U))).round().astype(int))]
    hs = np.linspace(0.0, eps, heights)[:-1]
    thetas = [RealizationPoint.from_coords(sigma, row, eps) for row in barycentric_grid(len(sigma), order)]
    cones = [ConePoint(int(x), float(h)) for x in pick for h in hs] + [apex(eps)]
    return [CylinderPoint(th, c) for th in thetas for c in cones]


def phi_sigma(
    family: RetractionFamily,
    sigma: Sequence[int],
    steps: int = 16,
    points: Sequence[CylinderPoint] | None = None,
) -> DiscreteHomotopy:
    """Tabulated ``Phi_sigma`` on a grid of ``sigma x K(U_sigma)``."""
    sigma = simplex_key(sigma)
    check_arrival(family.contraction(sigma))
    dom = list(points) if points is not None else phi_sigma_domain(family, sigma)
    m = cylinder_metric(family.cov.space, family.eps)
    return tabulate(
        f"Phi_{sigma}",
        dom,
        time_grid(family.eps, steps),
        lambda p, s: phi_sigma_eval(family, sigma, p, s),
        m,
        m,
    )


# -- gluing --------------------------------------------------------------------


@dataclass(frozen=True)
class RetractionTrace:
    start: CylinderPoint
    stages: tuple[tuple[Simplex, CylinderPoint], ...]

    @property
    def result(self) -> CylinderPoint:
        return self.stages[-1][1] if self.stages else self.start


def in_D(p: CylinderPoint) -> bool:
    return not p.cone.is_apex and p.cone.height == 0.0


def compose_retraction(family: RetractionFamily, p: CylinderPoint) -> RetractionTrace:
    """``Phi_bar(p)``: apply ``Phi_{supp theta}(., eps)`` until the point lies in D.

    Each stage either lands at height 0 or moves ``theta`` onto a proper
    face, so at most ``dim + 1`` stages run.
    """
    stages: list[tuple[Simplex, CylinderPoint]] = []
    cur = p
    limit = len(p.theta.support)
    while not in_D(cur):
        if len(stages) >= limit:
            raise RuntimeError(f"retraction did not reach D after {limit} stages")
        sigma = cur.theta.support
        cur = phi_sigma_eval(family, sigma, cur, family.eps)
        stages.append((sigma, cur))
    return RetractionTrace(p, tuple(stages))


def retract(family: RetractionFamily, p: CylinderPoint) -> CylinderPoint:
    return compose_retraction(family, p).result


def zeta_point(family: RetractionFamily, theta: RealizationPoint) -> int:
    """``zeta(theta) = q(Phi_bar(theta, apex))``."""
    return int(retract(family, CylinderPoint(theta, apex(family.eps))).cone.base)


def zeta_map(family: RetractionFamily, thetas: Sequence[RealizationPoint]) -> DiscreteMap:
    vals = [zeta_point(family, th) for th in thetas]
    return DiscreteMap(
        "zeta",
        list(thetas),
        vals,
        realization_metric(family.eps),
        sample_metric(family.cov.space),
    )


def domination_value(family: RetractionFamily, pou: PartitionOfUnity, x: int, s: float) -> int:
    """``D(x, s) = q(Phi_bar(Theta(x), [x, s]))``: ``x`` at ``s = 0``, ``zeta(Theta(x))`` at ``s = eps``."""
    p = CylinderPoint(pou.theta(x), cone_point(x, s, family.eps))
    return int(retract(family, p).cone.base)


def domination_homotopy(family: RetractionFamily, pou: PartitionOfUnity, steps: int = 16) -> DiscreteHomotopy:
    X = family.cov.space
    m = sample_metric(X)
    return tabulate(
        "D",
        list(range(len(X))),
        time_grid(family.eps, steps),
        lambda x, s: domination_value(family, pou, x, s),
        m,
        m,
    )


def remark_containment(cov: Covering, x: int, y: int) -> bool:
    """True when ``x`` and ``y`` share a covering element."""
    return bool((cov.members[x] & cov.members[y]).any())


__all__ = [
    "IntersectionFamily",
    "NestedFamily",
    "RetractionFamily",
    "RetractionTrace",
    "blend_height",
    "check_arrival",
    "compose_retraction",
    "domination_homotopy",
    "domination_value",
    "g_profile",
    "mu_profile",
    "nested_family",
    "nu_profile",
    "omega_distances",
    "phi_sigma",
    "phi_sigma_domain",
    "phi_sigma_eval",
    "phi_sigma_target",
    "remark_containment",
    "retract",
    "retraction_family",
    "zeta_map",
    "zeta_point",
]
