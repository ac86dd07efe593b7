"""End-to-end runs: covering, nerve, Theta, zeta and their verification.

:func:`run_pipeline` returns a plain dictionary (the report) whose numbers
are measured on the sample. Steps that need a contraction oracle (zeta and
the domination homotopy) run only when a model space is available.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .errors import NervekitError
from .homotopy.cylinder import (
    CylinderPoint,
    DPoint,
    apex,
    cone_point,
    homotopy_F,
    homotopy_H,
    in_psi_image,
    in_tau_image,
)
from .homotopy.partition import partition_of_unity, theta_map, xi_map
from .homotopy.retraction import (
    domination_homotopy,
    phi_sigma,
    phi_sigma_target,
    remark_containment,
    retraction_family,
    zeta_point,
)
from .maps import DiscreteMap, sample_metric
from .metric_core import (
    FiniteMetricSpace,
    ball_containment_witness,
    build_ball_covering,
    doubling_constant,
    max_overlap,
)
from .model_spaces import ModelSpace
from .nerve import build_nerve
from .realization import realization_metric
from .verify import measured_lipschitz, verify_retraction

FACE_LIMIT = 200_000


def _nerve_summary(K) -> dict:
    out = {"n_vertices": K.n_vertices, "dim": K.dim, "facets": len(K.facets), "components": K.one_skeleton_components()}
    try:
        fv = K.f_vector()
        out["f_vector"] = fv
        out["euler_characteristic"] = sum((-1) ** k * c for k, c in enumerate(fv))
    except NervekitError:
        out["f_vector"] = None
        out["euler_characteristic"] = None
    return out


def run_pipeline(
    space: FiniteMetricSpace | ModelSpace,
    eps: float,
    seed: int | None = None,
    mode: str = "good",
    steps: int = 16,
    doubling: bool = True,
    homotopies: bool = True,
) -> dict:
    """Covering, nerve, partition of unity, Theta, zeta and all checks at scale ``eps``."""
    started = time.perf_counter()
    model = space if isinstance(space, ModelSpace) else None
    X = model.space if model is not None else space
    n = len(X)
    cov = build_ball_covering(X, eps, seed)
    L = max_overlap(cov)
    K = build_nerve(cov)
    report: dict = {"epsilon": eps, "n_samples": n, "mode": mode}
    cover = {
        "n_elements": len(cov),
        "radius": cov.radius,
        "max_overlap": L,
        "covers": cov.covers(),
        "ball_containment_witness": ball_containment_witness(cov),
    }
    if doubling:
        D8, *halving = doubling_constant(X, [8 * eps, 4 * eps, 2 * eps, eps, eps / 2])
        cover["doubling_8eps"] = D8
        # reported only: a single squared constant undercounts eps/2-separated centers
        cover["doubling_squared_bound"] = D8 * D8
        cover["within_doubling_squared"] = L <= D8 * D8
        # centers meeting U_j lie in a 4eps-ball; four halvings reach eps/4-balls holding one center each
        cover["doubling_halving_bound"] = math.prod(halving)
        cover["overlap_within_doubling_bound"] = L <= math.prod(halving)
    report["covering"] = cover
    report["nerve"] = _nerve_summary(K)
    report["nerve"]["dim_within_overlap"] = K.dim + 1 <= L

    pou = partition_of_unity(X, cov)
    xi_bound = pou.lipschitz_bound()
    xi_max = max(measured_lipschitz(xi_map(pou, j), metric="real line").lipschitz for j in range(len(cov)))
    Th = theta_map(pou, K)
    th_rep = measured_lipschitz(Th)
    supports_ok = all(p.support == cov.containing(x) for x, p in enumerate(Th.values))
    report["partition"] = {
        "row_sum_error": float(np.abs(pou.values.sum(axis=1) - 1).max()),
        "xi_lipschitz": xi_max,
        "xi_bound": xi_bound,
        "xi_ok": xi_max <= xi_bound,
        "theta": th_rep.to_json(),
        "theta_bound": pou.theta_lipschitz_bound(),
        "theta_ok": th_rep.lipschitz <= pou.theta_lipschitz_bound(),
        "supports_are_containing_sets": supports_ok,
    }

    if homotopies:
        dpts = [DPoint(Th.values[x], x) for x in range(n)]
        dpts += [DPoint(p, x) for x in range(0, n, max(1, n // 40)) for p in _vertex_points(cov, x, eps)]
        H = homotopy_H(pou, dpts, steps)
        cpts = [CylinderPoint(d.theta, cone_point(d.x, h, eps)) for d in dpts[: 2 * n // 3 + 1] for h in (0.0, eps / 2)]
        cpts += [CylinderPoint(Th.values[0], apex(eps))]
        Fh = homotopy_F(cpts, X, eps, steps)
        report["homotopies"] = {
            "H": verify_retraction(H, in_tau_image(pou)).to_json(),
            "F": verify_retraction(Fh, in_psi_image).to_json(),
        }

    if model is None:
        report["zeta"] = {"skipped": "no model space: contraction oracle unavailable"}
    else:
        fam = retraction_family(model, cov, K, mode)
        zeta_vals = [zeta_point(fam, Th.values[x]) for x in range(n)]
        shares = [remark_containment(cov, x, z) for x, z in enumerate(zeta_vals)]
        dists = np.array([X.dist[x, z] for x, z in enumerate(zeta_vals)])
        worst = int(np.argmax(dists))
        zmap = DiscreteMap("zeta", list(Th.values), zeta_vals, realization_metric(eps), sample_metric(X))
        zrep = measured_lipschitz(_dedupe(zmap))
        report["zeta"] = {
            "shares_element": all(shares),
            "first_failure": None if all(shares) else shares.index(False),
            "max_round_trip": float(dists.max()),
            "round_trip_witness": worst,
            "round_trip_ok": bool(dists.max() <= 2 * cov.radius),
            "lipschitz": zrep.to_json(),
        }
        if homotopies:
            Dh = domination_homotopy(fam, pou, steps)
            ends = all(Dh.values[0][x] == x for x in range(n)) and all(
                Dh.values[-1][x] == zeta_vals[x] for x in range(n)
            )
            report["domination"] = {"endpoints_exact": ends, "lipschitz": measured_lipschitz(Dh).to_json()}
            sig = max(K.facets, key=len)
            checks = {}
            for k in range(1, min(len(sig), 4) + 1):
                h = phi_sigma(fam, sig[:k], steps)
                checks[str(k - 1)] = verify_retraction(h, phi_sigma_target(sig[:k])).to_json()
            report["phi_sigma"] = checks
    report["spacing"] = {
        "max_nearest_neighbour": _spacing(X),
        "dense_enough": _spacing(X) <= eps / 10,
    }
    report["runtime_seconds"] = time.perf_counter() - started
    return report


def _vertex_points(cov, x, eps):
    from .realization import RealizationPoint

    return [RealizationPoint.vertex(j, eps) for j in cov.containing(x)]


def _dedupe(m: DiscreteMap) -> DiscreteMap:
    seen: dict = {}
    for p, v in zip(m.domain, m.values):
        seen.setdefault(p, v)
    return DiscreteMap(m.name, list(seen), list(seen.values()), m.domain_metric, m.codomain_metric)


def _spacing(X: FiniteMetricSpace) -> float:
    if len(X) < 2:
        return 0.0
    d = X.dist + np.diag(np.full(len(X), math.inf))
    return float(d.min(axis=1).max())


def all_checks_pass(report: dict) -> bool:
    """True when every boolean contract flag in the report holds.

    The sample-density flag and the squared-doubling comparison are
    informational and are not counted.
    """
    ignore = {"dense_enough", "skipped", "within_doubling_squared"}

    def walk(obj, key=None) -> bool:
        if isinstance(obj, dict):
            return all(walk(v, k) for k, v in obj.items() if k not in ignore and k != "subsampled")
        if isinstance(obj, bool):
            return obj
        return True

    return walk(report)
