"""Acceptance criteria 1-8.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line with the measured
quantities and then asserts the criterion at its stated tolerance.
"""

import math
import time

import numpy as np
import pytest

from nervekit.errors import EndpointMismatch, NoStableRadius, TooFar, TriangleViolation
from nervekit.gromov_hausdorff import ApproxPair, correspondence_distortion_gh, gh_exact_small, lh_certificate
from nervekit.homotopy.cylinder import (
    ConePoint,
    CylinderPoint,
    DPoint,
    apex,
    cone_distance,
    cone_point,
    homotopy_F,
    homotopy_H,
    in_psi_image,
    in_tau_image,
)
from nervekit.homotopy.extension import homotopy_from_closeness, lipschitz_extension
from nervekit.homotopy.retraction import phi_sigma, phi_sigma_target, zeta_point
from nervekit.maps import DiscreteHomotopy, DiscreteMap, sample_metric, time_grid
from nervekit.metric_core import ball_covering, build_ball_covering, validate_metric
from nervekit.model_spaces import generate
from nervekit.nerve import NerveComplex, build_nerve, lift_covering_nerve, nerves_equal, stable_threshold
from nervekit.pipeline import run_pipeline
from nervekit.realization import RealizationPoint, barycentric_grid
from nervekit.transfer import run_transfer
from nervekit.verify import verify_retraction

from .conftest import random_metric


@pytest.fixture
def say(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")

    return emit


# -- 1: exact identities -------------------------------------------------------


def test_criterion_1_exact_identities(circle, say):
    start = time.perf_counter()
    eps, pou, cov = circle.eps, circle.pou, circle.cov
    n = len(circle.X)
    thetas = [pou.theta(x) for x in range(n)]
    dpts = [DPoint(thetas[x], x) for x in range(n)]
    dpts += [DPoint(RealizationPoint.vertex(j, eps), x) for x in range(n) for j in cov.containing(x)]
    H = verify_retraction(homotopy_H(pou, dpts), in_tau_image(pou))
    cpts = [CylinderPoint(thetas[x], cone_point(x, h, eps)) for x in range(n) for h in (0.0, eps / 3, 0.9 * eps)]
    cpts.append(CylinderPoint(thetas[0], apex(eps)))
    F = verify_retraction(homotopy_F(cpts, circle.X, eps), in_psi_image)
    phis = {}
    for d in range(4):
        for sigma in [s for s in circle.K.simplices() if len(s) == d + 1][:3]:
            phis[sigma] = verify_retraction(phi_sigma(circle.good, sigma), phi_sigma_target(sigma))
    elapsed = time.perf_counter() - start
    ok = H.ok and F.ok and all(r.ok for r in phis.values()) and elapsed < 30
    say(1, ok, f"H ok={H.ok} on {len(dpts)} pts, F ok={F.ok} on {len(cpts)} pts, "
        f"Phi_sigma ok on {sum(r.ok for r in phis.values())}/{len(phis)} simplices (dims 0-3), {elapsed:.1f}s < 30s")
    assert ok


# -- 2 and 3: pipelines on three models ----------------------------------------

MODELS = {
    "circle": ("circle", 240, 0.05),
    "torus": ("flat_torus", 400, 0.06),
    "sphere": ("sphere", 400, 0.2),
}


@pytest.fixture(scope="module")
def pipelines():
    out = {}
    for name, (kind, n, eps) in MODELS.items():
        t0 = time.perf_counter()
        m = generate(kind, n)
        rep = run_pipeline(m, eps, homotopies=False, doubling=False)
        out[name] = (m, eps, rep, time.perf_counter() - t0)
    return out


@pytest.mark.parametrize("name", list(MODELS))
def test_criterion_2_round_trip_containment(pipelines, name, say):
    m, eps, rep, build_time = pipelines[name]
    start = time.perf_counter()
    # independent exhaustive recheck from the raw covering
    cov = build_ball_covering(m.space, eps)
    K = build_nerve(cov)
    from nervekit.homotopy.partition import partition_of_unity
    from nervekit.homotopy.retraction import retraction_family

    pou = partition_of_unity(m.space, cov)
    fam = retraction_family(m, cov, K, "good")
    z = np.array([zeta_point(fam, pou.theta(x)) for x in range(len(m))])
    shares = (cov.members & cov.members[z]).any(axis=1)
    worst = float(m.dist[np.arange(len(m)), z].max())
    elapsed = build_time + time.perf_counter() - start
    ok = bool(shares.all()) and worst <= 4 * eps and rep["zeta"]["shares_element"] and elapsed < 60
    say(2, ok, f"{name}: {int(shares.sum())}/{len(m)} share an element, max d(x, zeta Theta x) = {worst:.4g} "
        f"<= 4eps = {4 * eps:.4g}, {elapsed:.1f}s < 60s")
    assert ok


@pytest.mark.parametrize("name", list(MODELS))
def test_criterion_3_lipschitz_bounds(pipelines, name, say):
    m, eps, rep, _ = pipelines[name]
    p = rep["partition"]
    theta = p["theta"]
    ok = p["xi_lipschitz"] <= p["xi_bound"] and theta["lipschitz"] <= p["theta_bound"] and not theta["subsampled"]
    say(3, ok, f"{name}: Lip(xi) = {p['xi_lipschitz']:.4g} <= (1+2L)/eps = {p['xi_bound']:.4g}, "
        f"Lip(Theta) = {theta['lipschitz']:.4g} <= 2L(1+2L) = {p['theta_bound']:.4g}, {theta['pairs']} pairs exhaustive")
    assert ok


# -- 4: GH oracle --------------------------------------------------------------


def test_criterion_4_gh(say):
    start = time.perf_counter()
    X = validate_metric([[0, 1], [1, 0]])
    Y = validate_metric([[0, 3], [3, 0]])
    two = gh_exact_small(X, Y)[0]
    rng = np.random.default_rng(0)
    sandwich = oracle = checked = 0
    self_zero = True
    for _ in range(100):
        A = random_metric(rng, int(rng.integers(1, 5)))
        B = random_metric(rng, int(rng.integers(1, 5)))
        dis, approx = gh_exact_small(A, B)
        sandwich += dis <= approx + 1e-12 and approx <= 2 * dis + 1e-12
        self_zero &= gh_exact_small(A, A) == (0.0, 0.0)
        if len(A) * len(B) <= 12:
            checked += 1
            oracle += abs(dis - correspondence_distortion_gh(A, B)) <= 1e-12
    elapsed = time.perf_counter() - start
    ok = two == 1.0 and self_zero and sandwich == 100 and oracle == checked and elapsed < 60
    say(4, ok, f"two-point dis-GH = {two!r}, self-GH zero: {self_zero}, sandwich {sandwich}/100, "
        f"brute-force correspondence oracle {oracle}/{checked}, {elapsed:.1f}s < 60s")
    assert ok


# -- 5: cone metric ------------------------------------------------------------


def test_criterion_5_cone(say):
    m = generate("circle", 240)
    X = m.space
    eps = 0.05
    rng = np.random.default_rng(5)
    worst = -math.inf
    for _ in range(10_000):
        pts = [cone_point(int(rng.integers(240)), float(rng.uniform(0, eps)), eps) for _ in range(3)]
        if rng.random() < 0.05:
            pts[int(rng.integers(3))] = apex(eps)
        a, b, c = pts
        ab, bc, ac = (cone_distance(p, q, eps, X) for p, q in ((a, b), (b, c), (a, c)))
        worst = max(worst, ac - ab - bc, ab - ac - bc, bc - ab - ac)
    vertical = max(abs(cone_distance(ConePoint(x, 0.0), ConePoint(x, t), eps, X) - t)
                   for x in range(0, 240, 7) for t in np.linspace(0, eps * 0.99, 11))
    base = max(abs(cone_distance(ConePoint(x, 0.0), ConePoint(y, 0.0), eps, X) - 2 * eps * math.sin(X.dist[x, y] / 2))
               for x in range(0, 240, 13) for y in range(240))
    ok = worst <= 1e-9 and vertical <= 1e-12 and base <= 1e-12
    say(5, ok, f"10^4 triples, worst triangle excess {worst:.3g} <= 1e-9; "
        f"[x,0]-[x,t] error {vertical:.3g}, base formula error {base:.3g} <= 1e-12")
    assert ok


# -- 6: nerve stability --------------------------------------------------------


def test_criterion_6_nerve_stability(say):
    eps = 0.05
    eta = eps / 50
    c0 = 5 * eta
    X = generate("circle", 240)
    # every sixth sample: an evenly spaced eps/2-net; greedy nets mix 6- and 7-sample gaps
    # whose rounding makes the nerve jump more often than every 2*c0
    centers = list(range(0, 240, 6))
    r = stable_threshold(lambda rad: ball_covering(X.space, centers, rad, eps), 1.5 * eps, 2.5 * eps, c0)
    base = build_nerve(ball_covering(X.space, centers, r, eps))
    equal = 0
    for seed in range(20):
        Y = generate("circle", 240, seed=seed, jitter=eta)
        cov_y = ball_covering(Y.space, centers, r, eps)
        same = nerves_equal(base, build_nerve(cov_y))
        lifted = nerves_equal(base, lift_covering_nerve(ball_covering(X.space, centers, r, eps), Y.space))
        equal += same and lifted
    ok = equal == 20
    say(6, ok, f"stable radius {r:.5g} (c0 = {c0:.3g}), identical nerves on {equal}/20 jitter seeds")
    assert ok


# -- 7: transfer ---------------------------------------------------------------


def test_criterion_7_transfer(say):
    eps = 0.03
    start = time.perf_counter()
    a = generate("circle", 400)
    b = generate("circle", 400, seed=11, jitter=eps / 50)
    run = run_transfer(a, b, eps)
    elapsed = time.perf_counter() - start
    cert = run.certificate
    disp = max(run.forward.displacement, run.backward.displacement)
    # the certificate already checked F(., 0) = F'F and F(., eps) = 1 exactly; recheck the closeness pieces
    fv = np.asarray(run.forward.map.values)
    bv = np.asarray(run.backward.map.values)
    ends = True
    for side, rt, ret in ((run.sides[0], bv[fv], run.F), (run.sides[1], fv[bv], run.G)):
        h = ret.closeness.homotopy
        z = [zeta_point(side.family, th) for th in h.domain]
        ends &= h.values[0] == [int(rt[v]) for v in z] and h.values[-1] == z
        ends &= ret.homotopy.values[0] == rt.tolist() and ret.homotopy.values[-1] == list(range(len(rt)))
    finite = all(math.isfinite(r.lipschitz) for r in cert.reports)
    ok = disp <= 6 * eps and finite and bool(ends) and elapsed < 120
    say(7, ok, f"displacement {disp:.4g} <= 6eps = {6 * eps:.4g}, certificate C = {cert.lipschitz:.4g}, "
        f"defect = {cert.pair.defect:.4g}, exact endpoints: {bool(ends)}, closeness gaps {run.F.closeness.uniform_distance:.4g}/"
        f"{run.G.closeness.uniform_distance:.4g} <= eps, {elapsed:.1f}s < 120s")
    assert ok


# -- 8: negative fixtures ------------------------------------------------------


def test_criterion_8_negative(say):
    results = {}
    try:
        validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    except TriangleViolation as exc:
        results["TriangleViolation"] = exc.witness == (0, 2, 1)

    m = generate("circle", 240)
    K = NerveComplex.from_sets(2, [(0, 1)])
    pts = [RealizationPoint.from_coords((0, 1), row, 0.05) for row in barycentric_grid(2, 4)]
    f0 = lipschitz_extension(K, [30, 30], m, 0.05)
    f1 = lipschitz_extension(K, [30, 54], m, 0.05)
    try:
        homotopy_from_closeness(f0, f1, m, 0.05, pts, 2, f0.hull, f1.hull)
    except TooFar as exc:
        # the vertex v_1 is the grid point farthest apart (2 eps)
        results["TooFar"] = pts[exc.witness] == RealizationPoint.vertex(1, 0.05)

    line = validate_metric(np.abs(np.subtract.outer(np.arange(0, 2.01, 0.25), np.arange(0, 2.01, 0.25))))
    try:
        stable_threshold(lambda r: ball_covering(line, [0, 4, 8], r, 0.1), 0.4, 0.6, 0.2)
    except NoStableRadius as exc:
        results["NoStableRadius"] = exc.witness == (0.4, 0.6, 0.2)

    P = validate_metric(np.abs(np.subtract.outer(np.arange(5.0), np.arange(5.0))))
    ident = DiscreteMap("id", list(range(5)), list(range(5)), sample_metric(P), sample_metric(P))
    times = time_grid(0.1, 4)
    vals = [list(range(5)) for _ in times]
    vals[-1][3] = 4
    F = DiscreteHomotopy("F", list(range(5)), times, vals, sample_metric(P), sample_metric(P))
    G = DiscreteHomotopy("G", list(range(5)), times, [list(range(5)) for _ in times], sample_metric(P), sample_metric(P))
    try:
        lh_certificate(ApproxPair.build(ident, ident), F, G)
    except EndpointMismatch as exc:
        results["EndpointMismatch"] = exc.witness == 3

    names = ("TriangleViolation", "TooFar", "NoStableRadius", "EndpointMismatch")
    ok = all(results.get(k) is True for k in names)
    say(8, ok, ", ".join(f"{k}: {'raised, witness ok' if results.get(k) else 'missing'}" for k in names))
    assert ok
