import math

import numpy as np
import pytest

from nervekit.errors import NoContainingBall, TooFar
from nervekit.homotopy.extension import (
    extension_map,
    homotopy_from_closeness,
    lipschitz_extension,
    prism_point,
    transfer_map,
)
from nervekit.homotopy.partition import partition_of_unity
from nervekit.metric_core import build_ball_covering
from nervekit.model_spaces import generate
from nervekit.nerve import NerveComplex
from nervekit.realization import RealizationPoint, barycentric_grid
from nervekit.transfer import build_side
from nervekit.verify import measured_lipschitz

EPS = 0.05


def _grid_points(sigma, order, eps=EPS):
    return [RealizationPoint.from_coords(sigma, row, eps) for row in barycentric_grid(len(sigma), order)]


def test_extension_equals_map_on_L():
    m = generate("circle", 120)
    K = NerveComplex.from_sets(2, [(0, 1)])

    def f(theta):
        return int(round(10 + 5 * theta.as_dict().get(1, 0.0)))

    ext = lipschitz_extension(K, [10, 15], m, EPS, L=K, on_L=f, hull_L=lambda s: np.arange(10, 16))
    for p in _grid_points((0, 1), 10):
        assert ext(p) == f(p)


def test_constant_edge_extends_constant():
    m = generate("circle", 120)
    K = NerveComplex.from_sets(2, [(0, 1)])
    ext = lipschitz_extension(K, [7, 7], m, EPS)
    assert {ext(p) for p in _grid_points((0, 1), 12)} == {7}


def test_sphere_two_simplex():
    m = generate("sphere", 400)
    near = np.argsort(m.dist[0])[:3]
    K = NerveComplex.from_sets(3, [(0, 1, 2)])
    ext = lipschitz_extension(K, near.tolist(), m, 0.2)
    for j in range(3):
        assert ext(RealizationPoint.vertex(j, 0.2)) == near[j]
    rep = measured_lipschitz(extension_map(ext, _grid_points((0, 1, 2), 6, 0.2)))
    assert math.isfinite(rep.lipschitz)
    # every value lies in the ball chosen for the 2-simplex
    members = set(ext.contraction((0, 1, 2)).members.tolist())
    assert all(v in members for v in extension_map(ext, _grid_points((0, 1, 2), 6, 0.2)).values)


def test_spread_boundary_has_no_containing_ball():
    m = generate("circle", 120)
    K = NerveComplex.from_sets(3, [(0, 1, 2)])
    with pytest.raises(NoContainingBall):
        lipschitz_extension(K, [0, 40, 80], m, EPS)(RealizationPoint.barycenter((0, 1, 2), EPS))


@pytest.mark.parametrize("tau", [0.0, 0.1, 0.37, 0.5, 0.9, 1.0])
def test_prism_point_staircase(tau):
    theta = RealizationPoint.from_weights({2: 0.2, 5: 0.3, 7: 0.5}, EPS)
    N = 10
    p = prism_point(theta, tau, N)
    w = p.as_dict()
    assert math.isclose(sum(w.values()), 1.0, abs_tol=1e-12)
    # projection to |K| recovers theta; the top copy carries total weight tau
    for v, lam in theta.weights:
        assert w.get(v, 0.0) + w.get(N + v, 0.0) == pytest.approx(lam, abs=1e-15)
    assert sum(x for j, x in w.items() if j >= N) == pytest.approx(tau, abs=1e-15)
    # support is a staircase simplex {a_0..a_i, b_i..b_k}
    verts = theta.support
    bottoms = [k for k, v in enumerate(verts) if v in w]
    tops = [k for k, v in enumerate(verts) if N + v in w]
    assert not bottoms or not tops or max(bottoms) <= min(tops)


def test_prism_point_ends():
    theta = RealizationPoint.from_weights({0: 0.25, 1: 0.75}, EPS)
    assert prism_point(theta, 0.0, 4) == theta
    assert prism_point(theta, 1.0, 4).as_dict() == {4: 0.25, 5: 0.75}


def _edge_setup():
    m = generate("circle", 240)
    K = NerveComplex.from_sets(2, [(0, 1)])
    pts = _grid_points((0, 1), 8)
    return m, K, pts


def test_closeness_equal_maps():
    m, K, pts = _edge_setup()
    f = lipschitz_extension(K, [30, 33], m, EPS)
    hull = lambda s: f.hull(s)  # noqa: E731
    ch = homotopy_from_closeness(f, f, m, EPS, pts, 2, hull, hull)
    h = ch.homotopy
    assert ch.uniform_distance == 0.0
    assert h.values[0] == [f(p) for p in pts] and h.values[-1] == [f(p) for p in pts]
    ball = set(np.flatnonzero(m.dist[30] < m.dist[30, 33] + 1e-9).tolist()) | set(
        np.flatnonzero(m.dist[33] < m.dist[30, 33] + 1e-9).tolist()
    )
    assert all(v in ball for row in h.values for v in row)


def test_closeness_one_vertex_moved():
    m, K, pts = _edge_setup()
    f0 = lipschitz_extension(K, [30, 33], m, EPS)
    f1 = lipschitz_extension(K, [30, 36], m, EPS)
    assert m.dist[33, 36] < EPS
    ch = homotopy_from_closeness(f0, f1, m, EPS, pts, 2, f0.hull, f1.hull)
    h = ch.homotopy
    assert h.values[0] == [f0(p) for p in pts] and h.values[-1] == [f1(p) for p in pts]
    assert all(29 <= v <= 37 for row in h.values for v in row)


def test_closeness_too_far_reports_worst_point():
    m, K, pts = _edge_setup()
    f0 = lipschitz_extension(K, [30, 30], m, EPS)
    f1 = lipschitz_extension(K, [54, 54], m, EPS)  # 24 samples = 2 eps away
    with pytest.raises(TooFar) as exc:
        homotopy_from_closeness(f0, f1, m, EPS, pts, 2, f0.hull, f1.hull)
    assert exc.value.witness == 0


def test_transfer_identity_reference(circle):
    side = build_side(circle.model, EPS, mode="good")
    res = transfer_map(side.cov, side.thetas, list(range(240)), circle.model)
    assert res.vertex_targets == list(side.cov.centers)
    assert res.displacement <= 4 * EPS
    members = side.cov.members
    assert all((members[x] & members[v]).any() for x, v in enumerate(res.map.values))


def test_transfer_discrete_covering_is_the_matching():
    # every element a singleton: the nerve is discrete and F equals the reference on centers
    m = generate("circle", 12)
    cov = build_ball_covering(m.space, 0.01)
    pou = partition_of_unity(m.space, cov)
    ref = [(i + 1) % 12 for i in range(12)]
    res = transfer_map(cov, [pou.theta(x) for x in range(12)], ref, m)
    assert res.map.values == ref and res.displacement == 0.0
