import math

import numpy as np
import pytest

from nervekit.errors import BadContraction, NotConvex, UnsupportedKind
from nervekit.maps import DiscreteHomotopy
from nervekit.metric_core import validate_metric
from nervekit.model_spaces import ModelSpace, ball_contraction, contraction_oracle, generate
from nervekit.verify import measured_lipschitz, verify_retraction


def test_circle_four_points():
    m = generate("circle", 4)
    assert len(m) == 4
    assert m.dist[0, 1] == pytest.approx(0.25, abs=1e-15)
    assert m.dist[0, 2] == pytest.approx(0.5, abs=1e-15)


def test_interval_two_points():
    m = generate("interval", 2)
    assert m.dist[0, 1] == 1.0


def test_sphere_matches_central_angle():
    m = generate("sphere", 100)
    validate_metric(m.dist)
    P = m.coords
    ang = np.arccos(np.clip(P @ P.T, -1, 1))
    # arccos loses precision near zero angles
    assert np.abs(m.dist - ang).max() < 1e-7


def test_torus_matches_flat_formula():
    m = generate("flat_torus", 36, a=1.0, b=2.0)
    P = m.coords
    diff = np.abs(P[:, None] - P[None])
    diff = np.minimum(diff, np.array([1.0, 2.0]) - diff)
    assert np.abs(m.dist - np.linalg.norm(diff, axis=2)).max() < 1e-9


def test_jittered_circle_stays_close():
    a = generate("circle", 100)
    b = generate("circle", 100, seed=3, jitter=0.001)
    assert np.abs(a.dist - b.dist).max() <= 0.002 + 1e-12


def test_unsupported_kind():
    with pytest.raises(UnsupportedKind):
        generate("hyperbolic_plane", 10)


def test_model_json_round_trip():
    m = generate("flat_torus", 16)
    back = ModelSpace.from_json(m.to_json())
    assert back.kind == m.kind and np.allclose(back.dist, m.dist)


@pytest.mark.parametrize("kind", ["circle", "sphere", "flat_torus", "interval"])
def test_geodesic_endpoints_exact(kind):
    m = generate(kind, 36)
    for x, y in [(0, 5), (3, 17), (10, 10)]:
        assert m.geodesic(x, y, 0.0) == x
        assert m.geodesic(x, y, 1.0) == y


def test_circle_geodesic_midpoint():
    m = generate("circle", 24)
    assert m.geodesic(0, 4, 0.5) == 2
    assert m.geodesic(22, 2, 0.5) == 0


def _arc(m, c, r):
    return np.flatnonzero(m.dist[c] < r)


def test_contraction_identities():
    m = generate("circle", 240)
    eps = 0.05
    U = _arc(m, 50, 0.1)
    phi = contraction_oracle(m, U, eps, center=50)
    for x in U:
        assert phi(int(x), 0.0) == x
        assert phi(int(x), eps / 10) == 50
        assert phi(int(x), eps) == 50
    assert all(phi(50, t) == 50 for t in np.linspace(0, eps, 11))
    assert phi(None, eps / 10) == 50
    with pytest.raises(BadContraction):
        phi(None, eps / 20)


def test_contraction_path_monotone_along_arc():
    m = generate("circle", 240)
    eps = 0.05
    U = _arc(m, 50, 0.1)
    phi = contraction_oracle(m, U, eps, center=50)
    x = int(U.min())
    times = np.linspace(0, eps, 200)
    pts = [phi(x, t) for t in times]
    assert pts[-1] == 50
    # analytic parametrization: position moves monotonically from x to the center
    pos = [(p - x) % 240 for p in pts]
    assert all(a <= b for a, b in zip(pos, pos[1:]))
    assert all(p in set(U.tolist()) for p in pts)


def test_contraction_distance_to_center_nonincreasing():
    m = generate("sphere", 400)
    U = np.flatnonzero(m.dist[7] < 0.5)
    phi = contraction_oracle(m, U, 0.25)
    for x in U:
        d = [m.dist[phi(int(x), t), phi.center] for t in np.linspace(0, 0.25, 40)]
        assert all(a >= b for a, b in zip(d, d[1:]))


def test_contraction_rejects_nonconvex():
    m = generate("circle", 100)
    with pytest.raises(NotConvex):
        contraction_oracle(m, np.arange(100), 0.05, center=0)


def test_contraction_center_must_be_member():
    m = generate("circle", 100)
    with pytest.raises(BadContraction):
        contraction_oracle(m, [1, 2, 3], 0.05, center=50)


def test_ball_contraction_is_strong_deformation_retraction():
    m = generate("circle", 240)
    U = _arc(m, 0, 0.05)
    h = ball_contraction(m, U, 0.05, center=0)
    assert isinstance(h, DiscreteHomotopy)
    res = verify_retraction(h, lambda p: p == 0)
    assert res.ok


def test_contraction_lipschitz_on_circle_arcs():
    m = generate("circle", 240)
    eps = 0.05
    # arcs of radius eps: travel speed is 10 R / eps = 10
    for c in (0, 77, 160):
        h = ball_contraction(m, _arc(m, c, eps), eps, center=c)
        assert measured_lipschitz(h).lipschitz <= 12
    # arcs of radius 2 eps: speed doubles, bound 10 R / eps + 1
    h = ball_contraction(m, _arc(m, 10, 2 * eps), eps, center=10)
    C = measured_lipschitz(h).lipschitz
    assert math.isfinite(C) and C <= 10 * 0.1 / eps + 1 + 1e-9
