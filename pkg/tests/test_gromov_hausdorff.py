import itertools

import numpy as np
import pytest

from nervekit.errors import DomainMismatch, EndpointMismatch, TimeMismatch, TooLarge
from nervekit.gromov_hausdorff import (
    ApproxPair,
    approximation_defect,
    correspondence_distortion_gh,
    gh_exact_small,
    lh_certificate,
)
from nervekit.maps import DiscreteHomotopy, DiscreteMap, sample_metric, time_grid
from nervekit.metric_core import validate_metric
from nervekit.model_spaces import generate

from .conftest import random_metric


def _pair(a, b):
    return validate_metric([[0, a], [a, 0]]), validate_metric([[0, b], [b, 0]])


def _map(name, X, Y, values):
    return DiscreteMap(name, list(range(len(X))), list(values), sample_metric(X), sample_metric(Y))


def test_two_point_example():
    X, Y = _pair(1.0, 3.0)
    assert gh_exact_small(X, Y) == (1.0, 2.0)
    assert correspondence_distortion_gh(X, Y) == 1.0
    assert approximation_defect(_map("f", X, Y, [0, 1]), _map("g", Y, X, [1, 0])) == 2.0


def test_one_point_vs_two_point():
    X = validate_metric([[0]])
    Y = validate_metric([[0, 2], [2, 0]])
    assert gh_exact_small(X, Y)[0] == 1.0
    assert correspondence_distortion_gh(X, Y) == 1.0


def test_self_distance_zero():
    X = random_metric(np.random.default_rng(3), 4)
    assert gh_exact_small(X, X) == (0.0, 0.0)
    ident = _map("id", X, X, range(4))
    assert approximation_defect(ident, ident) == 0.0


def test_random_pairs_sandwich_and_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(40):
        X = random_metric(rng, int(rng.integers(1, 5)))
        Y = random_metric(rng, int(rng.integers(1, 5)))
        dis, approx = gh_exact_small(X, Y)
        assert dis <= approx + 1e-12 and approx <= 2 * dis + 1e-12
        if len(X) * len(Y) <= 9:
            assert dis == pytest.approx(correspondence_distortion_gh(X, Y), abs=1e-12)


def test_approx_gh_matches_brute_force_maps():
    rng = np.random.default_rng(7)
    X, Y = random_metric(rng, 3), random_metric(rng, 3)
    best_f = min(
        max(approximation_defect(_map("f", X, Y, f), _map("g", Y, X, g)), 0)
        for f in itertools.product(range(3), repeat=3)
        for g in itertools.product(range(3), repeat=3)
    )
    assert gh_exact_small(X, Y)[1] == pytest.approx(best_f, abs=1e-12)


def test_jittered_index_matching_defect():
    eta = 0.001
    a = generate("circle", 100)
    b = generate("circle", 100, seed=1, jitter=eta)
    ident = list(range(100))
    pair = ApproxPair.build(_map("f", a.space, b.space, ident), _map("g", b.space, a.space, ident))
    assert pair.defect <= 2 * eta


def test_cap_and_enumeration_guard():
    X = random_metric(np.random.default_rng(1), 6)
    with pytest.raises(TooLarge):
        gh_exact_small(X, X)
    Z = random_metric(np.random.default_rng(1), 9)
    # 9^9 maps exceed the enumeration limit even when the cap allows the size
    with pytest.raises(TooLarge):
        gh_exact_small(Z, Z, cap=12)


def test_domain_mismatch():
    X, Y = _pair(1.0, 3.0)
    with pytest.raises(DomainMismatch):
        approximation_defect(_map("f", X, Y, [0, 5]), _map("g", Y, X, [0, 1]))


def _identity_certificate_parts(X, eps=0.1):
    f = _map("f", X, X, range(len(X)))
    times = time_grid(eps, 4)
    vals = [list(range(len(X))) for _ in times]
    H = DiscreteHomotopy("F", list(range(len(X))), times, vals, sample_metric(X), sample_metric(X))
    return ApproxPair.build(f, f), H


def test_identity_certificate():
    X = random_metric(np.random.default_rng(5), 5)
    pair, H = _identity_certificate_parts(X)
    cert = lh_certificate(pair, H, H)
    assert cert.lipschitz == pytest.approx(1.0, abs=1e-12)
    assert cert.time_span == pytest.approx(0.1) and cert.bound == pytest.approx(0.1)


def test_endpoint_mismatch_names_the_sample():
    X = validate_metric(np.abs(np.subtract.outer(np.arange(5.0), np.arange(5.0))))
    pair, H = _identity_certificate_parts(X)
    bad = [row[:] for row in H.values]
    bad[-1][3] = 4
    F = DiscreteHomotopy("F", H.domain, H.times, bad, H.domain_metric, H.codomain_metric)
    with pytest.raises(EndpointMismatch) as exc:
        lh_certificate(pair, F, H)
    assert exc.value.witness == 3


def test_time_mismatch():
    X = random_metric(np.random.default_rng(5), 3)
    pair, H = _identity_certificate_parts(X, 0.1)
    _, H2 = _identity_certificate_parts(X, 0.2)
    with pytest.raises(TimeMismatch):
        lh_certificate(pair, H, H2)
