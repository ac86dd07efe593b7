import numpy as np
import pytest

from nervekit.homotopy.partition import partition_of_unity
from nervekit.homotopy.retraction import retraction_family
from nervekit.metric_core import build_ball_covering, validate_metric
from nervekit.model_spaces import generate
from nervekit.nerve import build_nerve

EPS = 0.05


class CirclePipeline:
    def __init__(self):
        self.model = generate("circle", 240)
        self.X = self.model.space
        self.eps = EPS
        self.cov = build_ball_covering(self.X, EPS)
        self.K = build_nerve(self.cov)
        self.pou = partition_of_unity(self.X, self.cov)
        self.good = retraction_family(self.model, self.cov, self.K, "good")
        self.nested = retraction_family(self.model, self.cov, self.K, "domination")


@pytest.fixture(scope="session")
def circle():
    return CirclePipeline()


def random_metric(rng, n, dim=2):
    pts = rng.normal(size=(n, dim))
    return validate_metric(np.linalg.norm(pts[:, None] - pts[None], axis=2))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
