"""Nerve-homotopy machinery on finite metric spaces.

The main entry points are re-exported here; see the submodules for the
full toolkit.
"""

from .errors import NervekitError
from .gromov_hausdorff import ApproxPair, LHCertificate, approximation_defect, gh_exact_small, lh_certificate
from .maps import DiscreteHomotopy, DiscreteMap
from .metric_core import (
    Covering,
    FiniteMetricSpace,
    build_ball_covering,
    dist_to_complement,
    doubling_constant,
    maximal_discrete_set,
    validate_metric,
)
from .model_spaces import ModelSpace, ball_contraction, generate
from .nerve import NerveComplex, build_nerve, nerves_equal, stable_threshold
from .realization import RealizationPoint, ambient_distance, length_distance, radial_projection
from .verify import LipschitzReport, measured_lipschitz, verify_retraction

__version__ = "0.1.0"
