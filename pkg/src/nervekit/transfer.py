"""Transfer maps between close spaces and their homotopy certificate.

Given model spaces ``X`` and ``Y`` with a reference approximation
``X -> Y`` (index matching for twins), the transfer ``F = f~ o Theta_X``
sends ``v_j`` to the image of the center ``p_j`` and extends over the nerve
of ``X``. With ``F'`` built the same way in the other direction, the
homotopy ``F' F ~ 1_X`` is the concatenation of three pieces on
``[0, eps]``:

1. ``F' F`` applied to the domination homotopy ``D`` (from ``F' F`` to ``F' F zeta Theta``);
2. the closeness homotopy on the nerve between ``F' F zeta`` and ``zeta``, read at ``Theta(x)``;
3. ``D`` run backwards (from ``zeta Theta`` to the identity).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gromov_hausdorff import ApproxPair, LHCertificate, lh_certificate
from .homotopy.extension import ClosenessHomotopy, TransferResult, homotopy_from_closeness, transfer_map
from .homotopy.partition import PartitionOfUnity, partition_of_unity
from .homotopy.retraction import RetractionFamily, domination_value, retraction_family, zeta_point
from .maps import DiscreteHomotopy, time_grid
from .metric_core import Covering, build_ball_covering
from .model_spaces import ModelSpace
from .nerve import NerveComplex, build_nerve

PIECE_STEPS = 6


@dataclass
class Side:
    model: ModelSpace
    cov: Covering
    K: NerveComplex
    pou: PartitionOfUnity
    family: RetractionFamily

    @property
    def thetas(self):
        return [self.pou.theta(x) for x in range(len(self.model))]


def build_side(model: ModelSpace, eps: float, mode: str = "domination", seed: int | None = None) -> Side:
    cov = build_ball_covering(model.space, eps, seed)
    K = build_nerve(cov)
    pou = partition_of_unity(model.space, cov)
    return Side(model, cov, K, pou, retraction_family(model, cov, K, mode))


@dataclass
class ReturnHomotopy:
    homotopy: DiscreteHomotopy
    closeness: ClosenessHomotopy


def return_homotopy(side: Side, roundtrip: Sequence[int], within: float | None = None) -> ReturnHomotopy:
    """Homotopy from ``roundtrip`` (a self-map of the sample) to the identity over ``[0, eps]``."""
    eps = side.cov.scale
    fam = side.family
    rt = np.asarray(roundtrip, dtype=int)
    n = len(side.model)
    thetas = side.thetas

    def hull_zeta(sigma):
        return np.unique(np.concatenate([fam.domain((j,)) for j in sigma]))

    def hull_rt(sigma):
        return np.unique(rt[hull_zeta(sigma)])

    zcache: dict = {}

    def zeta(theta):
        z = zcache.get(theta)
        if z is None:
            z = zcache[theta] = zeta_point(fam, theta)
        return z

    uniq = list(dict.fromkeys(thetas))
    close = homotopy_from_closeness(
        lambda th: int(rt[zeta(th)]),
        zeta,
        side.model,
        eps,
        uniq,
        len(side.cov),
        hull_rt,
        hull_zeta,
        within=within,
        steps=PIECE_STEPS,
    )
    where = {th: i for i, th in enumerate(uniq)}
    times = time_grid(eps, 3 * PIECE_STEPS)
    local = time_grid(eps, PIECE_STEPS)
    values = []
    for k in range(len(times)):
        piece, j = divmod(k, PIECE_STEPS)
        if piece == 3:
            piece, j = 2, PIECE_STEPS
        s = float(local[j])
        if piece == 0:
            row = [int(rt[domination_value(fam, side.pou, x, s)]) for x in range(n)]
        elif piece == 1:
            row = [close.homotopy.values[j][where[thetas[x]]] for x in range(n)]
        else:
            row = [domination_value(fam, side.pou, x, float(local[PIECE_STEPS - j])) for x in range(n)]
        values.append(row)
    m = side.model.metric()
    h = DiscreteHomotopy("return", list(range(n)), times, values, m, m)
    return ReturnHomotopy(h, close)


@dataclass
class TransferRun:
    forward: TransferResult
    backward: TransferResult
    pair: ApproxPair
    F: ReturnHomotopy
    G: ReturnHomotopy
    certificate: LHCertificate
    sides: tuple[Side, Side]


def run_transfer(
    model_x: ModelSpace,
    model_y: ModelSpace,
    eps: float,
    reference_xy: Sequence[int] | None = None,
    reference_yx: Sequence[int] | None = None,
    mode: str = "domination",
    within: float | None = None,
) -> TransferRun:
    """Transfer maps both ways, their return homotopies, and the certificate."""
    if reference_xy is None or reference_yx is None:
        if len(model_x) != len(model_y):
            raise ValueError("index matching needs equally sized samples")
        ident = list(range(len(model_x)))
        reference_xy = ident if reference_xy is None else reference_xy
        reference_yx = ident if reference_yx is None else reference_yx
    sx = build_side(model_x, eps, mode)
    sy = build_side(model_y, eps, mode)
    fwd = transfer_map(sx.cov, sx.thetas, reference_xy, model_y)
    bwd = transfer_map(sy.cov, sy.thetas, reference_yx, model_x)
    fv = np.asarray(fwd.map.values, dtype=int)
    bv = np.asarray(bwd.map.values, dtype=int)
    hx = return_homotopy(sx, bv[fv], within)
    hy = return_homotopy(sy, fv[bv], within)
    pair = ApproxPair.build(fwd.map, bwd.map)
    cert = lh_certificate(pair, hx.homotopy, hy.homotopy)
    return TransferRun(fwd, bwd, pair, hx, hy, cert, (sx, sy))
