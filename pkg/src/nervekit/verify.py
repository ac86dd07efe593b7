"""Measured Lipschitz constants and strong-deformation-retraction checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import DegenerateDomain
from .maps import DiscreteHomotopy, DiscreteMap

MAX_PAIRS = 4_000_000
POINT_TOL = 1e-12


@dataclass(frozen=True)
class LipschitzReport:
    map: str
    lipschitz: float
    witness: tuple
    metric: str
    pairs: int
    subsampled: bool

    def to_json(self) -> dict:
        return {
            "map": self.map,
            "lipschitz": self.lipschitz,
            "witness": list(self.witness),
            "metric": self.metric,
            "pairs": self.pairs,
            "subsampled": self.subsampled,
        }


def _max_ratio(dom: np.ndarray, cod: np.ndarray) -> tuple[float, tuple[int, int], int]:
    iu, ju = np.triu_indices(len(dom), 1)
    a, b = dom[iu, ju], cod[iu, ju]
    ok = a > 0
    if not ok.any():
        raise DegenerateDomain("every pair of domain points is at distance zero")
    ratio = np.zeros_like(a)
    ratio[ok] = b[ok] / a[ok]
    k = int(np.argmax(ratio))
    return float(ratio[k]), (int(iu[k]), int(ju[k])), int(ok.sum())


def _subsample(n: int, limit: int, seed: int) -> tuple[np.ndarray, bool]:
    if n * (n - 1) // 2 <= limit:
        return np.arange(n), False
    m = int((1 + np.sqrt(1 + 8 * limit)) // 2)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=m, replace=False)), True


def measured_lipschitz(
    obj: DiscreteMap | DiscreteHomotopy,
    metric: str | None = None,
    max_pairs: int = MAX_PAIRS,
    seed: int = 0,
) -> LipschitzReport:
    """Largest ``d(f a, f b) / d(a, b)`` over sampled pairs with ``d(a, b) > 0``.

    Homotopies are measured on ``domain x times`` with the L1 product
    metric. Witnesses are domain indices for maps and ``(index, time)``
    pairs for homotopies. Above ``max_pairs`` pairs a seeded uniform subset
    of points is used and ``subsampled`` is set.
    """
    if len(obj.domain) < 2 and not isinstance(obj, DiscreteHomotopy):
        raise DegenerateDomain("need at least two domain points")
    if isinstance(obj, DiscreteHomotopy):
        n, m = len(obj.domain), len(obj.times)
        flat = [(i, k) for k in range(m) for i in range(n)]
        pick, sub = _subsample(len(flat), max_pairs, seed)
        chosen = [flat[p] for p in pick]
        di = np.array([c[0] for c in chosen])
        tk = np.array([c[1] for c in chosen])
        base = obj.domain_metric(obj.domain)
        times = obj.times[tk]
        dom = base[np.ix_(di, di)] + np.abs(times[:, None] - times[None, :])
        cod = obj.codomain_metric([obj.values[k][i] for i, k in chosen])
        C, (a, b), pairs = _max_ratio(dom, cod)
        wit = ((int(di[a]), float(times[a])), (int(di[b]), float(times[b])))
        return LipschitzReport(obj.name, C, wit, metric or "L1-product", pairs, sub)
    pick, sub = _subsample(len(obj.domain), max_pairs, seed)
    dom_pts = [obj.domain[p] for p in pick]
    dom = obj.domain_metric(dom_pts)
    cod = obj.codomain_metric([obj.values[p] for p in pick])
    C, (a, b), pairs = _max_ratio(dom, cod)
    return LipschitzReport(obj.name, C, (int(pick[a]), int(pick[b])), metric or "ambient", pairs, sub)


@dataclass
class RetractionCheck:
    ok: bool
    identity_at_start: bool
    lands_in_target: bool
    fixes_target: bool
    violation: dict | None = field(default=None)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "identity_at_start": self.identity_at_start,
            "lands_in_target": self.lands_in_target,
            "fixes_target": self.fixes_target,
            "violation": self.violation,
        }


def _same(metric, a: Any, b: Any) -> bool:
    if a == b:
        return True
    return float(metric([a, b])[0, 1]) <= POINT_TOL


def verify_retraction(h: DiscreteHomotopy, target: Callable[[Any], bool], fixed: bool = True) -> RetractionCheck:
    """Check ``h(x, 0) = x``, ``h(x, end)`` in the target and, if ``fixed``, ``h(a, t) = a`` on the target.

    Points count as equal when their codomain distance is at most 1e-12.
    The first violation found is reported with its index and time.
    """
    cm = h.codomain_metric
    first: dict | None = None

    def note(kind: str, i: int, k: int):
        nonlocal first
        if first is None:
            first = {"condition": kind, "index": i, "time": float(h.times[k])}

    start = True
    for i, (p, v) in enumerate(zip(h.domain, h.values[0])):
        if not _same(cm, p, v):
            start = False
            note("identity_at_start", i, 0)
            break
    land = True
    for i, v in enumerate(h.values[-1]):
        if not target(v):
            land = False
            note("lands_in_target", i, len(h.times) - 1)
            break
    fix = True
    if fixed:
        for i, p in enumerate(h.domain):
            if not target(p):
                continue
            for k in range(len(h.times)):
                if not _same(cm, p, h.values[k][i]):
                    fix = False
                    note("fixes_target", i, k)
                    break
            if not fix:
                break
    return RetractionCheck(start and land and fix, start, land, fix, first)
