"""``nervekit`` command line.

Exit status is 0 on success, 1 when a contract fails (the witness is
printed to stderr) and 2 on usage or input/output errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import nullcontext
from typing import Sequence

from . import jsonio
from .errors import NervekitError
from .gromov_hausdorff import DEFAULT_CAP, gh_exact_small
from .metric_core import (
    Covering,
    FiniteMetricSpace,
    ball_containment_witness,
    build_ball_covering,
    max_overlap,
)
from .model_spaces import KINDS, ModelSpace, generate
from .nerve import build_nerve
from .pipeline import all_checks_pass, run_pipeline


class UsageError(Exception):
    pass


def load_space(path: str) -> tuple[FiniteMetricSpace, ModelSpace | None]:
    try:
        obj = jsonio.read_json(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not isinstance(obj, dict) or "dist" not in obj:
        raise UsageError(f"{path} is not a space file (missing 'dist')")
    space = FiniteMetricSpace.from_json(obj)
    model = ModelSpace.from_json(obj["model"], space=space) if "model" in obj else None
    return space, model


def _emit(obj, path: str | None) -> None:
    if path:
        try:
            jsonio.write_json(obj, path)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from exc
    else:
        sys.stdout.write(jsonio.dumps(obj))


def cmd_gen(a) -> int:
    params = {k: v for k, v in (("R", a.R), ("a", a.a), ("b", a.b), ("length", a.length)) if v is not None}
    m = generate(a.kind, a.n, seed=a.seed, jitter=a.jitter, **params)
    out = m.space.to_json()
    out["model"] = m.to_json()
    _emit(out, a.out)
    return 0


def cmd_cover(a) -> int:
    X, _ = load_space(a.space)
    cov = build_ball_covering(X, a.epsilon, a.seed)
    _emit(cov.to_json(), a.out)
    return 0


def _covering(a, X) -> Covering:
    if getattr(a, "covering", None):
        try:
            obj = jsonio.read_json(a.covering)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read {a.covering}: {exc}") from exc
        return Covering.from_json(X, obj)
    if a.epsilon is None:
        raise UsageError("give --epsilon or --covering")
    return build_ball_covering(X, a.epsilon, a.seed)


def cmd_nerve(a) -> int:
    X, _ = load_space(a.space)
    K = build_nerve(_covering(a, X), a.max_dim)
    _emit(K.to_json(), a.out)
    return 0


def cmd_pipeline(a) -> int:
    X, model = load_space(a.space)
    report = run_pipeline(model if model is not None else X, a.epsilon, a.seed, a.mode)
    report["passed"] = all_checks_pass(report)
    report.pop("runtime_seconds", None)
    _emit(report, a.report)
    if not report["passed"]:
        print("pipeline contract failed; see report flags", file=sys.stderr)
        return 1
    return 0


def cmd_gh(a) -> int:
    X, _ = load_space(a.a)
    Y, _ = load_space(a.b)
    dis, approx = gh_exact_small(X, Y, a.cap)
    _emit({"distortion_gh": dis, "approx_gh": approx}, a.out)
    return 0


def cmd_transfer(a) -> int:
    from .transfer import run_transfer

    _, mx = load_space(a.a)
    _, my = load_space(a.b)
    if mx is None or my is None:
        raise UsageError("transfer needs model space files (written by 'nervekit gen')")
    run = run_transfer(mx, my, a.epsilon, mode=a.mode, within=a.within)
    report = {
        "epsilon": a.epsilon,
        "mode": a.mode,
        "forward_displacement": run.forward.displacement,
        "forward_displacement_witness": run.forward.displacement_witness,
        "backward_displacement": run.backward.displacement,
        "backward_displacement_witness": run.backward.displacement_witness,
        "closeness_uniform_distance": [run.F.closeness.uniform_distance, run.G.closeness.uniform_distance],
        "certificate": run.certificate.to_json(),
    }
    _emit(report, a.report)
    return 0


def cmd_verify(a) -> int:
    X, model = load_space(a.space)
    out: dict = {"n_samples": len(X), "metric_valid": True, "diameter": X.diameter}
    ok = True
    if a.covering or a.epsilon is not None:
        cov = _covering(a, X)
        w = ball_containment_witness(cov)
        out["covering"] = {
            "covers": cov.covers(),
            "ball_containment_witness": w,
            "max_overlap": max_overlap(cov),
        }
        ok = cov.covers() and w is None
    if model is not None:
        out["model"] = {"kind": model.kind, "convexity_radius": model.convexity_radius, "spacing": model.spacing}
    out["passed"] = ok
    _emit(out, a.out)
    if not ok:
        print(f"covering contract failed at sample {out['covering']['ball_containment_witness']}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nervekit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a model space sample")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--jitter", type=float, default=0.0)
    g.add_argument("--R", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--length", type=float)
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gen)

    c = sub.add_parser("cover", help="ball covering at scale epsilon")
    c.add_argument("--space", required=True)
    c.add_argument("--epsilon", type=float, required=True)
    c.add_argument("--seed", type=int)
    c.add_argument("--out")
    c.set_defaults(fn=cmd_cover)

    n = sub.add_parser("nerve", help="nerve of a covering")
    n.add_argument("--space", required=True)
    n.add_argument("--epsilon", type=float)
    n.add_argument("--covering")
    n.add_argument("--seed", type=int)
    n.add_argument("--max-dim", type=int, dest="max_dim")
    n.add_argument("--out")
    n.set_defaults(fn=cmd_nerve)

    pl = sub.add_parser("pipeline", help="covering, nerve, Theta, zeta and verification")
    pl.add_argument("--space", required=True)
    pl.add_argument("--epsilon", type=float, required=True)
    pl.add_argument("--seed", type=int)
    pl.add_argument("--mode", choices=("good", "domination"), default="good")
    pl.add_argument("--report")
    pl.set_defaults(fn=cmd_pipeline)

    gh = sub.add_parser("gh", help="exact Gromov-Hausdorff values for tiny spaces")
    gh.add_argument("--a", required=True)
    gh.add_argument("--b", required=True)
    gh.add_argument("--cap", type=int, default=DEFAULT_CAP)
    gh.add_argument("--out")
    gh.set_defaults(fn=cmd_gh)

    t = sub.add_parser("transfer", help="transfer maps and homotopy certificate between two model samples")
    t.add_argument("--a", required=True)
    t.add_argument("--b", required=True)
    t.add_argument("--epsilon", type=float, required=True)
    t.add_argument("--mode", choices=("good", "domination"), default="domination")
    t.add_argument("--within", type=float)
    t.add_argument("--report")
    t.set_defaults(fn=cmd_transfer)

    v = sub.add_parser("verify", help="validate a space and optionally a covering")
    v.add_argument("--space", required=True)
    v.add_argument("--epsilon", type=float)
    v.add_argument("--covering")
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    v.set_defaults(fn=cmd_verify)
    return p


def _thread_limit():
    value = os.environ.get("NERVEKIT_THREADS")
    if not value:
        return nullcontext()
    try:
        limit = int(value)
    except ValueError:
        raise UsageError(f"NERVEKIT_THREADS must be an integer, got {value!r}") from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=limit)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    for name in ("epsilon",):
        val = getattr(args, name, None)
        if val is not None and val <= 0:
            print(f"nervekit: --{name} must be positive", file=sys.stderr)
            return 2
    try:
        with _thread_limit():
            return args.fn(args)
    except UsageError as exc:
        print(f"nervekit: {exc}", file=sys.stderr)
        return 2
    except NervekitError as exc:
        print(f"nervekit: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(f"witness: {exc.witness!r}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
