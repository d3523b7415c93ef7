"""Command line interface: ``lpvmor <command> ...``.

Exit codes: 0 success, 1 validation or check failure, 2 size-cap refusal,
3 rank-condition failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .bench import ExperimentSpec, example_model, random_signals, run_compare
from .model import (
    DEFAULT_ENUM_CAP,
    EnumerationTooLarge,
    ModelValidationError,
    enumerate_sub_markov,
    simulate,
)
from .oracle import default_cap, hankel_rank, obs_rows, reach_cols
from .reduce import RankConditionError, check_partial_realization, minimize, reduce
from .subspace import is_observable, is_reachable, reach_basis, unobs_cobasis

EXIT_OK, EXIT_FAIL, EXIT_CAP, EXIT_RANK = 0, 1, 2, 3


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    return lo, hi


def _emit(obj, as_json: bool, table: list[tuple[str, object]] | None = None) -> None:
    if as_json or table is None:
        print(json.dumps(obj, indent=1, sort_keys=True))
        return
    width = max(len(k) for k, _ in table)
    for k, v in table:
        if isinstance(v, float):
            v = f"{v:.6f}"
        print(f"{k:<{width}}  {v}")


def cmd_validate(args) -> int:
    model = io.load_model(args.model)
    info = {
        "valid": True,
        "n_x": model.n_x, "n_u": model.n_u, "n_y": model.n_y, "n_p": model.n_p,
        "reachable": is_reachable(model, args.tol),
        "observable": is_observable(model, args.tol),
    }
    _emit(info, args.json, list(info.items()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = io.load_model(args.model)
    spec = ExperimentSpec(N=0, trials=1, horizon=max(args.steps - 1, 1), seed=args.seed,
                          sched_range=args.sched_range)
    u, p = random_signals(spec, 0, model.n_u, model.n_p)
    u, p = u[: args.steps], p[: args.steps]
    x0 = np.array([float(v) for v in args.x0.split(",")]) if args.x0 else None
    traj = simulate(model, u, p, x0=x0)
    doc = {"seed": args.seed, "sched_range": list(args.sched_range),
           "u": traj.u.tolist(), "p": traj.p.tolist(), "y": traj.y.tolist()}
    if args.json:
        print(json.dumps(doc, sort_keys=True))
    else:
        for t in range(len(traj)):
            print(t, " ".join(f"{v:.17g}" for v in traj.y[t]))
    return EXIT_OK


def cmd_markov(args) -> int:
    model = io.load_model(args.model)
    entries = enumerate_sub_markov(model, args.N, cap=args.cap)
    if args.json:
        print(json.dumps([{"q": i.q, "q0": i.q0, "word": list(i.word), "value": M.tolist()}
                          for i, M in entries]))
    else:
        print(f"# {len(entries)} sub-Markov parameters, |s| <= {args.N}")
        for idx, M in entries:
            print(idx, " ".join(f"{v:.17g}" for v in M.ravel()))
    return EXIT_OK


def cmd_reduce(args) -> int:
    model = io.load_model(args.model)
    res = reduce(model, args.N, args.mode, args.tol)
    meta = res.metadata()
    meta["original_order"] = model.n_x
    if args.output:
        io.save_model(res.reduced, args.output)
        Path(str(args.output) + ".meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    _emit(meta, args.json, list(meta.items()))
    return EXIT_OK


def cmd_minimize(args) -> int:
    model = io.load_model(args.model)
    small = minimize(model, args.tol)
    if args.output:
        io.save_model(small, args.output)
    info = {"original_order": model.n_x, "order": small.n_x}
    _emit(info, args.json, list(info.items()))
    return EXIT_OK


def cmd_check(args) -> int:
    m1, m2 = io.load_model(args.m1), io.load_model(args.m2)
    rep = check_partial_realization(m1, m2, args.N, args.tol, method=args.method, cap=args.cap)
    info = {"N": rep.N, "tol": rep.tol, "method": rep.method, "count": rep.count,
            "max_abs": rep.max_abs, "max_rel": rep.max_rel, "passed": rep.passed,
            "worst": rep.worst}
    _emit(info, args.json, list(info.items()))
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_compare(args) -> int:
    model = io.load_model(args.model) if args.model != "example" else example_model()
    spec = ExperimentSpec(N=args.N, mode=args.mode, trials=args.trials, horizon=args.horizon,
                          seed=args.seed, sched_range=args.sched_range, tol=args.tol)
    stats = run_compare(model, spec)
    summary = stats.summary()
    # wall-clock time goes to stderr so the report itself is reproducible
    seconds = summary.pop("reduce_seconds")
    print(f"reduction time: {seconds:.6f} s", file=sys.stderr)
    if args.series:
        k = stats.closest_to_mean()
        u, p = random_signals(spec, k, model.n_u, model.n_p)
        red = reduce(model, spec.N, spec.mode, spec.tol).reduced
        with open(args.series, "w") as fh:
            fh.write(f"# trial {k} bfr {stats.bfr[k]:.6f}\n# t y ybar\n")
            for t, (a, b) in enumerate(zip(simulate(model, u, p).y, simulate(red, u, p).y)):
                fh.write(f"{t} {' '.join(map(repr, a))} {' '.join(map(repr, b))}\n")
    if args.per_trial:
        summary["per_trial_bfr"] = stats.bfr.tolist()
    _emit(summary, args.json, list(summary.items()))
    expected = stats.guarantee + 1
    return EXIT_OK if stats.min_exact_prefix >= min(expected, spec.steps) else EXIT_FAIL


def cmd_hankel_rank(args) -> int:
    model = io.load_model(args.model) if args.model != "example" else example_model()
    cap = args.cap if args.cap is not None else default_cap()
    rows = obs_rows(model.n_y, model.n_p, args.N)
    cols = reach_cols(model.n_u, model.n_p, args.N)
    info = {"N": args.N, "hankel_shape": [rows, cols],
            "obs_shape": [rows, model.n_x], "reach_shape": [model.n_x, cols], "cap": cap}
    try:
        info["rank"] = hankel_rank(model, args.N, args.tol, cap)
    except EnumerationTooLarge as exc:
        info["refused"] = str(exc)
        _emit(info, args.json, list(info.items()))
        return EXIT_CAP
    _emit(info, args.json, list(info.items()))
    return EXIT_OK


def cmd_basis(args) -> int:
    model = io.load_model(args.model)
    fn = reach_basis if args.kind == "reach" else unobs_cobasis
    b = fn(model, args.N, args.tol)
    print(f"# {b.kind} N={b.N} r={b.r}")
    if b.matrix.size:
        print(io.format_matrix(b.matrix))
    return EXIT_OK


def cmd_example(args) -> int:
    text = io.dumps_model(example_model())
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpvmor", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = add("validate", cmd_validate, "check a model file")
    p.add_argument("model")
    p.add_argument("--tol", type=float, default=0.0)

    p = add("simulate", cmd_simulate, "simulate with seeded random signals")
    p.add_argument("model")
    p.add_argument("--steps", type=int, default=51)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--x0", help="comma separated initial state")
    p.add_argument("--sched-range", type=_range, default=(-1.0, 1.0))

    p = add("markov", cmd_markov, "dump sub-Markov parameters up to length N")
    p.add_argument("model")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)

    p = add("reduce", cmd_reduce, "moment-matching reduction")
    p.add_argument("model")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--mode", choices=["R", "O", "T"], default="R")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("-o", "--output")

    p = add("minimize", cmd_minimize, "reachability then observability reduction")
    p.add_argument("model")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("-o", "--output")

    p = add("check", cmd_check, "compare sub-Markov parameters of two models")
    p.add_argument("m1")
    p.add_argument("m2")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--method", choices=["auto", "enumerate", "subspace"], default="auto")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)

    p = add("compare", cmd_compare, "best-fit-rate experiment ('example' = built-in model)")
    p.add_argument("model")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--mode", choices=["R", "O", "T"], default="R")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--horizon", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sched-range", type=_range, default=(-1.0, 1.0))
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--per-trial", action="store_true", help="include every trial's BFR")
    p.add_argument("--series", help="write y and ybar of the trial closest to the mean")

    p = add("hankel-rank", cmd_hankel_rank, "explicit Hankel rank ('example' = built-in model)")
    p.add_argument("model")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--cap", type=int, default=None,
                   help="entry limit (default 1e6 or $LPVMOR_HANKEL_CAP)")

    p = add("basis", cmd_basis, "print a reachability basis or observability cobasis")
    p.add_argument("model")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--kind", choices=["reach", "obs"], default="reach")
    p.add_argument("--tol", type=float, default=0.0)

    p = add("example", cmd_example, "write the built-in 7-state example model")
    p.add_argument("-o", "--output")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except EnumerationTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except RankConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
