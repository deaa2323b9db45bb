"""Command-line front end: ``pagingroe <command> [flags]``.

Commands: generate, simulate, roe, bounds, sweep, demo, fit.  Every
randomised command needs an explicit ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds, fitkit, sim
from .dist import (
    PageDistribution,
    explicit,
    loads_descriptor,
    multicore_power_law,
    power_law,
    read_sequence,
    sample_sequence,
    uniform,
    write_sequence,
)
from .policy import parse_policy, run_policy


class UsageError(Exception):
    pass


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def add_dist_flags(p):
    g = p.add_argument_group("distribution")
    g.add_argument("--dist", choices=["powerlaw", "multicore", "uniform", "explicit"], default="powerlaw")
    g.add_argument("--alpha", type=float, default=1.0)
    g.add_argument("--kappa", type=float, default=None)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--probs", default=None, help="comma-separated sorted probabilities (explicit)")
    g.add_argument("--dist-file", default=None, help="JSON distribution descriptor")


def build_dist(args) -> PageDistribution:
    if args.dist_file:
        return loads_descriptor(Path(args.dist_file).read_text())
    if args.dist == "explicit":
        if not args.probs:
            raise UsageError("--dist explicit needs --probs")
        return explicit(_floats(args.probs))
    if args.m is None:
        raise UsageError("--m is required")
    if args.dist == "uniform":
        return uniform(args.m)
    if args.dist == "multicore" or args.kappa is not None:
        return multicore_power_law(args.alpha, args.m, args.kappa if args.kappa is not None else 1.0)
    return power_law(args.alpha, args.m)


def _require_seed(args):
    if args.seed is None:
        raise UsageError("--seed is required for randomised commands")


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format")}


def _clean(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def emit_rows(rows, columns, args):
    """Write dict rows as CSV or JSON lines to ``--out`` or stdout."""
    fh = open(args.out, "w", newline="") if getattr(args, "out", None) else sys.stdout
    try:
        if args.format == "jsonl":
            for r in rows:
                fh.write(json.dumps({c: _clean(r.get(c)) for c in columns}) + "\n")
        elif args.format == "dat":
            if len(columns) != 2:
                raise UsageError("dat output needs exactly two columns")
            for r in rows:
                fh.write(f"{_clean(r[columns[0]])} {_clean(r[columns[1]])}\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_csv_cell(r.get(c)) for c in columns])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _csv_cell(v):
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def _policies(args):
    names = [p.strip() for p in args.policies.split(",") if p.strip()]
    for p in names:
        try:
            if p != "marker":
                parse_policy(p)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return names


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args):
    _require_seed(args)
    dist = build_dist(args)
    seq = sample_sequence(dist, args.n, args.seed)
    header = dict(_config(args), dist_descriptor=dist.descriptor())
    if args.out:
        write_sequence(seq, args.out, header)
    else:
        sys.stdout.write("# " + json.dumps(header, sort_keys=True) + "\n")
        sys.stdout.write("\n".join(map(str, seq.pages.tolist())) + "\n")
    return 0


def cmd_simulate(args):
    if args.trace:
        seq = read_sequence(args.trace)
        dist = build_dist(args) if args.m or args.dist_file or args.probs else None
    else:
        _require_seed(args)
        dist = build_dist(args)
        seq = sample_sequence(dist, args.n, args.seed)
    rows = []
    for p in _policies(args):
        try:
            run = run_policy(p, seq, args.k, dist=dist)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows.append({"policy": run.policy, "k": args.k, "n": len(seq), "faults": run.faults, "cost": run.cost})
    emit_rows(rows, ["policy", "k", "n", "faults", "cost"], args)
    return 0


def cmd_roe(args):
    _require_seed(args)
    dist = build_dist(args)
    policies = _policies(args)
    n = args.n or sim.default_n(args.k)
    try:
        est = sim.estimate_roe_many(policies, dist, args.k, n, args.trials, args.seed, args.convention)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cols = ["policy", "roe", "stderr", "mean_alg_cost", "mean_opt_cost", "convention",
            "k", "m", "n", "trials", "seed"]
    rows = [dict(e.as_dict(), k=args.k, m=dist.m) for e in est.values()]
    emit_rows(rows, cols, args)
    return 0


def cmd_bounds(args):
    dist = build_dist(args)
    if args.k < bounds.MIN_FORMULA_K:
        raise UsageError(
            f"k must be >= {bounds.MIN_FORMULA_K}; the fractional indices 3k/8, k/2, 11k/8, 3k/2 "
            "are exact for k divisible by 8, otherwise numerator ranges round inwards and "
            "denominator ranges outwards"
        )
    rep = bounds.bound_report(dist, args.k)
    emit_rows([rep.as_dict()], bounds.BoundReport.header(), args)
    return 0


def _load_grid(args):
    grid = {"alphas": _floats(args.alphas), "ks": _ints(args.ks), "kappas": _floats(args.kappas)}
    if args.grid:
        grid.update(json.loads(Path(args.grid).read_text()))
    return grid


def cmd_sweep(args):
    _require_seed(args)
    grid = _load_grid(args)
    cells = sim.sweep_grid(grid["alphas"], grid["ks"], grid["kappas"])
    rows = sim.sweep(cells, args.n, args.trials, args.seed)
    emit_rows([r.values for r in rows], sim.SWEEP_COLUMNS, args)
    return 0 if all(r.passed for r in rows) else 1


def cmd_demo(args):
    _require_seed(args)
    if args.demo == "uniform":
        n = args.n or sim.default_n(args.k)
        d = sim.demo_uniform_lower_bound(args.k, n, args.trials, args.seed)
        emit_rows(list(d.rows()), ["metric", "value", "expected", "stderr"], args)
    elif args.demo == "separation":
        ks = _ints(args.ks) if args.ks else [args.k]
        rows = []
        for k in ks:
            n = args.n or max(10**5, 100 * k**3)
            rows.extend(sim.demo_lru_vs_plfu(k, n, args.trials, args.seed).rows())
        cols = ["k", "ratio"] if args.format == "dat" else list(rows[0])
        emit_rows(rows, cols, args)
    else:
        raise UsageError(f"unknown demo {args.demo!r}; choose uniform or separation")
    return 0


def cmd_fit(args):
    path = Path(args.trace)
    if not path.exists():
        raise UsageError(f"trace file not found: {path}")
    trace = fitkit.ingest_trace(path)
    fits = []
    if args.model in ("powerlaw", "both"):
        fits.append(fitkit.fit_power_law(trace))
    if args.model in ("multicore", "both"):
        fits.append(fitkit.fit_multicore(trace))
    if args.curves:
        fitkit.write_curve(f"{args.curves}_data.dat", trace.empirical_cdf())
        for f in fits:
            name = "powerlaw" if f.model == "power_law" else "multicore"
            fitkit.write_curve(f"{args.curves}_{name}.dat", f.model_cdf)
    emit_rows([f.record() for f in fits], ["model", "alpha", "kappa", "ks", "m", "total"], args)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pagingroe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, trials=False, policies=False):
        p.add_argument("--k", type=int, default=8)
        p.add_argument("--n", type=int, default=None)
        if trials:
            p.add_argument("--trials", type=int, default=50)
        if seed:
            p.add_argument("--seed", type=int, default=None)
        if policies:
            p.add_argument("--policies", default="lru")
        p.add_argument("--format", choices=["csv", "jsonl", "dat"], default="csv")
        p.add_argument("--out", default=None)

    p = sub.add_parser("generate", help="write an i.i.d. request trace")
    add_dist_flags(p)
    common(p)
    p.set_defaults(func=cmd_generate, n=None)

    p = sub.add_parser("simulate", help="fault counts of policies on one sequence")
    add_dist_flags(p)
    common(p, policies=True)
    p.add_argument("--trace", default=None, help="simulate on a trace file instead of sampling")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("roe", help="Monte Carlo ratio-of-expectations against Belady")
    add_dist_flags(p)
    common(p, trials=True, policies=True)
    p.add_argument("--convention", choices=["cost", "faults"], default="cost")
    p.set_defaults(func=cmd_roe)

    p = sub.add_parser("bounds", help="closed-form RoE bounds and cost rates")
    add_dist_flags(p)
    common(p, seed=False)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="empirical RoE against every bound over a grid")
    common(p, trials=True)
    p.add_argument("--alphas", default="0.3,0.5,0.8,1.0,1.2,1.5,2.0")
    p.add_argument("--ks", default="8,16,32")
    p.add_argument("--kappas", default="1,100,10000")
    p.add_argument("--grid", default=None, help="JSON file with alphas/ks/kappas lists")
    p.set_defaults(func=cmd_sweep, n=10**5)

    p = sub.add_parser("demo", help="lower-bound demonstrations")
    common(p, trials=True)
    p.add_argument("--demo", required=True)
    p.add_argument("--ks", default=None, help="comma-separated k values (separation demo)")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("fit", help="fit power-law / multi-core models to a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--model", choices=["powerlaw", "multicore", "both"], default="both")
    p.add_argument("--curves", default=None, help="prefix for .dat curve files")
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate" and args.n is None:
        parser.error("--n is required")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pagingroe {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"pagingroe {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
