"""Command-line experiment drivers.

Every sampling command takes --seed/--samples/--workers and prints its
seed, so every run is reproducible.  --json emits one machine-readable
document; --out writes the same rows as flat CSV.  Exit codes: 0 success,
2 precondition violation, 3 step-budget timeout.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .errors import (InvalidInputError, NoTransitionError,
                     PrecisionError, SingularPointError, SingularSystemError,
                     StepBudgetError, TableRangeError)
from .geometry import Rectangle, open_square
from .rng import RngStream

EXIT_PRECONDITION = 2
EXIT_BUDGET = 3


def _emit(args, header: dict, rows: list[dict]):
    if args.json:
        print(json.dumps({**header, "rows": rows}, indent=2, default=str))
    else:
        print("# " + ", ".join(f"{k}={v}" for k, v in header.items()))
        if rows:
            cols = list(rows[0].keys())
            print("  ".join(cols))
            for r in rows:
                print("  ".join(str(r[c]) for c in cols))
    if args.out:
        with open(args.out, "w") as fh:
            if rows:
                cols = list(rows[0].keys())
                fh.write(",".join(cols) + "\n")
                for r in rows:
                    fh.write(",".join(str(r[c]) for c in cols) + "\n")
    return 0


def _add_common(p, samples_default=10000):
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--samples", type=int, default=samples_default)
    p.add_argument("--workers", type=int, default=0)
    p.add_argument("--step-budget", type=int, default=10 ** 9)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", type=str, default=None)


def cmd_beta_table(args):
    from .hybrid import beta_table, BETA_EXPECTED
    from .potential import shared_table
    table = shared_table(max(512, 2 * (args.window + args.search) + 4))
    rows = beta_table(args.window, args.search, table)
    out = [{"config": r.label, "max_beta": round(r.max_beta, 4),
            "argmax": f"{r.argmax[0]}+{r.argmax[1]}i",
            "expected": BETA_EXPECTED.get(r.label, ""),
            "seam_count": r.seam_count,
            "truncation_allowance": round(r.truncation_allowance, 4)}
           for r in rows]
    return _emit(args, {"command": "beta-table", "window": args.window,
                        "search": args.search}, out)


def cmd_potential(args):
    from .potential import RESIDUAL_BOUND_FORMULA, shared_table
    t = shared_table(args.radius)
    rows = []
    if args.dump:
        for x in range(args.radius + 1):
            for y in range(x + 1):
                if x * x + y * y <= args.radius ** 2:
                    rows.append({"x": x, "y": y,
                                 "a": t.value(x, y, args.normalization)})
    scan, arg = t.residual_bound_scan(2, min(200, args.radius))
    head = {"command": "potential", "radius": args.radius,
            "normalization": args.normalization,
            "a0_paper": t.value(0, 0, "paper"),
            "residual_scan_2_200": scan, "residual_argmax": str(arg),
            "printed_bound_formula": RESIDUAL_BOUND_FORMULA}
    return _emit(args, head, rows)


def cmd_lerw_sample(args):
    from .graph import rect_lattice, graph_boundary
    from .lerw import lerw_via_wilson
    g = rect_lattice(-args.size, -args.size, args.size, args.size)
    bs = graph_boundary(g, open_square(args.size))
    rows = []
    for i in range(args.samples):
        path = lerw_via_wilson(g, g.index_of(0, 0), bs.boundary.tolist(),
                               RngStream(args.seed), i)
        rows.append({"sample": i, "path": json.dumps(
            [[int(g.px[v]), int(g.py[v])] for v in path.vertices])})
    return _emit(args, {"command": "lerw-sample", "seed": args.seed,
                        "size": args.size}, rows)


def cmd_ust_sample(args):
    from .graph import rect_lattice
    from .lerw import wilson_ust
    g = rect_lattice(0, 0, args.width - 1, args.height - 1)
    rows = []
    for i in range(args.samples):
        t = wilson_ust(g, None, RngStream(args.seed), i)
        rows.append({"sample": i,
                     "edges": json.dumps(sorted(t.edge_set()))})
    return _emit(args, {"command": "ust-sample", "seed": args.seed,
                        "grid": f"{args.width}x{args.height}"}, rows)


def cmd_ql_census(args):
    from .graph import rect_lattice, graph_boundary
    from .lerw import quasi_loop_census
    g = rect_lattice(-args.size, -args.size, args.size, args.size)
    bs = graph_boundary(g, open_square(args.size))
    est = quasi_loop_census(g, g.index_of(0, 0), bs.boundary.tolist(),
                            args.r, args.eps, args.samples,
                            RngStream(args.seed),
                            step_budget=args.step_budget)
    return _emit(args, {"command": "ql-census", "seed": args.seed,
                        "size": args.size, "r": args.r, "eps": args.eps},
                 [{"mean_count": est.value, "std_error": est.std_error,
                   "samples": est.samples}])


def cmd_hit_verify(args):
    from .conformal import verify_hit_formula
    u = 0.25 + 0.25j if args.off_center else 0j
    rows = []
    for n in args.n:
        rep = verify_hit_formula(n, u)
        rows.append({"N": n, "max_rel_err_derivative": rep.max_rel_err_derivative,
                     "max_rel_err_full_sum": rep.max_rel_err_full_sum,
                     "predicted_total_mass": rep.predicted_total_mass,
                     "boundary_points": rep.checked_boundary_points})
    return _emit(args, {"command": "hit-verify", "u": str(u)}, rows)


def cmd_convergence(args):
    from .experiments import convergence_experiment
    dom = open_square(1)
    tgt = Rectangle(-1, -1, 1, Fraction(1, 2))
    a = (Fraction(0), Fraction(-1, 4))
    rows = convergence_experiment(dom, tgt, a,
                                  range(args.n_min, args.n_max + 1),
                                  args.samples, RngStream(args.seed),
                                  args.workers, args.step_budget)
    out = [{"n": r.n, "p": r.estimate.value, "std_error": r.estimate.std_error,
            "degenerate": r.degenerate} for r in rows]
    return _emit(args, {"command": "convergence", "seed": args.seed,
                        "samples": args.samples}, out)


def cmd_puncture_demo(args):
    from .experiments import puncture_demo
    rows = puncture_demo(tuple(range(args.n_min, args.n_max + 1)),
                         tuple(args.schedule), samples=args.samples,
                         rng=RngStream(args.seed))
    out = [{"n": n, "q_outer": q} for n, q in rows]
    return _emit(args, {"command": "puncture-demo", "seed": args.seed,
                        "schedule": args.schedule,
                        "exact_up_to_n": 8}, out)


def cmd_interp_sweep(args):
    from .experiments import interpolation_sweep
    dom = open_square(1)
    tgt = Rectangle(-1, -1, 1, Fraction(1, 2))
    a = (Fraction(0), Fraction(-1, 4))
    ks = [int(k) for k in args.k]
    rows, ncells = interpolation_sweep(dom, tgt, a, args.m, args.n, ks,
                                       args.trials, args.samples,
                                       RngStream(args.seed), args.workers,
                                       args.step_budget)
    out = [{"k": r.k, "mean_p": r.mean_p, "std_err": r.std_err,
            "trials": r.trials} for r in rows]
    drift = abs(rows[0].mean_p - rows[-1].mean_p) if len(rows) > 1 else 0.0
    return _emit(args, {"command": "interp-sweep", "seed": args.seed,
                        "cells": ncells, "M": args.m, "N": args.n,
                        "drift": drift, "note": "heuristic desk-scale run"},
                 out)


def cmd_rho(args):
    from .experiments import rho_diagnostics
    dom = open_square(1)
    tgt = Rectangle(-1, -1, 1, Fraction(1, 2))
    a = (Fraction(0), Fraction(-1, 4))
    d = rho_diagnostics(dom, tgt, a, args.r, Fraction(1, 2 ** args.n))
    return _emit(args, {"command": "rho", "r": args.r, "n": args.n},
                 [{"rho1": d.rho1, "rho2": d.rho2, "rho3": d.rho3}])


def build_parser():
    p = argparse.ArgumentParser(
        prog="lerwkit",
        description="loop-erased random walk and lattice potential toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    q = sub.add_parser("beta-table", help="seam-defect table for the five "
                       "two-scale configurations")
    q.add_argument("--window", type=int, default=200)
    q.add_argument("--search", type=int, default=5)
    _add_common(q)
    q.set_defaults(fn=cmd_beta_table)

    q = sub.add_parser("potential", help="discrete harmonic potential table")
    q.add_argument("--radius", type=int, default=512)
    q.add_argument("--normalization", choices=["raw", "paper"], default="raw")
    q.add_argument("--dump", action="store_true",
                   help="emit first-octant CSV rows")
    _add_common(q)
    q.set_defaults(fn=cmd_potential)

    q = sub.add_parser("lerw-sample", help="loop-erased walks to the square "
                       "boundary, as JSON coordinate lists")
    q.add_argument("--size", type=int, default=10)
    _add_common(q, samples_default=1)
    q.set_defaults(fn=cmd_lerw_sample)

    q = sub.add_parser("ust-sample", help="uniform spanning trees")
    q.add_argument("--width", type=int, default=3)
    q.add_argument("--height", type=int, default=3)
    _add_common(q, samples_default=1)
    q.set_defaults(fn=cmd_ust_sample)

    q = sub.add_parser("ql-census", help="quasi-loop census on the square")
    q.add_argument("--size", type=int, default=16)
    q.add_argument("--r", type=float, default=8.0)
    q.add_argument("--eps", type=float, default=1.0)
    _add_common(q, samples_default=1000)
    q.set_defaults(fn=cmd_ql_census)

    q = sub.add_parser("hit-verify", help="exact harmonic measure vs the "
                       "conformal-derivative prediction")
    q.add_argument("--n", type=int, nargs="+", default=[16, 64])
    q.add_argument("--off-center", action="store_true")
    _add_common(q)
    q.set_defaults(fn=cmd_hit_verify)

    q = sub.add_parser("convergence", help="containment probabilities across "
                       "mesh levels")
    q.add_argument("--n-min", type=int, default=4)
    q.add_argument("--n-max", type=int, default=8)
    _add_common(q, samples_default=100000)
    q.set_defaults(fn=cmd_convergence)

    q = sub.add_parser("puncture-demo", help="non-convergence on the "
                       "punctured square (exact solves)")
    q.add_argument("--n-min", type=int, default=4)
    q.add_argument("--n-max", type=int, default=8)
    q.add_argument("--schedule", type=int, nargs="+", default=[6, 10])
    _add_common(q)
    q.set_defaults(fn=cmd_puncture_demo)

    q = sub.add_parser("interp-sweep", help="random-cell-set interpolation "
                       "between grid scales (heuristic)")
    q.add_argument("--m", type=int, default=4)
    q.add_argument("--n", type=int, default=16)
    q.add_argument("--k", type=int, nargs="+", default=[0, 4, 8, 12, 16])
    q.add_argument("--trials", type=int, default=3)
    _add_common(q, samples_default=2000)
    q.set_defaults(fn=cmd_interp_sweep)

    q = sub.add_parser("rho", help="boundary-quality diagnostics")
    q.add_argument("--r", type=float, default=0.25)
    q.add_argument("--n", type=int, default=6)
    _add_common(q)
    q.set_defaults(fn=cmd_rho)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 0):
        from . import _engine
        _engine.set_workers(args.workers)
    try:
        return args.fn(args)
    except StepBudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidInputError, PrecisionError, TableRangeError,
            NoTransitionError, SingularSystemError, SingularPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
