"""Command-line entry point.

Subcommands: ``run`` (execute a spec-file sweep), ``limits`` (evaluate the
theoretic calculators, single points or CSV curves), ``gamp-trace`` (dump
the per-iteration trace of one trial), ``aud`` (run an active-user-detection
comparison spec).  Exit codes: 0 success, 2 spec/usage error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import sys

from .gamp import GampDivergenceError
from .harness import SpecError, parse_spec_file, run_experiment, run_gamp_trace
from .limits import (
    LimitQuery,
    NumericError,
    invert_mmse,
    mmae,
    mmse_of_delta,
    mmwse,
    roc_curve,
    state_evolution_delta,
)

_EXIT_OK = 0
_EXIT_SPEC = 2
_EXIT_NUMERIC = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="metricamp",
        description="Metric-optimal MMV estimation experiments and limits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_like(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("spec", help="experiment spec file")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument("--out", default=None, help="override output_path")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--full", action="store_true",
                       help="full-scale run (N=10000, trials=50)")
        return p

    add_run_like("run", "run an experiment sweep from a spec file")
    add_run_like("aud", "run an active-user-detection comparison spec")

    p = sub.add_parser("gamp-trace", help="dump the per-iteration trace of one trial")
    p.add_argument("spec", help="experiment spec file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="gamp_trace.csv")

    p = sub.add_parser("limits", help="evaluate theoretic limit calculators")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--mmwse", action="store_true")
    mode.add_argument("--mmae", action="store_true")
    mode.add_argument("--mmse", action="store_true")
    mode.add_argument("--invert-mmse", action="store_true")
    mode.add_argument("--se", action="store_true")
    mode.add_argument("--roc", action="store_true")
    p.add_argument("--delta-v", default=None,
                   help="scalar-channel variance (comma list for a CSV sweep)")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--J", type=int, default=1)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--target", type=float, default=None, help="target MMSE to invert")
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--delta-z", type=float, default=None)
    p.add_argument("--n-samples", type=int, default=100_000)
    p.add_argument("--quadrature", action="store_true",
                   help="deterministic J=1 path for --mmae")
    p.add_argument("--points", type=int, default=200, help="ROC grid size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write a CSV instead of printing")
    return parser


def _limits_rows(args):
    rows = []
    if args.se:
        for key in ("R", "delta_z"):
            if getattr(args, key) is None:
                raise SpecError(f"--se requires --{key.replace('_', '-')}")
        value = state_evolution_delta(args.R, args.rho, args.J, args.delta_z)
        rows.append({"x": args.R, "J": args.J, "rho": args.rho, "beta": "",
                     "value": value, "p_fa": "", "p_miss": "",
                     "method": "fixed_point"})
        return "R", rows
    if args.invert_mmse:
        if args.target is None:
            raise SpecError("--invert-mmse requires --target")
        value = invert_mmse(args.target, args.rho, args.J)
        rows.append({"x": args.target, "J": args.J, "rho": args.rho, "beta": "",
                     "value": value, "p_fa": "", "p_miss": "",
                     "method": "bisection"})
        return "target_mmse", rows

    if args.delta_v is None:
        raise SpecError("this limits mode requires --delta-v")
    deltas = [float(v) for v in str(args.delta_v).split(",") if v.strip()]
    for dv in deltas:
        if args.mmwse:
            if args.beta is None:
                raise SpecError("--mmwse requires --beta")
            res = mmwse(LimitQuery(dv, args.rho, args.J, args.beta))
            rows.append({"x": dv, "J": args.J, "rho": args.rho, "beta": args.beta,
                         "value": res.value, "p_fa": res.components[0],
                         "p_miss": res.components[1], "method": res.method})
        elif args.mmae:
            query = LimitQuery(dv, args.rho, args.J)
            if args.quadrature:
                res = mmae(query, method="quadrature")
            else:
                res = mmae(query, n_samples=args.n_samples, seed=args.seed)
            rows.append({"x": dv, "J": args.J, "rho": args.rho, "beta": "",
                         "value": res.value, "p_fa": "", "p_miss": "",
                         "method": res.method})
        elif args.mmse:
            value = mmse_of_delta(dv, args.rho, args.J)
            rows.append({"x": dv, "J": args.J, "rho": args.rho, "beta": "",
                         "value": value, "p_fa": "", "p_miss": "",
                         "method": "quadrature"})
        elif args.roc:
            import numpy as np
            from scipy.stats import chi2
            grid = (1.0 + dv) * chi2.ppf(np.linspace(1e-6, 1 - 1e-6, args.points), args.J)
            for t, (fpr, tpr) in zip(grid, roc_curve(dv, args.rho, args.J, grid)):
                rows.append({"x": dv, "J": args.J, "rho": args.rho, "beta": "",
                             "value": t, "p_fa": fpr, "p_miss": tpr,
                             "method": "roc"})
    return "delta_v", rows


def _emit_limits(args):
    x_name, rows = _limits_rows(args)
    header = [x_name, "J", "rho", "beta", "value", "p_fa", "p_miss", "method"]

    def fmt(v):
        return f"{v:.17g}" if isinstance(v, float) else str(v)

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(row[k]) for k in
                              ("x", "J", "rho", "beta", "value", "p_fa",
                               "p_miss", "method")))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for row in rows:
            print(f"{row['method']} {x_name}={fmt(row['x'])} "
                  f"value={fmt(row['value'])} p_fa={fmt(row['p_fa'])} "
                  f"p_miss={fmt(row['p_miss'])}")
    return _EXIT_OK


def _apply_overrides(spec, args):
    if args.seed is not None:
        spec.base_seed = args.seed
    if getattr(args, "out", None):
        spec.output_path = args.out
    if getattr(args, "full", False):
        spec.N = 10_000
        spec.trials = 50
    return spec


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("run", "aud"):
            spec = parse_spec_file(args.spec)
            if args.command == "aud" and spec.name != "aud":
                raise SpecError("the 'aud' subcommand requires a spec with name = aud")
            spec = _apply_overrides(spec, args)
            run_experiment(spec, threads=args.threads)
            print(f"wrote {spec.output_path}")
            return _EXIT_OK
        if args.command == "gamp-trace":
            spec = parse_spec_file(args.spec)
            if args.seed is not None:
                spec.base_seed = args.seed
            run_gamp_trace(spec, args.out)
            print(f"wrote {args.out}")
            return _EXIT_OK
        if args.command == "limits":
            return _emit_limits(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return _EXIT_SPEC
    except (GampDivergenceError, NumericError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except ValueError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return _EXIT_SPEC
    return _EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
