"""Command-line entry point ``coded-caching``.

Curves go to stdout as CSV, scalar reports as JSON.  Exit codes: 0 success,
1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import bounds, gap_analysis, schemes, verify
from .entropy_lp import build_model, solve
from .problem import CodedCachingError, ProblemSize, all_demands, as_demand

CURVES = ("worst_lower", "avg_lower", "yma", "yma_envelope_worst", "yma_envelope_avg")


@dataclass(frozen=True)
class SweepSpec:
    K: int
    N: int
    m_grid: tuple[float, ...]
    outputs: tuple[str, ...] = CURVES


class UsageError(Exception):
    pass


def parse_grid(text: str, N: int) -> tuple[float, ...]:
    """``start:stop:count`` (stop excluded) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            lo, hi, n = float(start), float(stop), int(count)
            if n < 2:
                raise UsageError("grid count must be at least 2")
            grid = tuple(float(x) for x in np.linspace(lo, hi, n, endpoint=False))
        else:
            grid = tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from exc
    if any(not 0 <= m < N for m in grid):
        raise UsageError(f"grid must lie in [0, {N})")
    return grid


def sweep(spec: SweepSpec) -> list[list[float]]:
    ps = ProblemSize(spec.K, spec.N)
    envelopes = {
        "yma_envelope_worst": bounds.yma_envelope(ps, "worst"),
        "yma_envelope_avg": bounds.yma_envelope(ps, "avg"),
    }
    funcs = {
        "worst_lower": lambda m: float(bounds.worst_case_lower(ps, m)),
        "avg_lower": lambda m: bounds.avg_case_lower(ps, m),
        "yma": lambda m: bounds.yma_upper(ps, m),
        **{k: (lambda m, c=c: float(c(m))) for k, c in envelopes.items()},
    }
    return [[m] + [funcs[name](m) for name in spec.outputs] for m in spec.m_grid]


def cmd_bounds(args) -> int:
    if args.K < 1 or args.N < 1:
        raise UsageError("K and N must be positive")
    outputs = tuple(c.strip() for c in args.curves.split(",")) if args.curves else CURVES
    unknown = [c for c in outputs if c not in CURVES]
    if unknown:
        raise UsageError(f"unknown curves {unknown}; choose from {','.join(CURVES)}")
    grid = parse_grid(args.grid or f"0:{args.N}:1024", args.N)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("M",) + outputs)
    for row in sweep(SweepSpec(args.K, args.N, grid, outputs)):
        writer.writerow(f"{x:.12g}" for x in row)
    return 0


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_gap(args) -> int:
    if args.gap_cmd == "scan-phi":
        res = gap_analysis.scan_phi(args.ell_max, args.grid_step, not args.no_polish, args.workers)
        _emit(res.to_dict())
    elif args.gap_cmd in ("max-psi", "max-eta"):
        res = gap_analysis.maximize_2d(args.gap_cmd[4:], grid_step=args.grid_step, polish=not args.no_polish)
        _emit(res.to_dict())
    else:
        ps = ProblemSize(args.K, args.N)
        if args.case == "worst":
            rows = gap_analysis.xi_at_corners(ps)
            key = "xi"
        else:
            rows = gap_analysis.theta_at_corners(ps)
            key = "theta"
        corners = [
            {"ell": ell, "memory": bounds.corner_memory(ps, ell, args.case), key: value}
            for ell, value in rows
        ]
        _emit({"K": ps.K, "N": ps.N, "case": args.case, "corners": corners,
               "value": max(r[key] for r in corners)})
    return 0


def cmd_verify(args) -> int:
    failures = verify.run(args.suite, args.seed)
    _emit({"suite": args.suite, "seed": args.seed, "passed": not failures,
           "failures": [f.to_dict() for f in failures]})
    return 1 if failures else 0


def _demands(text: str | None, ps: ProblemSize):
    if not text:
        return list(all_demands(ps.N, ps.K))
    return [as_demand(tuple(int(x) for x in part.split(","))) for part in text.split(";")]


def cmd_lp(args) -> int:
    ps = ProblemSize(args.K, args.N)
    try:
        M = Fraction(args.M)
    except ValueError as exc:
        raise UsageError(f"bad memory {args.M!r}") from exc
    model = build_model(ps, M, _demands(args.demands, ps), args.objective)
    if args.export:
        with open(args.export, "w") as fh:
            fh.write(model.export())
    sol = solve(model, args.pivot, args.symmetry)
    _emit({
        "K": ps.K, "N": ps.N, "M": str(M), "objective": args.objective,
        "optimal_rate": str(sol.optimal_rate), "value": float(sol.optimal_rate),
        "pivots": sol.pivots, "rows": sol.rows, "columns": sol.columns,
        "dual_certificate": [[cid, str(y)] for cid, y in sol.dual_certificate],
    })
    return 0


def cmd_scheme(args) -> int:
    ps = ProblemSize(args.K, args.N)
    scheme = schemes.place(ps, args.t, args.F)
    if args.demand:
        d = as_demand(tuple(int(x) for x in args.demand.split(",")))
        rng = np.random.default_rng(args.seed)
        transcript = schemes.deliver(scheme, d, schemes.random_files(scheme, rng), args.suppress)
        if args.dump:
            sys.stdout.write(transcript.dump() + "\n")
        _emit({"K": ps.K, "N": ps.N, "t": args.t, "F": scheme.F, "demand": str(d),
               "memory": str(scheme.memory_used), "rate": str(transcript.rate),
               "decoded": True})
        return 0
    worst, avg = schemes.measure_rates(scheme, args.suppress, args.samples, args.seed)
    _emit({"K": ps.K, "N": ps.N, "t": args.t, "F": scheme.F,
           "memory": str(scheme.memory_used), "worst_rate": str(worst), "avg_rate": str(avg),
           "worst_rate_float": float(worst), "avg_rate_float": float(avg)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coded-caching", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for randomised checks")
    # subcommands accept --seed too without clobbering the global value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common], help="CSV sweep of bound curves")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--grid", help="start:stop:count (stop excluded) or m1,m2,...; default 0:N:1024")
    p.add_argument("--curves", help=f"comma list from {','.join(CURVES)}")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gap", parents=[common], help="gap constants (JSON)")
    gsub = p.add_subparsers(dest="gap_cmd", required=True)
    g = gsub.add_parser("scan-phi", parents=[common])
    g.add_argument("--ell-max", type=int, default=10_000)
    g.add_argument("--grid-step", type=float, default=1e-3)
    g.add_argument("--no-polish", action="store_true")
    g.add_argument("--workers", type=int, help="processes (env CODED_CACHING_WORKERS)")
    for name in ("max-psi", "max-eta"):
        g = gsub.add_parser(name, parents=[common])
        g.add_argument("--grid-step", type=float)
        g.add_argument("--no-polish", action="store_true")
    g = gsub.add_parser("corners", parents=[common])
    g.add_argument("--K", type=int, required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--case", choices=("worst", "avg"), default="worst")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("verify", parents=[common], help="run property suites")
    p.add_argument("suite", choices=("lemmas", "schemes", "lp", "all"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lp", parents=[common], help="Shannon outer-bound LP")
    lsub = p.add_subparsers(dest="lp_cmd", required=True)
    g = lsub.add_parser("solve", parents=[common])
    g.add_argument("--K", type=int, required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--M", required=True, help="cache size, exact rational such as 1/2")
    g.add_argument("--demands", help="semicolon-separated demands, e.g. '1,2;2,1'; default all")
    g.add_argument("--objective", choices=("worst", "avg"), default="worst")
    g.add_argument("--pivot", choices=("bland", "dantzig"), default="bland")
    g.add_argument("--symmetry", action="store_true")
    g.add_argument("--export", metavar="PATH", help="write the model in text form")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("scheme", parents=[common], help="MN scheme simulation")
    ssub = p.add_subparsers(dest="scheme_cmd", required=True)
    g = ssub.add_parser("simulate", parents=[common])
    g.add_argument("--K", type=int, required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--t", type=int, required=True)
    g.add_argument("--F", type=int, help="file size in bits, a multiple of C(K,t); default C(K,t)")
    g.add_argument("--demand", help="single demand such as 1,2; default all demands")
    g.add_argument("--suppress", action="store_true", help="skip non-leader blocks")
    g.add_argument("--samples", type=int, help="demand samples when N**K is too large")
    g.add_argument("--dump", action="store_true", help="print the transcript")
    p.set_defaults(func=cmd_scheme)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gap" and args.gap_cmd == "scan-phi" and args.workers is None:
        args.workers = int(os.environ.get("CODED_CACHING_WORKERS", "1"))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (CodedCachingError, ValueError) as exc:
        print(f"coded-caching: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream reader (e.g. head) closed early
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
