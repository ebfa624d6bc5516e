"""Command-line interface: generate, solve, bench, verify.

Exit codes: 0 when the requested work completed (solver statuses are data,
not process failures), 2 on configuration errors, 1 when ``verify`` finds a
violated invariant.
"""

from __future__ import annotations

import argparse
import sys

from .bench import BenchConfig, run_bench, write_csv, write_json_report
from .model import load_equation, save_equation
from .problems import RngStream, make_instance
from .solvers import SolverConfig, solve_inexact_newton, solve_regularized_newton
from .tensor import write_vector
from .verify import run_all_checks


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p.add_argument("--order", type=int, default=3, help="tensor order m (problem 3 is always 4)")
    p.add_argument("--dim", type=int, required=True, help="dimension n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--b-mode", choices=["positive", "zeros"], default="positive")
    p.add_argument("--c0", type=float, default=1.0, help="left boundary value (problem 3)")
    p.add_argument("--c1", type=float, default=1.0, help="right boundary value (problem 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mteq",
                                     description="M-tensor equation solvers and benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write one instance as .mtns/.vec/.meta files")
    _add_instance_flags(g)
    g.add_argument("--trial", type=int, default=0, help="random stream index")
    g.add_argument("--out", required=True, help="output base path (extensions are appended)")

    s = sub.add_parser("solve", help="solve an instance stored as .mtns/.vec/.meta files")
    s.add_argument("--input", required=True, help="base path of the instance files")
    s.add_argument("--solver", choices=["inexact", "regularized"], default="inexact")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=300)
    s.add_argument("--out", help="write the solution vector to this .vec file")

    b = sub.add_parser("bench", help="run seeded benchmark trials and write reports")
    _add_instance_flags(b)
    b.add_argument("--trials", type=int, default=100)
    b.add_argument("--solver", choices=["inexact", "regularized", "both"], default="both")
    b.add_argument("--tol", type=float, default=1e-10)
    b.add_argument("--max-iter", type=int, default=300)
    b.add_argument("--out", help="base path for <out>.raw.csv, <out>.summary.csv, <out>.json")

    v = sub.add_parser("verify", help="run the invariant suites on seeded instances")
    v.add_argument("--quick", action="store_true", help="smaller sample sizes")

    return parser


def cmd_generate(args) -> int:
    rng = RngStream(args.seed, stream=args.trial).generator()
    eq = make_instance(args.problem, 4 if args.problem == 3 else args.order, args.dim,
                       rng, b_mode=args.b_mode, c0=args.c0, c1=args.c1)
    save_equation(eq, args.out)
    print(f"wrote {args.out}.mtns / .vec / .meta  "
          f"(m={eq.order}, n={eq.dim}, omega={eq.omega:.6g}, b_class={eq.b_class})")
    return 0


def cmd_solve(args) -> int:
    eq = load_equation(args.input)
    if args.solver == "inexact":
        cfg = SolverConfig(tol=args.tol, max_iter=args.max_iter)
        report = solve_inexact_newton(eq, cfg)
    else:
        cfg = SolverConfig.regularized_defaults(tol=args.tol, max_iter=args.max_iter)
        report = solve_regularized_newton(eq, cfg)
    print(f"status      : {report.status}")
    print(f"iterations  : {report.iterations}")
    print(f"ls backtracks: {report.ls_iterations}")
    print(f"residual    : {report.final_residual:.3e}")
    print(f"time        : {report.wall_time_s:.4f} s")
    if report.order_estimate is not None:
        print(f"order est.  : {report.order_estimate:.2f}")
    if report.message:
        print(f"note        : {report.message}")
    if args.out and report.x is not None:
        write_vector(report.x, args.out)
        print(f"solution written to {args.out}")
    return 0


def cmd_bench(args) -> int:
    config = BenchConfig(
        problem=args.problem, m=4 if args.problem == 3 else args.order, n=args.dim,
        trials=args.trials, seed=args.seed, solver=args.solver,
        tol=args.tol, max_iter=args.max_iter, b_mode=args.b_mode,
        c0=args.c0, c1=args.c1,
    )
    summary = run_bench(config)
    print(f"problem {config.problem}  (m,n)=({config.m},{config.n})  "
          f"trials={config.trials}  b={config.b_mode}")
    for agg in summary.aggregates:
        print(f"  {agg.solver:12s} success {agg.successes}/{agg.trials}  "
              f"iters {agg.mean_iters:.1f}  time {agg.mean_time_ms:.5f} ms  "
              f"res {agg.mean_residual:.2E}  ls {agg.mean_ls_iters:.1f}")
    if summary.iter_ratio_inexact_over_regularized is not None:
        print(f"  ratios inexact/regularized: iterations "
              f"{summary.iter_ratio_inexact_over_regularized:.2f}, time "
              f"{summary.time_ratio_inexact_over_regularized:.2f}")
    if args.out:
        write_csv(summary.trials, args.out + ".raw.csv")
        write_csv(summary, args.out + ".summary.csv")
        write_json_report(summary.trials, args.out + ".json", config)
        print(f"reports written to {args.out}.raw.csv / .summary.csv / .json")
    return 0


def cmd_verify(args) -> int:
    failures = 0
    for name, ok, detail in run_all_checks(quick=args.quick):
        mark = "ok  " if ok else "FAIL"
        print(f"{mark} {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{failures} failing check(s)" if failures else "all checks passed")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "solve": cmd_solve,
        "bench": cmd_bench,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
