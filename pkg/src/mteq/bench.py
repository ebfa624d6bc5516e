"""Benchmark harness: seeded trials, aggregation, CSV and JSON reports.

A benchmark cell is (problem, m, n); each trial draws its instance from an
independent random stream indexed by the trial number, runs the selected
solver(s), and records iterations, line-search backtracks, wall time and the
final residual.  Aggregates are computed over converged trials only, with
failures counted separately.  Re-running with the same seed reproduces every
column except the timings.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .problems import RngStream, make_instance
from .solvers import (
    CONVERGED,
    SolverConfig,
    SolverReport,
    solve_inexact_newton,
    solve_regularized_newton,
)

__all__ = [
    "BenchConfig",
    "TrialRecord",
    "SolverAggregate",
    "BenchSummary",
    "run_bench",
    "write_csv",
    "write_json_report",
    "read_json_report",
    "RAW_CSV_HEADER",
    "SUMMARY_CSV_HEADER",
]

RAW_CSV_HEADER = "problem,m,n,trial,solver,status,iters,ls_iters,time_ms,residual"
SUMMARY_CSV_HEADER = (
    "problem,m,n,solver,trials,successes,mean_iters,mean_time_ms,mean_residual,mean_ls_iters"
)

JSON_SCHEMA = "mteq-report/1"


@dataclass
class BenchConfig:
    problem: int
    m: int
    n: int
    trials: int = 100
    seed: int = 0
    solver: str = "both"  # "inexact" | "regularized" | "both"
    tol: float = 1e-10
    max_iter: int = 300
    b_mode: str = "positive"  # "positive" | "zeros"
    c0: float = 1.0
    c1: float = 1.0
    keep_reports: bool = False

    def __post_init__(self):
        if self.problem not in (1, 2, 3, 4, 5):
            raise ValueError("problem must be 1..5")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.solver not in ("inexact", "regularized", "both"):
            raise ValueError(f"unknown solver selection {self.solver!r}")
        if self.b_mode not in ("positive", "zeros"):
            raise ValueError(f"unknown b mode {self.b_mode!r}")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter at least 1")

    def solver_names(self):
        return ("inexact", "regularized") if self.solver == "both" else (self.solver,)

    def solver_config(self, name: str) -> SolverConfig:
        if name == "inexact":
            return SolverConfig(tol=self.tol, max_iter=self.max_iter)
        return SolverConfig.regularized_defaults(tol=self.tol, max_iter=self.max_iter)


@dataclass
class TrialRecord:
    problem: int
    m: int
    n: int
    trial: int
    solver: str
    status: str
    iters: int
    ls_iters: int
    time_ms: float
    residual: float
    order_estimate: float | None = None
    residual_history: list[float] = field(default_factory=list)
    e_history: list[float] = field(default_factory=list)
    t_history: list[float] | None = None
    report: SolverReport | None = None  # kept only when keep_reports is set


@dataclass
class SolverAggregate:
    solver: str
    trials: int
    successes: int
    mean_iters: float
    mean_time_ms: float
    mean_residual: float
    mean_ls_iters: float


@dataclass
class BenchSummary:
    config: BenchConfig
    aggregates: list[SolverAggregate]
    trials: list[TrialRecord]
    iter_ratio_inexact_over_regularized: float | None = None
    time_ratio_inexact_over_regularized: float | None = None


def _aggregate(config: BenchConfig, records: list[TrialRecord]) -> BenchSummary:
    aggregates = []
    by_solver = {}
    for name in config.solver_names():
        rows = [r for r in records if r.solver == name]
        good = [r for r in rows if r.status == CONVERGED]
        if good:
            agg = SolverAggregate(
                solver=name,
                trials=len(rows),
                successes=len(good),
                mean_iters=float(np.mean([r.iters for r in good])),
                mean_time_ms=float(np.mean([r.time_ms for r in good])),
                mean_residual=float(np.mean([r.residual for r in good])),
                mean_ls_iters=float(np.mean([r.ls_iters for r in good])),
            )
        else:
            nan = float("nan")
            agg = SolverAggregate(name, len(rows), 0, nan, nan, nan, nan)
        aggregates.append(agg)
        by_solver[name] = agg
    summary = BenchSummary(config=config, aggregates=aggregates, trials=records)
    if "inexact" in by_solver and "regularized" in by_solver:
        a, b = by_solver["inexact"], by_solver["regularized"]
        if a.successes and b.successes:
            # Ratio between the two implemented solvers (iterations and time).
            summary.iter_ratio_inexact_over_regularized = a.mean_iters / b.mean_iters
            summary.time_ratio_inexact_over_regularized = a.mean_time_ms / b.mean_time_ms
    return summary


def run_bench(config: BenchConfig) -> BenchSummary:
    """Run all trials of one benchmark cell and aggregate the outcomes.

    Trial ``j`` draws from stream ``j`` of the configured seed, so results do
    not depend on execution order.  Solver failures are recorded as rows, not
    raised.  Timing covers the solver call only; instance generation and
    semi-symmetrization are excluded.
    """
    records = []
    solvers = {"inexact": solve_inexact_newton, "regularized": solve_regularized_newton}
    for j in range(config.trials):
        rng = RngStream(config.seed, stream=j).generator()
        eq = make_instance(config.problem, config.m, config.n, rng,
                           b_mode=config.b_mode, c0=config.c0, c1=config.c1)
        for name in config.solver_names():
            report = solvers[name](eq, config.solver_config(name))
            records.append(TrialRecord(
                problem=config.problem, m=config.m, n=config.n, trial=j,
                solver=name, status=report.status, iters=report.iterations,
                ls_iters=report.ls_iterations, time_ms=report.wall_time_s * 1e3,
                residual=report.final_residual,
                order_estimate=report.order_estimate,
                residual_history=list(report.residual_history),
                e_history=list(report.e_history),
                t_history=list(report.t_history) if report.t_history else None,
                report=report if config.keep_reports else None,
            ))
    return _aggregate(config, records)


def _fmt_residual(v: float) -> str:
    return f"{v:.2E}"


def _fmt_time(v: float) -> str:
    return f"{v:.5f}"


def write_csv(data, path) -> None:
    """Write trial rows (list of TrialRecord) or a BenchSummary as CSV."""
    if isinstance(data, BenchSummary):
        lines = [SUMMARY_CSV_HEADER]
        cfg = data.config
        for agg in data.aggregates:
            lines.append(",".join([
                str(cfg.problem), str(cfg.m), str(cfg.n), agg.solver,
                str(agg.trials), str(agg.successes),
                f"{agg.mean_iters:.1f}", _fmt_time(agg.mean_time_ms),
                _fmt_residual(agg.mean_residual), f"{agg.mean_ls_iters:.1f}",
            ]))
    else:
        lines = [RAW_CSV_HEADER]
        for r in data:
            lines.append(",".join([
                str(r.problem), str(r.m), str(r.n), str(r.trial), r.solver,
                r.status, str(r.iters), str(r.ls_iters),
                _fmt_time(r.time_ms), _fmt_residual(r.residual),
            ]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json_report(trials: list, path, config: BenchConfig | None = None) -> None:
    """One JSON document with the config echo and full per-trial histories."""
    doc = {
        "schema": JSON_SCHEMA,
        "config": _config_dict(config) if config is not None else None,
        "trials": [_trial_dict(r) for r in trials],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def read_json_report(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != JSON_SCHEMA:
        raise ValueError(f"{path}: unexpected schema {doc.get('schema')!r}")
    return doc


def _config_dict(config: BenchConfig) -> dict:
    d = asdict(config)
    d.pop("keep_reports", None)
    return d


def _trial_dict(r: TrialRecord) -> dict:
    return {
        "problem": r.problem, "m": r.m, "n": r.n, "trial": r.trial,
        "solver": r.solver, "status": r.status, "iters": r.iters,
        "ls_iters": r.ls_iters, "time_ms": r.time_ms, "residual": r.residual,
        "order_estimate": r.order_estimate,
        "residual_history": r.residual_history,
        "e_history": r.e_history,
        "t_history": r.t_history,
    }
