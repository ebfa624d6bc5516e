"""The two damped Newton methods, their line searches, and run diagnostics.

Both methods iterate in the powered variable ``y = x^[m-1]`` and stop once
the equation residual ``|A x^(m-1) - b|`` (scaled data) falls below the
tolerance; the rescaled residual that drives each line search is recorded
alongside.

``solve_inexact_newton``
    Requires a strictly positive right-hand side.  Each step solves
    ``newton_matrix(y) d = -residual_y(y)`` and backtracks until the next
    iterate is positive, the rescaled residual norm drops by the Armijo-type
    factor, and ``residual_y < b`` is preserved.

``solve_regularized_newton``
    Accepts zeros in the right-hand side.  Zero-forced coordinates are first
    removed by the zero-pattern reduction; the remaining system is solved by
    the regularized iteration that appends a positive parameter ``t``, driven
    to zero along the run while staying positive and non-increasing.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import SingularSystemError, lu_solve, m_matrix_certificate
from .model import (
    B_INVALID,
    B_POSITIVE,
    B_WITH_ZEROS,
    MTensorEquation,
    ReductionResult,
    component_root,
    embed_solution,
    reduce_zero_pattern,
    residual,
    residual_y,
    residual_y_jacobian,
)
from .tensor import apply_mat, apply_vec

__all__ = [
    "CONVERGED",
    "MAX_ITERATIONS",
    "LINE_SEARCH_FAILED",
    "SINGULAR_SYSTEM",
    "INVALID_B",
    "SolverConfig",
    "IterateTrace",
    "SolverReport",
    "CertificateReport",
    "solve_inexact_newton",
    "solve_regularized_newton",
    "estimate_order",
    "certify_solution",
]

CONVERGED = "Converged"
MAX_ITERATIONS = "MaxIterations"
LINE_SEARCH_FAILED = "LineSearchFailed"
SINGULAR_SYSTEM = "SingularSystem"
INVALID_B = "InvalidB"

#: Step lengths below this abort the backtracking loop.
ALPHA_MIN = 1e-16

#: Residuals below 100 machine epsilons are noise for rate estimation.
ORDER_NOISE_FLOOR = 100 * np.finfo(float).eps


@dataclass
class SolverConfig:
    """Parameters shared by both methods.

    Field defaults match the inexact method's benchmark settings; use
    :meth:`regularized_defaults` for the regularized method's.  ``gamma`` and
    ``t_bar`` only affect the regularized method and must satisfy
    ``gamma * t_bar < 1``.

    ``initial_point`` selects how ``x0 > 0`` is chosen:

    * ``"epsilon-e"``: ``x0 = eps * e``.  With ``initial_value=None`` the
      scalar is placed just inside the feasibility region ``f(y0) < b``
      (90% of the largest admissible constant); a given ``initial_value``
      is used as-is.
    * ``"constant-e"``: ``x0 = c * e`` with ``c = initial_value`` (default 0.1).
    * ``"explicit"``: ``initial_value`` is the full vector.

    The inexact method requires ``f(y0) < b`` and halves the point up to 60
    times to reach it; the regularized method uses the point unchanged.
    """

    sigma: float = 0.1
    rho: float = 0.5
    gamma: float = 0.9
    t_bar: float = 0.01
    tol: float = 1e-10
    max_iter: int = 300
    initial_point: str = "epsilon-e"
    initial_value: object = None
    reduce_zeros: bool = True
    keep_iterates: bool = False

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.t_bar <= 0:
            raise ValueError("t_bar must be positive")
        if self.gamma * self.t_bar >= 1:
            raise ValueError("gamma * t_bar must be below 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.initial_point not in ("epsilon-e", "constant-e", "explicit"):
            raise ValueError(f"unknown initial point policy {self.initial_point!r}")
        if self.initial_point == "explicit" and self.initial_value is None:
            raise ValueError("explicit initial point needs a vector in initial_value")

    @classmethod
    def regularized_defaults(cls, **overrides) -> "SolverConfig":
        """Benchmark settings of the regularized method."""
        base = dict(sigma=0.1, rho=0.8, gamma=0.9, t_bar=0.01,
                    initial_point="constant-e", initial_value=0.1)
        base.update(overrides)
        return cls(**base)


@dataclass
class IterateTrace:
    """Per-iteration record; row 0 describes the initial point."""

    k: int
    alpha: float | None
    backtracks: int
    e_norm: float
    f_norm: float
    min_y: float
    t: float | None = None
    beta: float | None = None
    y: np.ndarray | None = None


@dataclass
class SolverReport:
    """Outcome of one solver run.

    ``residual_history`` tracks the equation residual of the instance the
    caller passed in (one entry per iterate, including the initial point);
    ``e_history`` tracks the rescaled-system norm the line search monitors.
    When the zero-pattern reduction was applied, the iteration itself runs on
    the reduced equation and ``x`` is the embedded full-dimension solution
    with exact zeros on the reduced-away coordinates.
    """

    status: str
    x: np.ndarray | None
    iterations: int
    ls_iterations: int
    wall_time_s: float
    residual_history: list[float] = field(default_factory=list)
    e_history: list[float] = field(default_factory=list)
    t_history: list[float] | None = None
    order_estimate: float | None = None
    final_residual: float = math.nan
    trace: list[IterateTrace] = field(default_factory=list)
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass
class CertificateReport:
    certified: bool
    residual: float
    reason: str | None = None


def estimate_order(residuals) -> float | None:
    """Empirical convergence order from the trailing residuals.

    Uses the last three strictly positive, strictly decreasing values above
    the noise floor and returns ``log(r2/r1) / log(r1/r0)``; ``None`` when
    fewer than three usable points remain.
    """
    vals = [float(r) for r in residuals if r > ORDER_NOISE_FLOOR]
    run = []
    for r in reversed(vals):
        if not run or r > run[-1]:
            run.append(r)
        else:
            break
    if len(run) < 3:
        return None
    r2, r1, r0 = run[0], run[1], run[2]
    return math.log(r2 / r1) / math.log(r1 / r0)


def certify_solution(eq: MTensorEquation, x) -> CertificateReport:
    """Check the Jacobian M-matrix certificate at a computed solution.

    At a positive ``x`` the Jacobian ``(m-1) * apply_mat(A, x)`` should be a
    Z-matrix with ``J x > 0``; for an embedded solution the check runs on the
    principal submatrix over the support.  Returns the certificate verdict
    together with the residual norm at ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    res = float(np.linalg.norm(residual(eq, x)))
    if (x < 0).any():
        return CertificateReport(False, res, "solution has negative components")
    support = np.flatnonzero(x > 0)
    if support.size == 0:
        return CertificateReport(False, res, "zero vector, certificate not applicable")
    J = (eq.order - 1) * apply_mat(eq.tensor, x)
    if support.size < x.size:
        J = J[np.ix_(support, support)]
        v = x[support]
        where = " on the support submatrix"
    else:
        v = x
        where = ""
    ok = m_matrix_certificate(J, v)
    reason = None if ok else f"M-matrix certificate failed{where}"
    return CertificateReport(ok, res, reason)


# ---------------------------------------------------------------------------
# Initial points


def _initial_x(eq: MTensorEquation, cfg: SolverConfig) -> np.ndarray:
    n = eq.dim
    m = eq.order
    ones = np.ones(n)
    if cfg.initial_point == "explicit":
        x0 = np.asarray(cfg.initial_value, dtype=np.float64).copy()
        if x0.shape != (n,):
            raise ValueError(f"explicit initial point has length {x0.shape}, expected {n}")
        if (x0 <= 0).any():
            raise ValueError("explicit initial point must be strictly positive")
        return x0
    if cfg.initial_point == "constant-e":
        c = 0.1 if cfg.initial_value is None else float(cfg.initial_value)
        if c <= 0:
            raise ValueError("constant-e initial point needs a positive constant")
        return c * ones
    if cfg.initial_value is not None:
        eps = float(cfg.initial_value)
        if eps <= 0:
            raise ValueError("epsilon-e initial point needs a positive scalar")
        return eps * ones
    # Place the constant point just inside the region residual_y(y0) < b,
    # which for x0 = eps*e reads eps^(m-1) * (A e^(m-1))_i < 2 b_i rowwise.
    row = apply_vec(eq.tensor, ones)
    pos = row > 0
    if pos.any():
        eps = 0.9 * float(((2.0 * eq.b[pos]) / row[pos]).min()) ** (1.0 / (m - 1))
    else:
        eps = 1.0
    return eps * ones


def _feasible_initial_y(eq: MTensorEquation, cfg: SolverConfig):
    """Initial y with residual_y(y) < b, halving the point up to 60 times."""
    x0 = _initial_x(eq, cfg)
    m = eq.order
    for _ in range(61):
        y0 = x0 ** (m - 1)
        f0 = residual_y(eq, y0)
        if (f0 < eq.b).all():
            return y0, f0
        x0 = x0 / 2.0
    return None, None


def _trace_row(k, alpha, backtracks, e_norm, f_norm, y, keep, t=None, beta=None):
    return IterateTrace(
        k=k,
        alpha=alpha,
        backtracks=backtracks,
        e_norm=float(e_norm),
        f_norm=float(f_norm),
        min_y=float(y.min()),
        t=t,
        beta=beta,
        y=y.copy() if keep else None,
    )


def _finalize(report: SolverReport) -> SolverReport:
    report.order_estimate = estimate_order(report.residual_history)
    return report


# ---------------------------------------------------------------------------
# Inexact Newton method (strictly positive right-hand side)


def solve_inexact_newton(eq: MTensorEquation, cfg: SolverConfig | None = None) -> SolverReport:
    """Damped Newton iteration on the rescaled system for ``b > 0``.

    Returns a report whose status is ``Converged`` once the equation residual
    drops below ``cfg.tol``; instances whose right-hand side has zeros or
    negative entries are refused with status ``InvalidB`` (use the
    regularized method for zeros).
    """
    cfg = cfg if cfg is not None else SolverConfig()
    start = time.perf_counter()
    if eq.b_class != B_POSITIVE:
        return SolverReport(
            status=INVALID_B, x=None, iterations=0, ls_iterations=0,
            wall_time_s=time.perf_counter() - start,
            message=f"right-hand side classified {eq.b_class}",
        )

    m = eq.order
    y, f = _feasible_initial_y(eq, cfg)
    if y is None:
        return SolverReport(
            status=LINE_SEARCH_FAILED, x=None, iterations=0, ls_iterations=0,
            wall_time_s=time.perf_counter() - start,
            message="no feasible initial point after 60 halvings",
        )

    e = f / y
    e_sq = float(e @ e)
    f_norm = float(np.linalg.norm(f))
    res_hist = [f_norm]
    e_hist = [math.sqrt(e_sq)]
    trace = [_trace_row(0, None, 0, e_hist[0], f_norm, y, cfg.keep_iterates)]
    ls_total = 0
    status = MAX_ITERATIONS
    iterations = cfg.max_iter
    message = ""

    for k in range(cfg.max_iter):
        if f_norm <= cfg.tol:
            status, iterations = CONVERGED, k
            break
        M = residual_y_jacobian(eq, y) - np.diag(f / y)
        try:
            d = lu_solve(M, -f)
        except SingularSystemError as exc:
            status, iterations, message = SINGULAR_SYSTEM, k, str(exc)
            break

        alpha = 1.0
        backtracks = 0
        accepted = False
        while alpha >= ALPHA_MIN:
            y_new = y + alpha * d
            if (y_new > 0).all():
                f_new = residual_y(eq, y_new)
                e_new = f_new / y_new
                e_new_sq = float(e_new @ e_new)
                if e_new_sq <= (1 - 2 * cfg.sigma * alpha) * e_sq and (f_new < eq.b).all():
                    accepted = True
                    break
            alpha *= cfg.rho
            backtracks += 1
        if not accepted:
            status, iterations = LINE_SEARCH_FAILED, k
            message = "step length underflow in the line search"
            break
        ls_total += backtracks

        y, f, e_sq = y_new, f_new, e_new_sq
        f_norm = float(np.linalg.norm(f))
        res_hist.append(f_norm)
        e_hist.append(math.sqrt(e_sq))
        trace.append(_trace_row(k + 1, alpha, backtracks, e_hist[-1], f_norm, y, cfg.keep_iterates))
    else:
        if f_norm <= cfg.tol:
            status, iterations = CONVERGED, cfg.max_iter

    x = component_root(y, m - 1)
    return _finalize(SolverReport(
        status=status, x=x, iterations=iterations, ls_iterations=ls_total,
        wall_time_s=time.perf_counter() - start,
        residual_history=res_hist, e_history=e_hist,
        final_residual=f_norm, trace=trace, message=message,
    ))


# ---------------------------------------------------------------------------
# Regularized Newton method (nonnegative right-hand side)


def solve_regularized_newton(eq: MTensorEquation, cfg: SolverConfig | None = None) -> SolverReport:
    """Regularized Newton iteration for ``b >= 0``.

    Coordinates forced to zero by the block structure are removed up front
    (on by default via ``cfg.reduce_zeros``) and restored as exact zeros in
    the returned solution; on the remaining system every nonnegative solution
    is positive, and the appended parameter ``t`` keeps the Jacobian
    invertible along the run.  The update ``t_{k+1} = (1-a) t_k + a t_bar b_k``
    keeps ``0 < t_{k+1} <= t_k <= t_bar``.
    """
    cfg = cfg if cfg is not None else SolverConfig.regularized_defaults()
    start = time.perf_counter()
    if eq.b_class == B_INVALID:
        return SolverReport(
            status=INVALID_B, x=None, iterations=0, ls_iterations=0,
            wall_time_s=time.perf_counter() - start,
            message="right-hand side has negative components",
        )

    if eq.b_class == B_WITH_ZEROS and cfg.reduce_zeros:
        red = reduce_zero_pattern(eq)
    else:
        red = ReductionResult(eq, (), tuple(range(eq.dim)), eq)

    if red.reduced is None:
        # Every coordinate is zero-forced; the zero vector solves the equation.
        x = np.zeros(eq.dim)
        return _finalize(SolverReport(
            status=CONVERGED, x=x, iterations=0, ls_iterations=0,
            wall_time_s=time.perf_counter() - start,
            residual_history=[0.0], e_history=[0.0], t_history=[cfg.t_bar],
            final_residual=0.0,
            message="all coordinates fixed to zero by the reduction",
        ))

    work = red.reduced
    reduced_run = bool(red.zero_set)
    scale = work.omega if reduced_run else 1.0
    m = work.order

    x0 = _initial_x(work, cfg)
    y = x0 ** (m - 1)
    t = cfg.t_bar
    f = residual_y(work, y)
    e_bar = f / y + t * y
    e_sq = t * t + float(e_bar @ e_bar)
    f_norm = scale * float(np.linalg.norm(f))

    res_hist = [f_norm]
    e_hist = [math.sqrt(e_sq)]
    t_hist = [t]
    trace = [_trace_row(0, None, 0, e_hist[0], f_norm, y, cfg.keep_iterates, t=t, beta=None)]
    ls_total = 0
    status = MAX_ITERATIONS
    iterations = cfg.max_iter
    message = ""
    damp = 2 * cfg.sigma * (1 - cfg.gamma * cfg.t_bar)

    for k in range(cfg.max_iter):
        if f_norm <= cfg.tol:
            status, iterations = CONVERGED, k
            break
        beta = cfg.gamma * min(1.0, e_sq)
        dt = cfg.t_bar * beta - t
        J = (residual_y_jacobian(work, y) - np.diag(f / y)) / y[:, None]
        J[np.diag_indices_from(J)] += t
        try:
            dy = lu_solve(J, -e_bar - dt * y)
        except SingularSystemError as exc:
            status, iterations, message = SINGULAR_SYSTEM, k, str(exc)
            break

        theta = 0.5 * e_sq
        alpha = 1.0
        backtracks = 0
        accepted = False
        while alpha >= ALPHA_MIN:
            y_new = y + alpha * dy
            t_new = t + alpha * dt
            if (y_new > 0).all():
                f_new = residual_y(work, y_new)
                e_bar_new = f_new / y_new + t_new * y_new
                e_sq_new = t_new * t_new + float(e_bar_new @ e_bar_new)
                if 0.5 * e_sq_new <= (1 - damp * alpha) * theta:
                    accepted = True
                    break
            alpha *= cfg.rho
            backtracks += 1
        if not accepted:
            status, iterations = LINE_SEARCH_FAILED, k
            message = "step length underflow in the line search"
            break
        ls_total += backtracks

        y, t, f, e_bar, e_sq = y_new, t_new, f_new, e_bar_new, e_sq_new
        f_norm = scale * float(np.linalg.norm(f))
        res_hist.append(f_norm)
        e_hist.append(math.sqrt(e_sq))
        t_hist.append(t)
        trace.append(_trace_row(k + 1, alpha, backtracks, e_hist[-1], f_norm, y,
                                cfg.keep_iterates, t=t, beta=beta))
    else:
        if f_norm <= cfg.tol:
            status, iterations = CONVERGED, cfg.max_iter

    x_work = component_root(y, m - 1)
    x = embed_solution(red, x_work) if reduced_run else x_work
    final = float(np.linalg.norm(residual(eq, x)))
    return _finalize(SolverReport(
        status=status, x=x, iterations=iterations, ls_iterations=ls_total,
        wall_time_s=time.perf_counter() - start,
        residual_history=res_hist, e_history=e_hist, t_history=t_hist,
        final_residual=final, trace=trace, message=message,
    ))
