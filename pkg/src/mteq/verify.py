"""Invariant battery over seeded instances, behind the ``verify`` subcommand.

Each check returns (name, ok, detail).  The checks mirror the package's
mathematical contracts with independent evaluations: contractions against
naive nested loops, Jacobians against central finite differences, the
zero-pattern reduction against subset enumeration, and solver runs against
their trace invariants.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .linalg import lu_solve, m_matrix_certificate
from .model import (
    B_POSITIVE,
    make_equation,
    newton_matrix,
    reduce_zero_pattern,
    regularized_jacobian,
    regularized_residual,
    residual,
    residual_y,
    residual_y_jacobian,
    scaled_residual_jacobian,
)
from .problems import RngStream, gen_problem1, gen_reducible, make_instance
from .solvers import (
    CONVERGED,
    SolverConfig,
    SolverReport,
    solve_inexact_newton,
    solve_regularized_newton,
)
from .tensor import DenseTensor, apply_mat, apply_vec, semi_symmetrize

__all__ = [
    "naive_apply_vec",
    "naive_apply_mat",
    "fd_jacobian",
    "brute_force_zero_set",
    "check_trace_invariants",
    "run_all_checks",
]


def naive_apply_vec(A: DenseTensor, x) -> np.ndarray:
    """Nested-loop reference for apply_vec, lexicographic summation order."""
    m, n = A.order, A.dim
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for idx in itertools.product(range(n), repeat=m - 1):
            v = A.array[(i,) + idx]
            if v != 0.0:
                p = v
                for j in idx:
                    p *= x[j]
                acc += p
        out[i] = acc
    return out


def naive_apply_mat(A: DenseTensor, x) -> np.ndarray:
    """Nested-loop reference for apply_mat."""
    m, n = A.order, A.dim
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for idx in itertools.product(range(n), repeat=m - 2):
                v = A.array[(i, j) + idx]
                if v != 0.0:
                    p = v
                    for k in idx:
                        p *= x[k]
                    acc += p
            out[i, j] = acc
    return out


def fd_jacobian(func, z, step_scale: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian with per-component steps."""
    z = np.asarray(z, dtype=np.float64)
    f0 = np.asarray(func(z))
    J = np.zeros((f0.size, z.size))
    for i in range(z.size):
        h = step_scale * (1.0 + abs(z[i]))
        zp = z.copy()
        zm = z.copy()
        zp[i] += h
        zm[i] -= h
        J[:, i] = (np.asarray(func(zp)) - np.asarray(func(zm))) / (2 * h)
    return J


def brute_force_zero_set(eq) -> tuple:
    """Maximal admissible zero set by enumerating all subsets of the b-zeros."""
    zeros = [int(i) for i in np.flatnonzero(eq.b == 0)]
    arr = eq.tensor.array
    n = eq.dim
    best = ()
    for r in range(len(zeros) + 1):
        for subset in itertools.combinations(zeros, r):
            inside = set(subset)
            outside = [i for i in range(n) if i not in inside]
            ok = True
            for i in subset:
                if outside and arr[i][np.ix_(*([outside] * (eq.order - 1)))].any():
                    ok = False
                    break
            if ok and len(subset) > len(best):
                best = subset
    return tuple(sorted(best))


def check_trace_invariants(report: SolverReport, cfg: SolverConfig, kind: str,
                           slack: float = 1e-12) -> list:
    """Violations of the per-iterate guarantees recorded in a solver trace.

    Checked: iterate positivity; the line-search decrease of the rescaled
    norm at every accepted step; for the regularized method additionally
    ``0 < t_{k+1} <= t_k <= t_bar`` and the monotone decrease of the merit
    value.  Returns a list of violation strings (empty when clean).
    """
    bad = []
    rows = report.trace
    for row in rows:
        if not row.min_y > 0:
            bad.append(f"k={row.k}: iterate not positive (min y = {row.min_y})")
    for prev, row in zip(rows, rows[1:]):
        if kind == "inexact":
            bound = math.sqrt(max(0.0, 1 - 2 * cfg.sigma * row.alpha)) * prev.e_norm
            if row.e_norm > bound * (1 + slack) + slack:
                bad.append(f"k={row.k}: rescaled norm {row.e_norm} above bound {bound}")
        else:
            damp = 2 * cfg.sigma * (1 - cfg.gamma * cfg.t_bar)
            bound = math.sqrt(max(0.0, 1 - damp * row.alpha)) * prev.e_norm
            if row.e_norm > bound * (1 + slack) + slack:
                bad.append(f"k={row.k}: merit norm {row.e_norm} above bound {bound}")
            if not (0 < row.t <= prev.t * (1 + slack) and row.t <= cfg.t_bar * (1 + slack)):
                bad.append(f"k={row.k}: t sequence violation ({prev.t} -> {row.t})")
    return bad


# ---------------------------------------------------------------------------
# Check battery


def _check_contractions(quick: bool):
    rng = RngStream(2024, 0).generator()
    worst = 0.0
    reps = 20 if quick else 100
    for m in range(2, 6):
        for n in range(1, 5):
            for _ in range(reps if n > 1 else 3):
                A = DenseTensor(rng.standard_normal((n,) * m))
                x = rng.standard_normal(n)
                ref = naive_apply_vec(A, x)
                got = apply_vec(A, x)
                worst = max(worst, float(np.abs(got - ref).max() / (1 + np.abs(ref).max())))
    return worst <= 1e-13, f"max contraction deviation {worst:.2e}"


def _check_semi_symmetrize(quick: bool):
    rng = RngStream(2024, 1).generator()
    worst = 0.0
    for _ in range(10 if quick else 40):
        A = DenseTensor(rng.standard_normal((4,) * 3))
        S = semi_symmetrize(A)
        x = rng.standard_normal(4)
        a, b = apply_vec(A, x), apply_vec(S, x)
        worst = max(worst, float(np.abs(a - b).max() / (1 + np.abs(a).max())))
        again = semi_symmetrize(S)
        if not np.array_equal(again.array, S.array):
            return False, "semi_symmetrize is not idempotent"
    return worst <= 1e-13, f"max apply_vec change {worst:.2e}"


def _random_positive_instance(m, n, stream):
    rng = RngStream(99, stream).generator()
    return gen_problem1(m, n, rng), rng


def _check_identities(quick: bool):
    worst_j, worst_m = 0.0, 0.0
    cells = [(3, 10), (4, 10), (5, 5)]
    reps = 10 if quick else 100
    for ci, (m, n) in enumerate(cells):
        eq, rng = _random_positive_instance(m, n, ci)
        for _ in range(reps):
            y = rng.random(n) + 0.1
            f = residual_y(eq, y)
            J = residual_y_jacobian(eq, y)
            lhs = J @ y
            rhs = f + eq.b
            worst_j = max(worst_j, float(np.abs(lhs - rhs).max() / (1 + np.abs(rhs).max())))
            Mv = newton_matrix(eq, y) @ y
            worst_m = max(worst_m, float(np.abs(Mv - eq.b).max() / (1 + np.abs(eq.b).max())))
    ok = worst_j <= 1e-12 and worst_m <= 1e-12
    return ok, f"Jacobian identity {worst_j:.2e}, Newton matrix identity {worst_m:.2e}"


def _check_certificates(quick: bool):
    reps = 20 if quick else 100
    for ci, (m, n) in enumerate([(3, 10), (4, 10), (5, 5)]):
        eq, rng = _random_positive_instance(m, n, 10 + ci)
        for _ in range(reps):
            y = rng.random(n) + 0.05
            if not m_matrix_certificate(newton_matrix(eq, y), y):
                return False, f"Newton matrix certificate failed at ({m},{n})"
            t = 10.0 ** rng.uniform(-4, -1)
            J = scaled_residual_jacobian(eq, y) + t * np.eye(n)
            if not m_matrix_certificate(J, y):
                return False, f"regularized certificate failed at ({m},{n})"
    return True, "all sampled points certified"


def _check_fd_jacobians(quick: bool):
    worst = 0.0
    reps = 5 if quick else 20
    for ci, (m, n) in enumerate([(3, 10), (4, 10), (5, 5)]):
        eq, rng = _random_positive_instance(m, n, 20 + ci)
        for _ in range(reps):
            y = rng.random(n) + 0.2
            J = residual_y_jacobian(eq, y)
            Jfd = fd_jacobian(lambda v: residual_y(eq, v), y)
            worst = max(worst, float(np.abs(J - Jfd).max() / (1 + np.abs(J).max())))
            t = 0.01
            z = np.concatenate(([t], y))
            Jr = regularized_jacobian(eq, t, y)
            Jrfd = fd_jacobian(lambda v: regularized_residual(eq, v[0], v[1:]), z)
            worst = max(worst, float(np.abs(Jr - Jrfd).max() / (1 + np.abs(Jr).max())))
    return worst <= 1e-6, f"max finite-difference deviation {worst:.2e}"


def _check_reduction(quick: bool):
    reps = 30 if quick else 200
    for j in range(reps):
        rng = RngStream(7, j).generator()
        n = int(rng.integers(3, 7))
        eq = gen_reducible(3, n, rng, max_zero=min(4, n - 1))
        red = reduce_zero_pattern(eq)
        oracle = brute_force_zero_set(eq)
        if tuple(red.zero_set) != oracle:
            return False, f"stream {j}: reduction {red.zero_set} != oracle {oracle}"
    return True, f"{reps} reducible instances match the subset-enumeration oracle"


def _check_solver_traces(quick: bool):
    problems = [(1, 3, 8, "positive"), (5, 3, 8, "zeros")]
    for problem, m, n, b_mode in problems:
        for j in range(3 if quick else 10):
            rng = RngStream(17, j).generator()
            eq = make_instance(problem, m, n, rng, b_mode=b_mode)
            if eq.b_class == B_POSITIVE:
                cfg = SolverConfig(keep_iterates=True)
                rep = solve_inexact_newton(eq, cfg)
                if rep.status != CONVERGED:
                    return False, f"inexact failed on problem {problem} stream {j}: {rep.status}"
                bad = check_trace_invariants(rep, cfg, "inexact")
                if bad:
                    return False, f"inexact trace: {bad[0]}"
                band = all((residual_y(eq, row.y) < eq.b).all() for row in rep.trace)
                if not band:
                    return False, f"feasibility band broken on problem {problem} stream {j}"
            cfg = SolverConfig.regularized_defaults()
            rep = solve_regularized_newton(eq, cfg)
            if rep.status != CONVERGED:
                return False, f"regularized failed on problem {problem} stream {j}: {rep.status}"
            bad = check_trace_invariants(rep, cfg, "regularized")
            if bad:
                return False, f"regularized trace: {bad[0]}"
    return True, "trace invariants hold on sampled runs"


def _check_homogeneity(quick: bool):
    rng = RngStream(31, 0).generator()
    worst = 0.0
    for _ in range(10 if quick else 50):
        A = DenseTensor(rng.standard_normal((3,) * 4))
        x = rng.standard_normal(3)
        base = apply_vec(A, x)
        for tfac in (0.5, 2.0):
            got = apply_vec(A, tfac * x)
            want = tfac ** 3 * base
            worst = max(worst, float(np.abs(got - want).max() / (1 + np.abs(want).max())))
    return worst <= 1e-12, f"max homogeneity deviation {worst:.2e}"


def _check_lu(quick: bool):
    rng = RngStream(41, 0).generator()
    worst = 0.0
    reps = 100 if quick else 1000
    for i in range(reps):
        n = int(rng.integers(1, 60)) if i % 10 else int(rng.integers(200, 501))
        M = rng.standard_normal((n, n)) + n * np.eye(n)
        rhs = rng.standard_normal(n)
        d = lu_solve(M, rhs)
        r = np.linalg.norm(M @ d - rhs) / (1 + np.linalg.norm(rhs))
        worst = max(worst, float(r))
    return worst <= 1e-10, f"max solve residual {worst:.2e} over {reps} systems"


ALL_CHECKS = [
    ("contraction-oracle", _check_contractions),
    ("semi-symmetrize", _check_semi_symmetrize),
    ("homogeneity", _check_homogeneity),
    ("lu-residuals", _check_lu),
    ("algebraic-identities", _check_identities),
    ("m-matrix-certificates", _check_certificates),
    ("finite-difference-jacobians", _check_fd_jacobians),
    ("zero-pattern-reduction", _check_reduction),
    ("solver-trace-invariants", _check_solver_traces),
]


def run_all_checks(quick: bool = False):
    """Run the battery; yields (name, ok, detail) per check."""
    for name, fn in ALL_CHECKS:
        try:
            ok, detail = fn(quick)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        yield name, ok, detail
