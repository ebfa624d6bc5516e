"""Solvers and benchmarks for M-tensor equations ``A x^(m-1) = b``.

The package covers dense tensor contraction, the strong M-tensor problem
model with its zero-pattern dimensional reduction, an inexact Newton method
for strictly positive right-hand sides, a regularized Newton method for
nonnegative ones, seeded benchmark problem generators, and a benchmark
harness with CSV/JSON reporting.
"""

from .tensor import (
    DenseTensor,
    apply_vec,
    apply_mat,
    semi_symmetrize,
    identity_tensor,
    row_sum_bound,
    is_semi_symmetric,
    write_tensor,
    read_tensor,
    write_vector,
    read_vector,
)
from .linalg import SingularSystemError, lu_solve, is_z_matrix, m_matrix_certificate
from .model import (
    MTensorEquation,
    ReductionResult,
    B_POSITIVE,
    B_WITH_ZEROS,
    B_INVALID,
    make_equation,
    component_root,
    residual,
    residual_y,
    residual_y_jacobian,
    scaled_residual,
    scaled_residual_jacobian,
    newton_matrix,
    max_feasible_step,
    regularized_residual,
    regularized_jacobian,
    reduce_zero_pattern,
    embed_solution,
    save_equation,
    load_equation,
)
from .solvers import (
    CONVERGED,
    MAX_ITERATIONS,
    LINE_SEARCH_FAILED,
    SINGULAR_SYSTEM,
    INVALID_B,
    SolverConfig,
    SolverReport,
    IterateTrace,
    CertificateReport,
    solve_inexact_newton,
    solve_regularized_newton,
    estimate_order,
    certify_solution,
)
from .problems import (
    RngStream,
    strong_m_tensor,
    symmetrize_full,
    gen_problem1,
    gen_problem2,
    gen_problem3,
    gen_problem4,
    gen_problem5,
    gen_b_with_zeros,
    gen_reducible,
    make_instance,
)
from .bench import (
    BenchConfig,
    BenchSummary,
    TrialRecord,
    run_bench,
    write_csv,
    write_json_report,
    read_json_report,
)

__version__ = "0.1.0"
