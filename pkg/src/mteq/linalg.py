"""Dense linear solves and M-matrix certificates for the Newton subproblems.

Matrices are plain ``numpy`` arrays of shape ``(n, n)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = ["SingularSystemError", "lu_solve", "is_z_matrix", "m_matrix_certificate"]

#: A pivot below PIVOT_RTOL * max|M| is treated as a numerically singular system.
PIVOT_RTOL = 1e-14


class SingularSystemError(RuntimeError):
    """The LU factorization met a pivot too small to trust."""


def lu_solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``M d = rhs`` by dense LU with partial pivoting.

    Raises
    ------
    SingularSystemError
        If any pivot magnitude falls below ``1e-14 * max|M|``.
    """
    M = np.asarray(M, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if rhs.shape != (M.shape[0],):
        raise ValueError(f"rhs length {rhs.shape} does not match matrix size {M.shape[0]}")
    scale = np.abs(M).max()
    if scale == 0.0:
        raise SingularSystemError("zero matrix")
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RTOL * scale:
        raise SingularSystemError(
            f"pivot {pivots.min():.3e} below threshold {PIVOT_RTOL * scale:.3e}"
        )
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def is_z_matrix(M: np.ndarray) -> bool:
    """True iff every off-diagonal entry is <= 0 (exact sign test)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    off = M - np.diag(np.diag(M))
    return bool((off <= 0).all())


def m_matrix_certificate(M: np.ndarray, v: np.ndarray) -> bool:
    """Certify a nonsingular M-matrix: Z-pattern and ``M v > 0`` for ``v > 0``.

    The positivity test is strict with no tolerance slack; the caller picks
    the witness vector ``v``.
    """
    v = np.asarray(v, dtype=np.float64)
    if (v <= 0).any():
        raise ValueError("witness vector must be strictly positive")
    return is_z_matrix(M) and bool((np.asarray(M) @ v > 0).all())
