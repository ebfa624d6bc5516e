"""Problem instances, transformed residual maps, and the zero-pattern reduction.

An equation instance stores the scaled pair ``(A/w, b/w)`` where ``w`` is the
largest absolute entry of the original tensor and right-hand side, so the
solver always sees data with unit infinity norm.  Solutions are unaffected by
the scaling.

Working in the powered variable ``y = x^[m-1]`` (componentwise), the maps are

* ``residual(eq, x)      = A x^(m-1) - b``                      (scaled data)
* ``residual_y(eq, y)    = residual(eq, y^[1/(m-1)])``
* ``scaled_residual(eq, y) = residual_y(eq, y) / y``

together with their Jacobians, the Newton system matrix, the largest step
preserving ``b - alpha * residual_y > 0``, and the regularized system that
appends a positive parameter ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import (
    DenseTensor,
    apply_mat,
    apply_vec,
    read_tensor,
    read_vector,
    semi_symmetrize,
    write_tensor,
    write_vector,
)

__all__ = [
    "MTensorEquation",
    "ReductionResult",
    "B_POSITIVE",
    "B_WITH_ZEROS",
    "B_INVALID",
    "make_equation",
    "component_root",
    "residual",
    "residual_y",
    "residual_y_jacobian",
    "scaled_residual",
    "scaled_residual_jacobian",
    "newton_matrix",
    "max_feasible_step",
    "regularized_residual",
    "regularized_jacobian",
    "reduce_zero_pattern",
    "embed_solution",
    "save_equation",
    "load_equation",
]

B_POSITIVE = "strictly-positive"
B_WITH_ZEROS = "nonnegative-with-zeros"
B_INVALID = "invalid"

#: Components of y below this are rejected rather than mapped to subnormals.
_Y_FLOOR = 1e-300


@dataclass(frozen=True)
class MTensorEquation:
    """Scaled instance of ``A x^(m-1) = b``.

    ``tensor`` and ``b`` hold the scaled data; ``omega`` is the scale factor,
    so the original instance is ``(omega * tensor, omega * b)``.
    """

    tensor: DenseTensor
    b: np.ndarray
    omega: float
    b_class: str

    @property
    def order(self) -> int:
        return self.tensor.order

    @property
    def dim(self) -> int:
        return self.tensor.dim


@dataclass(frozen=True)
class ReductionResult:
    """Outcome of the zero-pattern reduction.

    ``zero_set`` lists the coordinates forced to zero (sorted, 0-based),
    ``support`` the complement.  ``reduced`` is the equation on the support
    coordinates (``None`` when the support is empty), built from the principal
    subtensor and re-scaled.
    """

    equation: MTensorEquation
    zero_set: tuple
    support: tuple
    reduced: "MTensorEquation | None"


def classify_b(b: np.ndarray) -> str:
    if (b < 0).any():
        return B_INVALID
    if (b == 0).any():
        return B_WITH_ZEROS
    return B_POSITIVE


def make_equation(A: DenseTensor, b, symmetrize: bool = False) -> MTensorEquation:
    """Build a scaled instance; optionally semi-symmetrize the tensor first.

    Scaling divides the (possibly symmetrized) tensor and ``b`` by the largest
    absolute entry among both, so ``max(|A|, |b|) = 1`` afterwards.  A right
    hand side with negative components is classified ``"invalid"`` here and
    refused later by the solvers; classification never raises.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.dim,):
        raise ValueError(f"b length {b.shape} does not match tensor dimension {A.dim}")
    if not np.isfinite(b).all():
        raise ValueError("b must be finite")
    if symmetrize:
        A = semi_symmetrize(A)
    omega = max(float(np.abs(A.array).max()), float(np.abs(b).max()))
    if omega == 0.0:
        omega = 1.0
    scaled = A.scaled(1.0 / omega) if omega != 1.0 else A
    bs = b / omega
    bs.flags.writeable = False
    return MTensorEquation(tensor=scaled, b=bs, omega=omega, b_class=classify_b(bs))


def component_root(v: np.ndarray, k: int) -> np.ndarray:
    """Componentwise k-th root of a strictly positive vector.

    Evaluated as ``exp(log(v) / k)``; rejects components at or below zero and
    anything under 1e-300 instead of producing subnormal garbage.
    """
    v = np.asarray(v, dtype=np.float64)
    if (v <= 0).any() or (v < _Y_FLOOR).any():
        raise ValueError("expected a strictly positive vector (components >= 1e-300)")
    return np.exp(np.log(v) / k)


def _check_positive_y(eq: MTensorEquation, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (eq.dim,):
        raise ValueError(f"y length {y.shape} does not match dimension {eq.dim}")
    if (y <= 0).any() or (y < _Y_FLOOR).any():
        raise ValueError("y must be strictly positive (components >= 1e-300)")
    return y


def residual(eq: MTensorEquation, x) -> np.ndarray:
    """``A x^(m-1) - b`` on the scaled data."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (eq.dim,):
        raise ValueError(f"x length {x.shape} does not match dimension {eq.dim}")
    return apply_vec(eq.tensor, x) - eq.b


def residual_y(eq: MTensorEquation, y) -> np.ndarray:
    """Residual at ``x = y^[1/(m-1)]`` for strictly positive ``y``."""
    y = _check_positive_y(eq, y)
    return residual(eq, component_root(y, eq.order - 1))


def residual_y_jacobian(eq: MTensorEquation, y) -> np.ndarray:
    """Jacobian of :func:`residual_y`; requires a semi-symmetric tensor.

    Equals ``apply_mat(A, x)`` column-scaled by ``x / y`` with
    ``x = y^[1/(m-1)]``; the chain-rule factor 1/(m-1) cancels against the
    (m-1) of the directional derivative.  Satisfies
    ``J @ y = residual_y(eq, y) + b``.
    """
    y = _check_positive_y(eq, y)
    x = component_root(y, eq.order - 1)
    return apply_mat(eq.tensor, x) * (x / y)[None, :]


def scaled_residual(eq: MTensorEquation, y) -> np.ndarray:
    """Componentwise ``residual_y(eq, y) / y``; zero exactly at positive roots."""
    y = _check_positive_y(eq, y)
    return residual_y(eq, y) / y


def scaled_residual_jacobian(eq: MTensorEquation, y) -> np.ndarray:
    """Jacobian of :func:`scaled_residual`; satisfies ``J @ y = b / y``.

    A Z-matrix for every positive ``y``; with ``b > 0`` it is a nonsingular
    M-matrix, which is what makes the Newton subproblem solvable at interior
    iterates.
    """
    y = _check_positive_y(eq, y)
    return newton_matrix(eq, y) / y[:, None]


def newton_matrix(eq: MTensorEquation, y) -> np.ndarray:
    """System matrix of the Newton step in ``y``.

    ``M(y) = residual_y_jacobian(y) - diag(residual_y(y) / y)``; satisfies
    ``M(y) @ y = b`` up to roundoff, so for ``b > 0`` the pair ``(M(y), y)``
    passes :func:`mteq.linalg.m_matrix_certificate`.
    """
    y = _check_positive_y(eq, y)
    f = residual_y(eq, y)
    return residual_y_jacobian(eq, y) - np.diag(f / y)


def max_feasible_step(eq: MTensorEquation, y) -> float:
    """Largest step bound ``min{b_i / f_i : f_i > 0}`` at ``f = residual_y(y)``.

    Any step length below the bound keeps ``b - alpha * f > 0`` and hence the
    next iterate positive.  Returns ``inf`` when no component of ``f`` is
    positive.
    """
    y = _check_positive_y(eq, y)
    f = residual_y(eq, y)
    pos = f > 0
    if not pos.any():
        return float("inf")
    return float((eq.b[pos] / f[pos]).min())


def regularized_residual(eq: MTensorEquation, t: float, y) -> np.ndarray:
    """The (n+1)-vector ``(t, residual_y(y)/y + t*y)`` for ``t > 0``, ``y > 0``."""
    if t <= 0:
        raise ValueError("t must be strictly positive")
    y = _check_positive_y(eq, y)
    return np.concatenate(([t], scaled_residual(eq, y) + t * y))


def regularized_jacobian(eq: MTensorEquation, t: float, y) -> np.ndarray:
    """Jacobian of :func:`regularized_residual`, shape (n+1, n+1).

    Block form ``[[1, 0], [y, J]]`` with ``J = scaled_residual_jacobian + t*I``.
    The lower-right block satisfies ``J @ y = b/y + t*y``, strictly positive
    for ``b >= 0`` and ``t > 0``, so it passes the M-matrix certificate with
    witness ``y`` even when ``b`` has zeros.
    """
    if t <= 0:
        raise ValueError("t must be strictly positive")
    y = _check_positive_y(eq, y)
    n = eq.dim
    J = np.zeros((n + 1, n + 1))
    J[0, 0] = 1.0
    J[1:, 0] = y
    J[1:, 1:] = scaled_residual_jacobian(eq, y) + t * np.eye(n)
    return J


# ---------------------------------------------------------------------------
# Zero-pattern reduction


def _admissible_rows(arr: np.ndarray, zero_set: list, support: list) -> list:
    """Indices i in zero_set whose row slice over support-only trailing indices is zero."""
    m = arr.ndim
    keep = []
    sub = np.ix_(*([support] * (m - 1)))
    for i in zero_set:
        if not support or not arr[i][sub].any():
            keep.append(i)
    return keep


def reduce_zero_pattern(eq: MTensorEquation) -> ReductionResult:
    """Largest zero set consistent with the tensor's block structure.

    Starting from the zero coordinates of ``b``, repeatedly drop any index
    whose tensor row has a nonzero entry with all trailing indices outside
    the candidate set; the deletion rule is monotone, so the fixed point is
    the unique maximal admissible set.  Coordinates in the result can be
    fixed to zero, leaving a lower-dimensional equation on the complement
    whose nonnegative solutions are positive.
    """
    if eq.b_class == B_INVALID:
        raise ValueError("cannot reduce an instance with negative b components")
    n = eq.dim
    zero_set = [int(i) for i in np.flatnonzero(eq.b == 0)]
    support = [i for i in range(n) if i not in zero_set]
    arr = eq.tensor.array
    while True:
        kept = _admissible_rows(arr, zero_set, support)
        if kept == zero_set:
            break
        dropped = set(zero_set) - set(kept)
        zero_set = kept
        support = sorted(set(support) | dropped)
    if not zero_set:
        return ReductionResult(eq, (), tuple(range(n)), eq)
    if not support:
        return ReductionResult(eq, tuple(zero_set), (), None)
    m = eq.order
    sub = eq.tensor.array[np.ix_(*([support] * m))]
    sub_tensor = DenseTensor(sub, eq.tensor.symmetry)
    reduced = make_equation(sub_tensor, eq.b[support], symmetrize=False)
    return ReductionResult(eq, tuple(zero_set), tuple(support), reduced)


def embed_solution(red: ReductionResult, x_reduced) -> np.ndarray:
    """Extend a positive solution of the reduced equation by exact zeros."""
    x_reduced = np.asarray(x_reduced, dtype=np.float64)
    if x_reduced.shape != (len(red.support),):
        raise ValueError(
            f"reduced solution length {x_reduced.shape} does not match support size {len(red.support)}"
        )
    x = np.zeros(red.equation.dim)
    x[list(red.support)] = x_reduced
    return x


# ---------------------------------------------------------------------------
# Serialization: .mtns + .vec + .meta header


def save_equation(eq: MTensorEquation, basepath) -> None:
    """Write ``basepath.mtns``, ``basepath.vec`` and a ``basepath.meta`` header."""
    base = str(basepath)
    write_tensor(eq.tensor, base + ".mtns")
    write_vector(eq.b, base + ".vec")
    with open(base + ".meta", "w") as fh:
        fh.write(f"omega={eq.omega!r}\n")
        fh.write(f"m={eq.order}\n")
        fh.write(f"n={eq.dim}\n")
        fh.write(f"b_class={eq.b_class}\n")
        fh.write(f"symmetry={eq.tensor.symmetry}\n")


def load_equation(basepath) -> MTensorEquation:
    base = str(basepath)
    meta = {}
    with open(base + ".meta") as fh:
        for line in fh:
            line = line.strip()
            if line:
                key, _, value = line.partition("=")
                meta[key] = value
    A = read_tensor(base + ".mtns", symmetry=meta.get("symmetry", "none"))
    b = read_vector(base + ".vec")
    if A.order != int(meta["m"]) or A.dim != int(meta["n"]):
        raise ValueError(f"{base}: header (m, n) disagrees with tensor file")
    if b.shape != (A.dim,):
        raise ValueError(f"{base}: vector length does not match tensor dimension")
    b.flags.writeable = False
    b_class = classify_b(b)
    if meta.get("b_class") not in (None, "", b_class):
        raise ValueError(f"{base}: stored b_class {meta['b_class']!r} does not match data")
    return MTensorEquation(tensor=A, b=b, omega=float(meta["omega"]), b_class=b_class)
