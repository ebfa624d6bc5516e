"""Dense storage and contraction kernels for order-m, dimension-n real tensors.

A tensor ``A = (a_{i1...im})`` is held as a C-ordered ``numpy`` array of shape
``(n,) * m``, so the flat view enumerates entries row-major over
``(i1, ..., im)``.  All file formats and error messages use 1-based indices;
internal storage is 0-based.

The two contraction products are

* ``apply_vec(A, x)`` with components ``sum_{i2..im} a_{i i2...im} x_{i2}...x_{im}``,
* ``apply_mat(A, x)`` with components ``sum_{i3..im} a_{i j i3...im} x_{i3}...x_{im}``,

evaluated as a chain of BLAS-backed ``tensordot`` passes over the trailing
axes in ascending index order.  Per output element this regroups the
lexicographic sum into partial sums; results match a naive nested-loop
evaluation to better than 1e-13 relative and are bit-reproducible within a
build.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

__all__ = [
    "DenseTensor",
    "apply_vec",
    "apply_mat",
    "semi_symmetrize",
    "identity_tensor",
    "row_sum_bound",
    "is_semi_symmetric",
    "write_tensor",
    "read_tensor",
    "write_vector",
    "read_vector",
]

#: Allowed symmetry tags, in increasing strength.  The tag is advisory
#: metadata; nothing is re-verified on construction.
SYMMETRY_TAGS = ("none", "semi-symmetric", "symmetric")

#: Default cap on the tensor order accepted by :func:`semi_symmetrize`,
#: guarding the (m-1)! permutation blow-up.
DEFAULT_ORDER_LIMIT = 6


class DenseTensor:
    """Immutable dense order-m, dimension-n real tensor.

    Parameters
    ----------
    array : array_like
        Entries with shape ``(n,) * m``; ``m >= 2`` and all axes equal.
    symmetry : str
        One of ``"none"``, ``"semi-symmetric"``, ``"symmetric"``.
    """

    __slots__ = ("array", "symmetry")

    def __init__(self, array, symmetry: str = "none"):
        arr = np.ascontiguousarray(array, dtype=np.float64)
        if arr.ndim < 2:
            raise ValueError(f"tensor order must be >= 2, got {arr.ndim}")
        n = arr.shape[0]
        if any(s != n for s in arr.shape):
            raise ValueError(f"all tensor axes must have equal length, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("tensor entries must be finite")
        if symmetry not in SYMMETRY_TAGS:
            raise ValueError(f"unknown symmetry tag {symmetry!r}")
        arr.flags.writeable = False
        self.array = arr
        self.symmetry = symmetry

    @property
    def order(self) -> int:
        return self.array.ndim

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    @property
    def entries(self) -> np.ndarray:
        """Flat row-major view of the entries (length ``n**m``)."""
        return self.array.reshape(-1)

    @classmethod
    def zeros(cls, m: int, n: int, symmetry: str = "none") -> "DenseTensor":
        if m < 2 or n < 1:
            raise ValueError(f"need order >= 2 and dimension >= 1, got ({m}, {n})")
        return cls(np.zeros((n,) * m), symmetry)

    def with_symmetry(self, symmetry: str) -> "DenseTensor":
        """Same entries under a different advisory tag (no copy)."""
        t = object.__new__(DenseTensor)
        t.array = self.array
        if symmetry not in SYMMETRY_TAGS:
            raise ValueError(f"unknown symmetry tag {symmetry!r}")
        t.symmetry = symmetry
        return t

    def scaled(self, factor: float) -> "DenseTensor":
        return DenseTensor(self.array * factor, self.symmetry)

    def __repr__(self):
        return f"DenseTensor(order={self.order}, dim={self.dim}, symmetry={self.symmetry!r})"


def _check_vector(A: DenseTensor, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.dim,):
        raise ValueError(f"vector length {x.shape} does not match tensor dimension {A.dim}")
    return x


def apply_vec(A: DenseTensor, x) -> np.ndarray:
    """Contract the trailing m-1 indices with ``x``: the vector ``A x^(m-1)``."""
    x = _check_vector(A, x)
    out = A.array
    for _ in range(A.order - 1):
        out = np.tensordot(out, x, axes=([out.ndim - 1], [0]))
    return out


def apply_mat(A: DenseTensor, x) -> np.ndarray:
    """Contract the trailing m-2 indices with ``x``: the n-by-n matrix ``A x^(m-2)``.

    For semi-symmetric ``A`` the contraction identity
    ``apply_mat(A, x) @ x == apply_vec(A, x)`` holds.
    """
    x = _check_vector(A, x)
    out = A.array
    for _ in range(A.order - 2):
        out = np.tensordot(out, x, axes=([out.ndim - 1], [0]))
    return out


def semi_symmetrize(A: DenseTensor, order_limit: int = DEFAULT_ORDER_LIMIT) -> DenseTensor:
    """Average over all permutations of the trailing m-1 indices.

    The result leaves ``apply_vec`` unchanged for every ``x`` and makes the
    Jacobian formula ``(m-1) A x^(m-2)`` valid.  Rejects orders above
    ``order_limit`` because the permutation count grows as (m-1)!.
    """
    m = A.order
    if m > order_limit:
        raise ValueError(f"order {m} exceeds the semi-symmetrization limit {order_limit}")
    if A.symmetry in ("semi-symmetric", "symmetric"):
        return A
    acc = np.zeros_like(A.array)
    for perm in itertools.permutations(range(1, m)):
        acc += A.array.transpose((0,) + perm)
    acc /= math.factorial(m - 1)
    return DenseTensor(acc, "semi-symmetric")


def identity_tensor(m: int, n: int) -> DenseTensor:
    """Diagonal entries one, all others zero; satisfies ``I x^(m-1) = x^[m-1]``."""
    if m < 2 or n < 1:
        raise ValueError(f"need order >= 2 and dimension >= 1, got ({m}, {n})")
    arr = np.zeros((n,) * m)
    arr[(np.arange(n),) * m] = 1.0
    return DenseTensor(arr, "symmetric")


def row_sum_bound(B: DenseTensor) -> float:
    """Upper bound on the spectral radius of a nonnegative tensor.

    Returns ``max_i (B e^(m-1))_i`` where ``e`` is the all-ones vector.  Any
    shift strictly above this value yields a strong M-tensor ``s I - B``.
    """
    if (B.array < 0).any():
        raise ValueError("row_sum_bound requires an entrywise nonnegative tensor")
    return float(apply_vec(B, np.ones(B.dim)).max())


def is_semi_symmetric(A: DenseTensor, tol: float = 0.0) -> bool:
    """Check invariance of the entries under trailing-index permutations."""
    m = A.order
    for perm in itertools.permutations(range(1, m)):
        if perm == tuple(range(1, m)):
            continue
        diff = np.abs(A.array - A.array.transpose((0,) + perm)).max()
        if diff > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Text formats: ".mtns" for tensors, ".vec" for vectors.  1-based indices,
# zero entries omitted.


def write_tensor(A: DenseTensor, path) -> None:
    """Write the ".mtns" format: header ``m n``, then ``i1 ... im value`` lines."""
    arr = A.array
    with open(path, "w") as fh:
        fh.write(f"{A.order} {A.dim}\n")
        nz = np.nonzero(arr)
        vals = arr[nz]
        for idx, v in zip(zip(*nz), vals):
            fh.write(" ".join(str(i + 1) for i in idx))
            fh.write(f" {v!r}\n")


def read_tensor(path, symmetry: str = "none") -> DenseTensor:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected header 'm n'")
        m, n = int(header[0]), int(header[1])
        arr = np.zeros((n,) * m)
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != m + 1:
                raise ValueError(f"{path}:{lineno}: expected {m} indices and a value")
            idx = tuple(int(p) - 1 for p in parts[:m])
            if any(i < 0 or i >= n for i in idx):
                raise ValueError(f"{path}:{lineno}: index out of range 1..{n}")
            arr[idx] = float(parts[m])
    return DenseTensor(arr, symmetry)


def write_vector(v, path) -> None:
    """Write the ".vec" format: header ``n``, then one value per line."""
    v = np.asarray(v, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write(f"{v.size}\n")
        for x in v:
            fh.write(f"{x!r}\n")


def read_vector(path) -> np.ndarray:
    with open(path) as fh:
        n = int(fh.readline())
        vals = [float(fh.readline()) for _ in range(n)]
    return np.array(vals)
