"""Seeded generators for the five benchmark problems.

Every generator is a pure function of its parameters and the random stream:
tensor entries are drawn first, then the right-hand side, so equal
``(seed, stream)`` pairs reproduce instances bit for bit.  Random tensors are
built as ``A = s I - B`` with ``B >= 0`` and the shift ``s`` placed above the
row-sum bound on the spectral radius, which makes ``A`` a strong M-tensor.

Problem catalogue:

1. ``B`` symmetric with uniform(0,1) entries, ``s`` at 1.01 times the bound.
2. ``B`` deterministic, ``b_{i1...im} = |sin(i1 + ... + im)|``, ``s = n^(m-1)``.
3. Finite-difference discretization of a gravity boundary value problem
   (order 4, deterministic, huge interior right-hand side).
4. ``B`` uniform(0,1) without symmetrization; the assembled tensor is
   semi-symmetrized.
5. ``B`` strictly lower triangular uniform(0,1), ``s`` at half the bound
   (still a strong M-tensor: a strictly triangular nonnegative tensor has
   spectral radius zero); semi-symmetrized.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import MTensorEquation, make_equation
from .tensor import DenseTensor, identity_tensor, row_sum_bound, semi_symmetrize

__all__ = [
    "RngStream",
    "strong_m_tensor",
    "symmetrize_full",
    "gen_problem1",
    "gen_problem2",
    "gen_problem3",
    "gen_problem4",
    "gen_problem5",
    "gen_b_with_zeros",
    "gen_reducible",
    "make_instance",
]

#: Refuse dense tensors beyond this entry count.
SIZE_LIMIT = 10 ** 8

#: Fraction of components zeroed in expectation by the thresholding recipe.
ZERO_THRESHOLD = 0.6


@dataclass(frozen=True)
class RngStream:
    """Seedable PCG64 stream: identical (seed, stream) gives identical draws.

    Uniform(0,1) draws come from ``numpy.random.Generator.random`` and carry
    53 significant bits.  Distinct stream indices give statistically
    independent sequences, so benchmark trials can run in any order.
    """

    seed: int
    stream: int = 0
    algorithm: str = "pcg64"

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


def _check_size(m: int, n: int) -> None:
    if m < 2 or n < 1:
        raise ValueError(f"need order >= 2 and dimension >= 1, got ({m}, {n})")
    if n ** m > SIZE_LIMIT:
        raise ValueError(f"dense tensor with {n}^{m} entries exceeds the size limit {SIZE_LIMIT}")


def strong_m_tensor(B: DenseTensor, margin: float) -> DenseTensor:
    """Assemble ``s I - B`` with ``s = margin * row_sum_bound(B)``."""
    s = margin * row_sum_bound(B)
    return DenseTensor(s * identity_tensor(B.order, B.dim).array - B.array, B.symmetry)


def symmetrize_full(B: DenseTensor) -> DenseTensor:
    """Average over all m! index permutations; entries stay in the convex hull."""
    m = B.order
    acc = np.zeros_like(B.array)
    for perm in itertools.permutations(range(m)):
        acc += B.array.transpose(perm)
    return DenseTensor(acc / math.factorial(m), "symmetric")


def _draw_b(n: int, rng: np.random.Generator, b_mode: str, problem: int) -> np.ndarray:
    if b_mode == "positive":
        return rng.random(n)
    if b_mode == "zeros":
        b = gen_b_with_zeros(n, rng)
        if problem == 5:
            b[0] = 0.1
        return b
    raise ValueError(f"unknown b mode {b_mode!r}")


def gen_b_with_zeros(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform(0,1) draws thresholded to zero above 0.6 (about 40% zeros)."""
    b0 = rng.random(n)
    return np.where(b0 <= ZERO_THRESHOLD, b0, 0.0)


def gen_problem1(m: int, n: int, rng: np.random.Generator,
                 b_mode: str = "positive") -> MTensorEquation:
    """Symmetric uniform(0,1) tensor, shift 1% above the row-sum bound."""
    _check_size(m, n)
    B = symmetrize_full(DenseTensor(rng.random((n,) * m)))
    A = strong_m_tensor(B, 1.01)
    return make_equation(A, _draw_b(n, rng, b_mode, 1), symmetrize=False)


def gen_problem2(m: int, n: int, rng: np.random.Generator,
                 b_mode: str = "positive") -> MTensorEquation:
    """Deterministic tensor with entries |sin(index sum)|, shift ``n^(m-1)``."""
    _check_size(m, n)
    index_sum = np.indices((n,) * m).sum(axis=0) + m  # 1-based indices
    B = DenseTensor(np.abs(np.sin(index_sum.astype(np.float64))), "symmetric")
    s = float(n) ** (m - 1)
    A = DenseTensor(s * identity_tensor(m, n).array - B.array, "symmetric")
    return make_equation(A, _draw_b(n, rng, b_mode, 2), symmetrize=False)


def gen_problem3(n: int, c0: float = 1.0, c1: float = 1.0) -> MTensorEquation:
    """Fourth-order discretization of ``x'' = -GM/x^2`` with fixed endpoints.

    Interior rows carry the stencil ``2 x_i^3 - x_i^2 x_{i-1} - x_i^2 x_{i+1}``
    with the off-diagonal weight split as -1/3 over the three trailing
    positions, which makes the tensor semi-symmetric as written.  The
    right-hand side is ``GM / (n-1)^2`` in the interior and ``c0^3, c1^3`` at
    the ends.
    """
    if n < 3:
        raise ValueError("the discretization needs at least 3 grid points")
    _check_size(4, n)
    arr = np.zeros((n,) * 4)
    arr[0, 0, 0, 0] = 1.0
    arr[n - 1, n - 1, n - 1, n - 1] = 1.0
    for i in range(1, n - 1):
        arr[i, i, i, i] = 2.0
        for j in (i - 1, i + 1):
            arr[i, j, i, i] = -1.0 / 3.0
            arr[i, i, j, i] = -1.0 / 3.0
            arr[i, i, i, j] = -1.0 / 3.0
    G = 6.67e-11
    M_EARTH = 5.98e24
    b = np.full(n, G * M_EARTH / (n - 1) ** 2)
    b[0] = c0 ** 3
    b[n - 1] = c1 ** 3
    return make_equation(DenseTensor(arr, "semi-symmetric"), b, symmetrize=False)


def gen_problem4(m: int, n: int, rng: np.random.Generator,
                 b_mode: str = "positive") -> MTensorEquation:
    """Non-symmetric uniform(0,1) tensor; semi-symmetrized after assembly."""
    _check_size(m, n)
    B = DenseTensor(rng.random((n,) * m))
    A = strong_m_tensor(B, 1.01)
    return make_equation(A, _draw_b(n, rng, b_mode, 4), symmetrize=True)


def gen_problem5(m: int, n: int, rng: np.random.Generator,
                 b_mode: str = "positive") -> MTensorEquation:
    """Strictly lower triangular tensor, shift at half the row-sum bound.

    With ``b_mode="zeros"`` the first component is forced to 0.1 afterwards;
    row 1 of the tensor couples only to ``x_1``, so a zero there would force
    ``x_1 = 0`` and the solution would not be positive.
    """
    _check_size(m, n)
    arr = np.zeros((n,) * m)
    for i1 in range(1, n):
        arr[i1][np.ix_(*([range(i1)] * (m - 1)))] = rng.random((i1,) * (m - 1))
    B = DenseTensor(arr)
    A = strong_m_tensor(B, 0.5)
    return make_equation(A, _draw_b(n, rng, b_mode, 5), symmetrize=True)


def gen_reducible(m: int, n: int, rng: np.random.Generator,
                  max_zero: int = 4) -> MTensorEquation:
    """Instance whose right-hand side zeros partly force solution zeros.

    A target index set is chosen and the tensor rows over it are blanked
    wherever every trailing index lies outside the set, which makes the set
    admissible for the zero-pattern reduction.  Extra zero components with
    untouched rows may be added to the right-hand side; those cannot be
    reduced away and exercise the fixed-point deletion.
    """
    _check_size(m, n)
    if not 1 <= max_zero < n:
        raise ValueError("need 1 <= max_zero < n")
    arr = rng.random((n,) * m)
    n_zero = int(rng.integers(1, max_zero + 1))
    zero_idx = rng.permutation(n)[:n_zero]
    forced = zero_idx[: max(1, n_zero // 2 + n_zero % 2)]
    extra = zero_idx[forced.size:]
    outside = np.setdiff1d(np.arange(n), forced)
    if outside.size:
        for i in forced:
            arr[i][np.ix_(*([outside] * (m - 1)))] = 0.0
    B = semi_symmetrize(DenseTensor(arr))
    A = strong_m_tensor(B, 1.01)
    b = rng.random(n)
    b[zero_idx] = 0.0
    return make_equation(A, b, symmetrize=False)


def make_instance(problem: int, m: int, n: int, rng: np.random.Generator,
                  b_mode: str = "positive", c0: float = 1.0, c1: float = 1.0) -> MTensorEquation:
    """Dispatch on the problem number (Problem 3 keeps its own right-hand side)."""
    if problem == 1:
        return gen_problem1(m, n, rng, b_mode)
    if problem == 2:
        return gen_problem2(m, n, rng, b_mode)
    if problem == 3:
        if m != 4:
            raise ValueError("problem 3 is a fourth-order discretization; use --order 4")
        if b_mode != "positive":
            raise ValueError("problem 3 defines its own right-hand side")
        return gen_problem3(n, c0, c1)
    if problem == 4:
        return gen_problem4(m, n, rng, b_mode)
    if problem == 5:
        return gen_problem5(m, n, rng, b_mode)
    raise ValueError(f"unknown problem {problem}; expected 1..5")
