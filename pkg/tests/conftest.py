"""Shared test oracles, kept independent of the library's own kernels."""

import itertools
import math

import numpy as np
import pytest

from mteq import RngStream


def naive_vec(arr: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Lexicographic nested-loop evaluation of the order-(m-1) contraction."""
    m, n = arr.ndim, arr.shape[0]
    idx_list = list(itertools.product(range(n), repeat=m - 1))
    xprod = [math.prod(x[j] for j in idx) for idx in idx_list]
    out = np.zeros(n)
    for i in range(n):
        s = 0.0
        row = arr[i]
        for idx, p in zip(idx_list, xprod):
            s += row[idx] * p
        out[i] = s
    return out


def naive_mat(arr: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Nested-loop evaluation of the order-(m-2) contraction."""
    m, n = arr.ndim, arr.shape[0]
    idx_list = list(itertools.product(range(n), repeat=m - 2))
    xprod = [math.prod(x[j] for j in idx) for idx in idx_list]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s = 0.0
            block = arr[i, j]
            for idx, p in zip(idx_list, xprod):
                s += block[idx] * p
            out[i, j] = s
    return out


def central_fd(func, z, step_scale=1e-6):
    """Central finite-difference Jacobian, step 1e-6 * (1 + |z_i|)."""
    z = np.asarray(z, dtype=np.float64)
    f0 = np.asarray(func(z))
    J = np.zeros((f0.size, z.size))
    for i in range(z.size):
        h = step_scale * (1.0 + abs(z[i]))
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        J[:, i] = (np.asarray(func(zp)) - np.asarray(func(zm))) / (2.0 * h)
    return J


def subset_zero_oracle(eq) -> tuple:
    """Maximal admissible zero set by enumerating every subset of the b-zeros."""
    zeros = [int(i) for i in np.flatnonzero(eq.b == 0)]
    arr = eq.tensor.array
    n, m = eq.dim, eq.order
    best = ()
    for r in range(len(zeros) + 1):
        for subset in itertools.combinations(zeros, r):
            outside = [i for i in range(n) if i not in subset]
            ok = True
            for i in subset:
                for idx in itertools.product(outside, repeat=m - 1):
                    if arr[(i,) + idx] != 0.0:
                        ok = False
                        break
                if not ok:
                    break
            if ok and len(subset) > len(best):
                best = subset
    return tuple(sorted(best))


@pytest.fixture
def rng():
    return RngStream(20240817, 0).generator()


def stream(j: int, seed: int = 20240817) -> np.random.Generator:
    return RngStream(seed, j).generator()
