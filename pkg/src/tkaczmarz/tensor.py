"""Dense third-order tensors and the t-product calculus.

A tensor is a float64 numpy array of shape ``(n1, n2, n3)``; entry
``a[i, j, k]`` is the (i, j, k) entry and ``a[:, :, k]`` the k-th frontal
slice.  Indices are 0-based throughout.

The t-product is evaluated as a circular convolution of frontal slices,

    (A * B)[:, :, c] = sum_m A[:, :, (c - m) mod n3] @ B[:, :, m],

which equals ``fold(bcirc(A) @ unfold(B))`` without forming ``bcirc(A)``.
"""
from typing import NamedTuple

import numpy as np

from . import kernels


class Dims3(NamedTuple):
    n1: int
    n2: int
    n3: int


def as_tensor(a):
    """Coerce ``a`` to a C-contiguous float64 third-order tensor."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={a.ndim}")
    if 0 in a.shape:
        raise ValueError(f"tensor extents must be positive, got {a.shape}")
    return a


def dims(a):
    return Dims3(*a.shape)


def _check_dims(n1, n2, n3):
    for n in (n1, n2, n3):
        if int(n) != n or n < 1:
            raise ValueError(f"tensor extents must be positive integers, got {(n1, n2, n3)}")
    return Dims3(int(n1), int(n2), int(n3))


def zeros(n1, n2, n3):
    return np.zeros(_check_dims(n1, n2, n3))


def identity_tensor(n, n3):
    """Identity tensor: frontal slice 0 is ``I_n``, the rest are zero."""
    _check_dims(n, n, n3)
    out = np.zeros((n, n, n3))
    out[:, :, 0] = np.eye(n)
    return out


def tprod(a, b, backend=None):
    """t-product ``a * b`` of an n1 x n2 x n3 and an n2 x k x n3 tensor."""
    a = as_tensor(a)
    b = as_tensor(b)
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ValueError(f"t-product dimension mismatch: {a.shape} * {b.shape}")
    return kernels.get(backend).tprod(a, b)


def transpose(a):
    """Transpose each frontal slice, then reverse the order of slices 1..n3-1."""
    a = np.asarray(a)
    order = (-np.arange(a.shape[2])) % a.shape[2]
    return np.ascontiguousarray(a.transpose(1, 0, 2)[:, :, order])


def _check_same(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")


def inner(a, b):
    _check_same(a, b)
    return float(np.dot(np.ravel(a), np.ravel(b)))


def frobenius_norm(a):
    return float(np.linalg.norm(np.ravel(a)))


def one_norm(a):
    return float(np.abs(a).sum())


def horizontal_slice(a, i):
    """The 1 x n2 x n3 tensor ``a[i, :, :]``."""
    if not 0 <= i < a.shape[0]:
        raise IndexError(f"horizontal slice {i} out of range for n1={a.shape[0]}")
    return a[i : i + 1].copy()


def lateral_slice(a, j):
    """The n1 x 1 x n3 tensor ``a[:, j, :]``."""
    if not 0 <= j < a.shape[1]:
        raise IndexError(f"lateral slice {j} out of range for n2={a.shape[1]}")
    return a[:, j : j + 1].copy()


def frontal_slice(a, k):
    if not 0 <= k < a.shape[2]:
        raise IndexError(f"frontal slice {k} out of range for n3={a.shape[2]}")
    return a[:, :, k].copy()


def axpy(alpha, a, b):
    """``alpha * a + b``."""
    _check_same(a, b)
    return alpha * np.asarray(a) + np.asarray(b)


def sub(a, b):
    _check_same(a, b)
    return np.asarray(a) - np.asarray(b)


def scale(alpha, a):
    return alpha * np.asarray(a)
