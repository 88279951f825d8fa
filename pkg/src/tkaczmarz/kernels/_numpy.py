"""Vectorized numpy kernels.

Tensors are float64 arrays of shape ``(n1, n2, n3)``.  The t-product of a
slice with a tensor is a circular convolution over the last axis, expressed
here as a gather through ``circulant_index(n3)`` followed by ``einsum``.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def circulant_index(n3):
    """``idx[c, m] = (c - m) mod n3``."""
    c = np.arange(n3)
    idx = (c[:, None] - c[None, :]) % n3
    idx.setflags(write=False)
    return idx


def tprod(a, b):
    n1, _, n3 = a.shape
    out = np.zeros((n1, b.shape[1], n3))
    shift = np.arange(n3)
    # ascending m keeps the accumulation order fixed
    for m in range(n3):
        out += np.einsum("ijc,jk->ikc", a[:, :, (shift - m) % n3], b[:, :, m])
    return out


def row_residual(a, i, x, b, z, use_z):
    circ = circulant_index(a.shape[2])
    r = np.einsum("jcm,jkm->kc", a[i][:, circ], x)
    r -= b[i]
    if use_z:
        r += z[i]
    return r


def row_backproject(a, i, r, scale, y):
    circ = circulant_index(a.shape[2])
    y -= scale * np.einsum("jcm,km->jkc", a[i][:, circ.T], r)


def col_step(a, j, scale, z):
    circ = circulant_index(a.shape[2])
    aj = a[:, j, :]
    w = np.einsum("icm,ikm->kc", aj[:, circ.T], z)
    z -= scale * np.einsum("icm,km->ikc", aj[:, circ], w)


def shrink(y, lam, out):
    np.multiply(np.sign(y), np.maximum(np.abs(y) - lam, 0.0), out=out)


def iterate(a, b, x, y, z, ii, jj, row_scale, col_scale, extended, lam, tol, x_prev):
    steps = ii.shape[0]
    change = np.nan
    for t in range(steps):
        track = tol > 0.0 or t == steps - 1
        if track:
            np.copyto(x_prev, x)
        if extended:
            j = jj[t]
            col_step(a, j, col_scale[j], z)
        i = ii[t]
        r = row_residual(a, i, x, b, z, extended)
        row_backproject(a, i, r, row_scale[i], y)
        if lam >= 0.0:
            shrink(y, lam, x)
        if track:
            den = np.linalg.norm(x_prev)
            change = np.linalg.norm(x - x_prev) / den if den > 0 else np.nan
            if tol > 0.0 and den > 0 and change < tol:
                return t + 1, True, change
    return steps, False, change
