"""Loop kernels compiled with numba; same contracts as the numpy kernels."""
import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def _wrap(s, n3):
    # (s mod n3) for s in (-n3, n3)
    return s + n3 if s < 0 else s


@njit(**_opts)
def tprod(a, b):
    n1, n2, n3 = a.shape
    kk = b.shape[1]
    out = np.zeros((n1, kk, n3))
    for m in range(n3):
        for c in range(n3):
            s = _wrap(c - m, n3)
            for i in range(n1):
                for j in range(n2):
                    aij = a[i, j, s]
                    if aij == 0.0:
                        continue
                    for k in range(kk):
                        out[i, k, c] += aij * b[j, k, m]
    return out


@njit(**_opts)
def row_residual(a, i, x, b, z, use_z):
    _, n2, n3 = a.shape
    kk = x.shape[1]
    r = np.zeros((kk, n3))
    for j in range(n2):
        for k in range(kk):
            for m in range(n3):
                xv = x[j, k, m]
                if xv == 0.0:
                    continue
                for c in range(n3):
                    r[k, c] += a[i, j, _wrap(c - m, n3)] * xv
    for k in range(kk):
        for c in range(n3):
            r[k, c] -= b[i, k, c]
            if use_z:
                r[k, c] += z[i, k, c]
    return r


@njit(**_opts)
def row_backproject(a, i, r, scale, y):
    _, n2, n3 = a.shape
    kk = r.shape[0]
    for j in range(n2):
        for k in range(kk):
            for c in range(n3):
                acc = 0.0
                for m in range(n3):
                    acc += a[i, j, _wrap(m - c, n3)] * r[k, m]
                y[j, k, c] -= scale * acc


@njit(**_opts)
def col_step(a, j, scale, z):
    n1, _, n3 = a.shape
    kk = z.shape[1]
    w = np.zeros((kk, n3))
    for i in range(n1):
        for k in range(kk):
            for m in range(n3):
                zv = z[i, k, m]
                for c in range(n3):
                    w[k, c] += a[i, j, _wrap(m - c, n3)] * zv
    for i in range(n1):
        for k in range(kk):
            for c in range(n3):
                acc = 0.0
                for m in range(n3):
                    acc += a[i, j, _wrap(c - m, n3)] * w[k, m]
                z[i, k, c] -= scale * acc


@njit(**_opts)
def shrink(y, lam, out):
    fy = y.reshape(-1)
    fo = out.reshape(-1)
    for t in range(fy.size):
        v = fy[t]
        if v > lam:
            fo[t] = v - lam
        elif v < -lam:
            fo[t] = v + lam
        else:
            fo[t] = 0.0


@njit(**_opts)
def _norm_and_change(x, x_prev):
    fx = x.reshape(-1)
    fp = x_prev.reshape(-1)
    num = 0.0
    den = 0.0
    for t in range(fx.size):
        d = fx[t] - fp[t]
        num += d * d
        den += fp[t] * fp[t]
    return np.sqrt(num), np.sqrt(den)


@njit(**_opts)
def iterate(a, b, x, y, z, ii, jj, row_scale, col_scale, extended, lam, tol, x_prev):
    steps = ii.shape[0]
    change = np.nan
    for t in range(steps):
        track = tol > 0.0 or t == steps - 1
        if track:
            x_prev.reshape(-1)[:] = x.reshape(-1)
        if extended:
            j = jj[t]
            col_step(a, j, col_scale[j], z)
        i = ii[t]
        r = row_residual(a, i, x, b, z, extended)
        row_backproject(a, i, r, row_scale[i], y)
        if lam >= 0.0:
            shrink(y, lam, x)
        if track:
            num, den = _norm_and_change(x, x_prev)
            change = num / den if den > 0.0 else np.nan
            if tol > 0.0 and den > 0.0 and change < tol:
                return t + 1, True, change
    return steps, False, change
