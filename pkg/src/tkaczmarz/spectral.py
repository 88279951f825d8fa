"""Frequency-domain view of ``bcirc``.

The DFT along mode 3 block-diagonalizes ``bcirc(A)``: with
``Ahat(w) = sum_c A[:, :, c] exp(-2 pi i w c / n3)``, the singular values of
``bcirc(A)`` are exactly the union over w of the singular values of the
``n1 x n2`` complex blocks ``Ahat(w)``.  Spectral norm, smallest nonzero
singular value and the pseudoinverse are all computed blockwise, and the
dense ``(n1 n3) x (n2 n3)`` matrix is never formed.

Real input gives conjugate-symmetric blocks, ``Ahat(n3 - w) = conj(Ahat(w))``,
so only blocks ``0 .. n3 // 2`` are factorized.
"""
from dataclasses import dataclass

import numpy as np

from .tensor import Dims3, as_tensor

IMAG_TOL = 1e-10
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class SVDConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class RankTolerance:
    """Singular values at or below ``rel_tol * sigma_max`` count as zero.

    ``sigma_max`` is the largest singular value over *all* frequency blocks,
    so :func:`sigma_min_nonzero` and :func:`pinv_apply` agree on the rank.
    """

    rel_tol: float = 1e-10

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")


def _rank_tol(tol):
    if tol is None:
        return RankTolerance()
    if isinstance(tol, RankTolerance):
        return tol
    return RankTolerance(float(tol))


@dataclass(frozen=True)
class FrequencyBlocks:
    dims: Dims3
    blocks: np.ndarray  # complex, shape (n3, n1, n2); blocks[w] = Ahat(w)


def to_frequency(a):
    a = as_tensor(a)
    f = np.fft.fft(a, axis=2)
    return FrequencyBlocks(Dims3(*a.shape), np.ascontiguousarray(np.moveaxis(f, 2, 0)))


def from_frequency(f):
    """Inverse DFT; raises if the result carries imaginary mass above 1e-10."""
    t = np.fft.ifft(np.moveaxis(f.blocks, 0, 2), axis=2)
    resid = np.max(np.abs(t.imag)) if t.size else 0.0
    if resid > IMAG_TOL:
        raise ValueError(
            f"frequency blocks are not conjugate symmetric (imaginary residue {resid:.3e})"
        )
    return np.ascontiguousarray(t.real)


def _jacobi_columns(g):
    """One-sided Jacobi on the rows of ``g`` (the columns of the matrix).

    Rotates pairs of rows in place until every pair is orthogonal to
    ``JACOBI_TOL`` relative.  Returns the accumulated right rotation, stored
    row-wise like ``g``.
    """
    n = g.shape[0]
    h = np.eye(n, dtype=np.complex128)
    for _ in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                gp, gq = g[p], g[q]
                alpha = np.vdot(gp, gp).real
                beta = np.vdot(gq, gq).real
                gamma = np.vdot(gp, gq)
                mag = abs(gamma)
                if mag == 0.0 or mag <= JACOBI_TOL * np.sqrt(alpha * beta):
                    continue
                rotated = True
                phase = np.conj(gamma) / mag
                zeta = (beta - alpha) / (2.0 * mag)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                gq = phase * gq
                g[p], g[q] = c * gp - s * gq, s * gp + c * gq
                hp, hq = h[p], phase * h[q]
                h[p], h[q] = c * hp - s * hq, s * hp + c * hq
        if not rotated:
            return h
    raise SVDConvergenceError(f"Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def svd_complex(m, compute_uv=False):
    """Thin SVD of a small dense complex matrix by one-sided Jacobi.

    Returns the singular values in descending order, or ``(u, s, vh)`` with
    ``m = u @ diag(s) @ vh`` when ``compute_uv`` is true.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("svd_complex expects a matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("svd_complex requires finite entries")
    rows, cols = m.shape
    wide = rows < cols
    work = m.conj().T if wide else m
    g = np.ascontiguousarray(work.T)  # rows of g are the columns of work
    h = _jacobi_columns(g)
    s = np.sqrt(np.einsum("ij,ij->i", g.conj(), g).real)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    if not compute_uv:
        return s
    g = g[order]
    h = h[order]
    u = np.zeros_like(g)
    nz = s > 0
    u[nz] = g[nz] / s[nz, None]
    u = u.T  # columns are left singular vectors of work
    v = h.T  # work @ v = u @ diag(s)
    if wide:
        return v, s, u.conj().T
    return u, s, v.conj().T


def _half_range(n3):
    return range(n3 // 2 + 1)


def block_singular_values(a):
    """Singular values of every frequency block, shape ``(n3, min(n1, n2))``."""
    f = to_frequency(a)
    n3 = f.dims.n3
    out = np.empty((n3, min(f.dims.n1, f.dims.n2)))
    for w in _half_range(n3):
        out[w] = svd_complex(f.blocks[w])
        out[(n3 - w) % n3] = out[w]
    return out


def spectral_norm(a):
    """``||bcirc(a)||_2``."""
    return float(block_singular_values(a).max())


def sigma_min_nonzero(a, tol=None):
    """Smallest singular value of ``bcirc(a)`` above the rank tolerance."""
    tol = _rank_tol(tol)
    s = block_singular_values(a)
    smax = s.max()
    if smax == 0.0:
        raise ValueError("sigma_min_nonzero of the zero tensor is undefined")
    return float(s[s > tol.rel_tol * smax].min())


def _slice_ratio(a, axis, kind):
    # a single slice has vector-shaped frequency blocks, so each block's
    # spectral norm is its 2-norm
    other = 1 - axis
    fro = (a * a).sum(axis=(other, 2))
    zero = np.flatnonzero(fro == 0.0)
    if zero.size:
        raise ValueError(f"{kind} slice {zero[0]} is zero")
    power = (np.abs(np.fft.fft(a, axis=2)) ** 2).sum(axis=other)
    return float((power.max(axis=1) / fro).max())


def lambda_row(a):
    """``max_i ||A_i||_2^2 / ||A_i||_F^2`` over horizontal slices."""
    return _slice_ratio(as_tensor(a), 0, "horizontal")


def lambda_col(a):
    """``max_j ||A_j||_2^2 / ||A_j||_F^2`` over lateral slices."""
    return _slice_ratio(as_tensor(a), 1, "lateral")


def pinv_apply(a, b, tol=None):
    """``A^dagger * B`` computed blockwise in the frequency domain."""
    tol = _rank_tol(tol)
    a = as_tensor(a)
    b = as_tensor(b)
    if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ValueError(f"pinv_apply dimension mismatch: {a.shape} vs {b.shape}")
    fa = to_frequency(a)
    fb = to_frequency(b)
    n1, n2, n3 = a.shape
    factors = {w: svd_complex(fa.blocks[w], compute_uv=True) for w in _half_range(n3)}
    smax = max(s[0] for _, s, _ in factors.values())
    out = np.zeros((n3, n2, b.shape[1]), dtype=np.complex128)
    if smax > 0:
        cut = tol.rel_tol * smax
        for w, (u, s, vh) in factors.items():
            keep = s > cut
            coef = (u[:, keep].conj().T @ fb.blocks[w]) / s[keep, None]
            out[w] = vh[keep].conj().T @ coef
            if 0 < w and 2 * w != n3:
                out[n3 - w] = out[w].conj()
    return from_frequency(FrequencyBlocks(Dims3(n2, b.shape[1], n3), out))
