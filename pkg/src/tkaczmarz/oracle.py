"""Brute-force dense references for tests and closed-form verification.

Everything here materializes ``bcirc`` and leans on LAPACK through
``numpy.linalg``; none of it sits on a solver path.
"""
import numpy as np

DEFAULT_REL_TOL = 1e-10


def bcirc_materialize(a):
    """Dense ``(n1 n3) x (n2 n3)`` block-circulant matrix; block (r, c) is slice (r - c) mod n3."""
    a = np.asarray(a, dtype=np.float64)
    n1, n2, n3 = a.shape
    out = np.empty((n1 * n3, n2 * n3))
    for r in range(n3):
        for c in range(n3):
            out[r * n1 : (r + 1) * n1, c * n2 : (c + 1) * n2] = a[:, :, (r - c) % n3]
    return out


def unfold_matrix(a):
    """Stack frontal slices vertically: ``[A_0; A_1; ...; A_{n3-1}]``."""
    a = np.asarray(a, dtype=np.float64)
    n1, n2, n3 = a.shape
    return np.ascontiguousarray(a.transpose(2, 0, 1).reshape(n1 * n3, n2))


def fold_matrix(m, dims):
    n1, n2, n3 = dims
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (n1 * n3, n2):
        raise ValueError(f"cannot fold a {m.shape} matrix into {tuple(dims)}")
    return np.ascontiguousarray(m.reshape(n3, n1, n2).transpose(1, 2, 0))


def tprod_dense(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return fold_matrix(bcirc_materialize(a) @ unfold_matrix(b), (a.shape[0], b.shape[1], a.shape[2]))


def dense_svd(m):
    """``(u, s, vh)`` from LAPACK; ``s`` descending."""
    return np.linalg.svd(np.asarray(m, dtype=np.float64), full_matrices=False)


def _cutoff(s, rel_tol):
    return rel_tol * (s[0] if s.size else 0.0)


def dense_pinv_apply(m, rhs, tol=DEFAULT_REL_TOL):
    u, s, vh = dense_svd(m)
    keep = s > _cutoff(s, tol)
    return vh[keep].T @ ((u[:, keep].T @ rhs) / s[keep, None])


def dense_pinv(m, tol=DEFAULT_REL_TOL):
    return dense_pinv_apply(m, np.eye(np.shape(m)[0]), tol)


def null_space_basis(m, tol=DEFAULT_REL_TOL):
    """Orthonormal columns spanning ``{v : m @ v = 0}``."""
    m = np.asarray(m, dtype=np.float64)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    rank = int(np.count_nonzero(s > _cutoff(s, tol)))
    return np.ascontiguousarray(vh[rank:].T)


def sigma_min_nonzero_dense(m, tol=DEFAULT_REL_TOL):
    s = dense_svd(m)[1]
    return float(s[s > _cutoff(s, tol)].min())


def lambda_dense(a, kind):
    """Slice constant by materializing ``bcirc`` of every slice."""
    a = np.asarray(a)
    if kind == "row":
        slices = [a[i : i + 1] for i in range(a.shape[0])]
    else:
        slices = [a[:, j : j + 1] for j in range(a.shape[1])]
    return max(
        np.linalg.norm(bcirc_materialize(s), 2) ** 2 / np.sum(s * s) for s in slices
    )
