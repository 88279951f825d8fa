"""Hot kernels of the Kaczmarz iterations, in numba and numpy flavours.

Every kernel set exposes the same functions:

``tprod(a, b)``
    full t-product by circular convolution of frontal slices.
``row_residual(a, i, x, b, z, use_z)``
    ``A_i * x - B_i (+ Z_i)`` as a ``(K, n3)`` array.
``row_backproject(a, i, r, scale, y)``
    in place ``y -= scale * A_i^T * r``.
``col_step(a, j, scale, z)``
    in place ``z -= scale * A_j * (A_j^T * z)``.
``shrink(y, lam, out)``
    in place soft shrinkage ``out = S_lam(y)``.
``iterate(a, b, x, y, z, ii, jj, row_scale, col_scale, extended, lam, tol, x_prev)``
    a block of steps with row indices ``ii`` (and column indices ``jj``
    when ``extended``), updating ``x``, ``y``, ``z`` in place.  ``lam < 0``
    means ``x`` aliases ``y``.  Returns ``(steps_done, stopped, change)``
    where ``change`` is the relative change of the last step and
    ``stopped`` reports that it fell below ``tol > 0``.
"""
from types import SimpleNamespace

from .._backend import HAVE_NUMBA, default_backend
from . import _numpy

_NAMES = ("tprod", "row_residual", "row_backproject", "col_step", "shrink", "iterate")

NUMPY = SimpleNamespace(name="numpy", **{n: getattr(_numpy, n) for n in _NAMES})

if HAVE_NUMBA:
    from . import _numba

    NUMBA = SimpleNamespace(name="numba", **{n: getattr(_numba, n) for n in _NAMES})
else:  # pragma: no cover
    NUMBA = None


def get(backend=None):
    """Return the kernel namespace for ``backend`` (env-selected when None)."""
    backend = backend or default_backend()
    if backend == "numpy":
        return NUMPY
    if backend == "numba":
        if NUMBA is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        return NUMBA
    raise ValueError(f"unknown backend {backend!r}")
