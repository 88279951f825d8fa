"""Kernel backend selection.

The numba kernels are used when numba imports cleanly and the environment
variable ``TKACZMARZ_DISABLE_NUMBA`` is unset or false.  Otherwise every hot
path falls back to the vectorized numpy kernels.
"""
import os

ENV_FLAG = "TKACZMARZ_DISABLE_NUMBA"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the dev environment
    HAVE_NUMBA = False


def numba_disabled_by_env():
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


def default_backend():
    """Return ``"numba"`` or ``"numpy"`` according to the env flag."""
    if HAVE_NUMBA and not numba_disabled_by_env():
        return "numba"
    return "numpy"
