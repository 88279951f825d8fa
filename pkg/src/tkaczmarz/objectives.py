"""Strongly convex objectives, their conjugates, and Bregman distances.

Two objectives are provided, both 1-strongly convex:

* ``frobenius``: ``f(X) = 1/2 ||X||_F^2``, self-conjugate, ``grad f*`` is the
  identity.  Drives the least-squares iterations (TRK, TREK).
* ``elastic_net``: ``f(X) = 1/2 ||X||_F^2 + lam ||X||_1`` with
  ``grad f*(Y) = S_lam(Y)`` and ``f*(Y) = 1/2 ||S_lam(Y)||_F^2``.  Drives the
  sparse recovery iterations.

Iterates are generated as ``x = grad_conjugate(y)``, which certifies
``y`` as a subgradient of ``f`` at ``x``; :class:`BregmanPair` only admits
pairs built that way.
"""
from dataclasses import dataclass, field

import numpy as np

from .spectral import sigma_min_nonzero
from .tensor import inner


def soft_shrinkage(x, lam):
    """Componentwise ``sign(x) * max(|x| - lam, 0)``."""
    if lam < 0:
        raise ValueError(f"shrinkage threshold must be nonnegative, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


@dataclass(frozen=True)
class Objective:
    kind: str  # "frobenius" | "elastic_net"
    lam: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("frobenius", "elastic_net"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "elastic_net" and not self.lam > 0:
            raise ValueError(f"elastic net needs lam > 0, got {self.lam}")

    def eval_f(self, x):
        x = np.asarray(x)
        val = 0.5 * float(np.vdot(x, x))
        if self.kind == "elastic_net":
            val += self.lam * float(np.abs(x).sum())
        return val

    def eval_conjugate(self, y):
        g = self.grad_conjugate(y)
        return 0.5 * float(np.vdot(g, g))

    def grad_conjugate(self, y):
        if self.kind == "frobenius":
            return np.asarray(y, dtype=np.float64)
        return soft_shrinkage(y, self.lam)

    @property
    def shrink_threshold(self):
        """Threshold handed to the shrink kernel; ``None`` means identity."""
        return self.lam if self.kind == "elastic_net" else None


def frobenius_objective():
    return Objective("frobenius")


def elastic_net_objective(lam):
    if not lam > 0:
        raise ValueError(f"elastic net needs lam > 0, got {lam}")
    return Objective("elastic_net", lam=float(lam))


@dataclass(frozen=True)
class BregmanPair:
    x: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)

    @classmethod
    def from_dual(cls, obj, y):
        y = np.asarray(y, dtype=np.float64)
        return cls(obj.grad_conjugate(y), y)


def bregman_distance(obj, pair, target):
    """``D_{f,z}(x, target) = f(target) + f*(z) - <z, target>``."""
    return obj.eval_f(target) + obj.eval_conjugate(pair.z) - inner(pair.z, target)


def nu_least_squares(a, tol=None):
    """Error-bound constant of the Frobenius objective: ``2 sigma_min(bcirc(a))^2``."""
    return 2.0 * sigma_min_nonzero(a, tol) ** 2
