"""Agreement of the fast t-product and spectral routes with the dense oracle."""
from dataclasses import dataclass

import numpy as np

from . import oracle, spectral
from .tensor import inner, tprod, transpose


@dataclass
class CheckResult:
    name: str
    worst: float
    tol: float

    @property
    def passed(self):
        return bool(self.worst <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<22} worst={self.worst:.3e}  tol={self.tol:.0e}"


def _rel(x, y):
    scale = np.linalg.norm(y)
    return float(np.linalg.norm(np.asarray(x) - y) / (scale if scale > 0 else 1.0))


def _shape(rng, low=1, high=8):
    return [int(v) for v in rng.integers(low, high + 1, size=4)]


def oracle_agreement(instances=100, seed=0, backend=None):
    """Compare every fast route with its dense counterpart on random tensors with extents <= 8."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(
        ["tprod", "transpose_bcirc", "adjoint", "spectral_norm", "sigma_min_nonzero",
         "lambda_row", "lambda_col", "pinv_apply"], 0.0)
    tols = dict(tprod=1e-12, transpose_bcirc=0.0, adjoint=1e-10, spectral_norm=1e-10,
                sigma_min_nonzero=1e-8, lambda_row=1e-10, lambda_col=1e-10, pinv_apply=1e-8)
    for _ in range(instances):
        n1, n2, n3, k = _shape(rng)
        a = rng.standard_normal((n1, n2, n3))
        b = rng.standard_normal((n2, k, n3))
        c = rng.standard_normal((n1, k, n3))
        m = oracle.bcirc_materialize(a)

        worst["tprod"] = max(worst["tprod"], _rel(tprod(a, b, backend), oracle.tprod_dense(a, b)))
        diff = np.abs(oracle.bcirc_materialize(transpose(a)) - m.T).max()
        worst["transpose_bcirc"] = max(worst["transpose_bcirc"], float(diff))
        lhs = inner(tprod(a, b, backend), c)
        rhs = inner(b, tprod(transpose(a), c, backend))
        worst["adjoint"] = max(worst["adjoint"], abs(lhs - rhs) / np.sqrt(a.size * b.size))

        s = oracle.dense_svd(m)[1]
        worst["spectral_norm"] = max(worst["spectral_norm"], abs(spectral.spectral_norm(a) - s[0]) / s[0])
        smin = oracle.sigma_min_nonzero_dense(m)
        worst["sigma_min_nonzero"] = max(
            worst["sigma_min_nonzero"], abs(spectral.sigma_min_nonzero(a) - smin) / smin)
        worst["lambda_row"] = max(worst["lambda_row"], abs(spectral.lambda_row(a) - oracle.lambda_dense(a, "row")))
        worst["lambda_col"] = max(worst["lambda_col"], abs(spectral.lambda_col(a) - oracle.lambda_dense(a, "col")))

        dense = oracle.fold_matrix(oracle.dense_pinv_apply(m, oracle.unfold_matrix(c)), (n2, k, n3))
        worst["pinv_apply"] = max(worst["pinv_apply"], _rel(spectral.pinv_apply(a, c), dense))
    return [CheckResult(name, worst[name], tols[name]) for name in worst]
