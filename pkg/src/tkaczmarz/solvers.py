"""Randomized (regularized, extended) Kaczmarz iterations for ``A * X = B``.

Algorithms
----------
``trk``
    Tensor randomized Kaczmarz: one sampled horizontal slice per step,
    Frobenius objective.
``rrk``
    Regularized randomized Kaczmarz: the same dual update followed by
    ``x = grad f*(y)``.
``trek``
    Tensor randomized extended Kaczmarz: a lateral-slice step on the
    auxiliary ``z`` (which tends to ``B - A A^dagger B``) precedes every row
    step, so the iterates reach ``A^dagger B`` on inconsistent systems.
``rrek`` / ``rrek_sparse``
    The regularized extended iteration; ``rrek_sparse`` pins the objective
    to the elastic net.

Randomness
----------
Each run owns a ``numpy.random.Generator`` (PCG64) seeded with
``SolverConfig.seed``.  Indices come from inverse-CDF lookup on one uniform
per draw.  An extended step consumes two uniforms, column then row; a plain
step consumes one.  :func:`rrk_step` / :func:`rrek_step` and :func:`run`
consume the stream identically, so a run can be replayed step by step.
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .objectives import Objective, nu_least_squares
from .spectral import lambda_col, lambda_row, pinv_apply, sigma_min_nonzero
from .tensor import as_tensor, tprod

ALGORITHMS = ("trk", "rrk", "trek", "rrek", "rrek_sparse")
EXTENDED = frozenset({"trek", "rrek", "rrek_sparse"})

_CHUNK = 4096


# --------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplingDist:
    """Slice-norm distribution: index ``i`` has probability ``weights[i] / total``."""

    weights: np.ndarray
    cumulative: np.ndarray
    total: float

    @classmethod
    def from_weights(cls, weights, kind="slice"):
        w = np.asarray(weights, dtype=np.float64)
        zero = np.flatnonzero(~(w > 0))
        if zero.size:
            raise ValueError(f"{kind} {zero[0]} has zero norm; cannot sample it")
        cum = np.cumsum(w)
        return cls(w, cum, float(cum[-1]))

    def index(self, u):
        """Inverse CDF; ``u`` may be a scalar or an array of uniforms in [0, 1)."""
        idx = np.searchsorted(self.cumulative, np.multiply(u, self.total), side="right")
        return np.minimum(idx, self.weights.size - 1)


def row_distribution(a):
    return SamplingDist.from_weights((a * a).sum(axis=(1, 2)), "horizontal slice")


def col_distribution(a):
    return SamplingDist.from_weights((a * a).sum(axis=(0, 2)), "lateral slice")


def sample(dist, rng):
    return int(dist.index(rng.random()))


# --------------------------------------------------------------------------
# configuration, state, results


@dataclass
class SolverConfig:
    alpha_r: float
    alpha_c: Optional[float] = None
    max_iters: int = 1000
    tol: float = 0.0
    seed: int = 0
    log_every: int = 1
    reference_solution: Optional[np.ndarray] = field(default=None, repr=False)
    validate_steps: bool = False
    record_samples: bool = False

    def __post_init__(self):
        if not self.alpha_r > 0:
            raise ValueError(f"alpha_r must be positive, got {self.alpha_r}")
        if self.alpha_c is not None and not self.alpha_c > 0:
            raise ValueError(f"alpha_c must be positive, got {self.alpha_c}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be nonnegative, got {self.tol}")
        if int(self.log_every) != self.log_every or self.log_every < 1:
            raise ValueError(f"log_every must be a positive integer, got {self.log_every}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass
class SolverState:
    """Iterates ``x = grad f*(y)``, dual ``y`` and residual tracker ``z``.

    Under the Frobenius objective ``x`` and ``y`` are the same array.
    """

    x: np.ndarray
    y: np.ndarray
    z: Optional[np.ndarray] = None
    k: int = 0

    def copy(self):
        y = self.y.copy()
        x = y if self.x is self.y else self.x.copy()
        z = None if self.z is None else self.z.copy()
        return SolverState(x, y, z, self.k)


def initial_state(a, b, obj, extended):
    """``y = 0`` (always in the range of ``A^T``), ``x = grad f*(0)``, ``z = B``."""
    y = np.zeros((a.shape[1], b.shape[1], a.shape[2]))
    x = y if obj.shrink_threshold is None else obj.grad_conjugate(y)
    return SolverState(x, y, b.copy() if extended else None, 0)


@dataclass
class RunResult:
    final_x: np.ndarray = field(repr=False)
    iterations_used: int
    stop_reason: str  # "tolerance_met" | "budget_exhausted"
    error_trace: list  # (iteration, relative error or relative change)
    bregman_trace: Optional[list] = None
    final_y: Optional[np.ndarray] = field(default=None, repr=False)
    final_z: Optional[np.ndarray] = field(default=None, repr=False)
    row_samples: Optional[np.ndarray] = field(default=None, repr=False)
    col_samples: Optional[np.ndarray] = field(default=None, repr=False)


# --------------------------------------------------------------------------
# single steps


def _check_problem(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    if a.shape[0] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ValueError(f"A {a.shape} and B {b.shape} are not conformable")
    return a, b


def _row_update(kern, a, b, state, obj, scale, i, use_z):
    r = kern.row_residual(a, i, state.x, b, state.z if use_z else b, use_z)
    kern.row_backproject(a, i, r, scale, state.y)
    lam = obj.shrink_threshold
    if lam is not None:
        kern.shrink(state.y, lam, state.x)


def rrk_step(state, a, b, obj, alpha_r, rng, backend=None):
    """One regularized Kaczmarz step; returns a new state.

    With the Frobenius objective this is the TRK update
    ``x <- x - alpha_r A_i^T * (A_i * x - B_i) / ||A_i||_F^2``.
    """
    a, b = _check_problem(a, b)
    rows = row_distribution(a)
    new = state.copy()
    i = sample(rows, rng)
    _row_update(kernels.get(backend), a, b, new, obj, alpha_r / rows.weights[i], i, False)
    new.k += 1
    return new


def rrek_step(state, a, b, obj, alpha_r, alpha_c, rng, backend=None):
    """One extended step: lateral-slice ``z`` update, then a row update reading the new ``z``."""
    a, b = _check_problem(a, b)
    if state.z is None:
        raise ValueError("extended step needs a z iterate (initialize z = B)")
    rows, cols = row_distribution(a), col_distribution(a)
    kern = kernels.get(backend)
    new = state.copy()
    j = sample(cols, rng)
    kern.col_step(a, j, alpha_c / cols.weights[j], new.z)
    i = sample(rows, rng)
    _row_update(kern, a, b, new, obj, alpha_r / rows.weights[i], i, True)
    new.k += 1
    return new


# --------------------------------------------------------------------------
# driver


def _check_algorithm(algorithm, obj):
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if algorithm in ("trk", "trek") and obj.kind != "frobenius":
        raise ValueError(f"{algorithm} requires the Frobenius objective")
    if algorithm == "rrek_sparse" and obj.kind != "elastic_net":
        raise ValueError("rrek_sparse requires the elastic-net objective")


def check_step_sizes(a, obj, alpha_r, alpha_c=None):
    """Warn when step sizes leave ``(0, 2 gamma / lambda_r)`` or ``(0, 2 / lambda_c)``."""
    ok = True
    lr = lambda_row(a)
    if not 0 < alpha_r < 2 * obj.gamma / lr:
        warnings.warn(f"alpha_r={alpha_r} outside (0, {2 * obj.gamma / lr:.6g}); convergence not guaranteed")
        ok = False
    if alpha_c is not None:
        lc = lambda_col(a)
        if not 0 < alpha_c < 2 / lc:
            warnings.warn(f"alpha_c={alpha_c} outside (0, {2 / lc:.6g}); convergence not guaranteed")
            ok = False
    return ok


def run(algorithm, a, b, obj, config, backend=None):
    """Iterate ``algorithm`` from the zero dual iterate until tolerance or budget.

    The trace records, every ``config.log_every`` iterations and at the last
    one, the relative Frobenius error against ``config.reference_solution``
    (iteration 0 included), or the relative change
    ``||x_k - x_{k-1}|| / ||x_{k-1}||`` when no reference is given.  The stop
    test is skipped in iterations where ``||x_{k-1}|| = 0``.
    """
    _check_algorithm(algorithm, obj)
    a, b = _check_problem(a, b)
    extended = algorithm in EXTENDED
    if extended and config.alpha_c is None:
        raise ValueError(f"{algorithm} needs a column step size alpha_c")
    if config.validate_steps:
        check_step_sizes(a, obj, config.alpha_r, config.alpha_c if extended else None)

    kern = kernels.get(backend)
    rows = row_distribution(a)
    cols = col_distribution(a) if extended else None
    row_scale = config.alpha_r / rows.weights
    col_scale = config.alpha_c / cols.weights if extended else None
    rng = np.random.default_rng(int(config.seed))
    state = initial_state(a, b, obj, extended)

    ref = config.reference_solution
    if ref is not None:
        ref = as_tensor(ref)
        if ref.shape != state.x.shape:
            raise ValueError(f"reference shape {ref.shape} != iterate shape {state.x.shape}")
        ref_norm = float(np.linalg.norm(ref))
        ref_norm = ref_norm if ref_norm > 0 else 1.0
        f_ref = obj.eval_f(ref)

    def record(k, change):
        if ref is None:
            trace.append((k, change))
            return
        trace.append((k, float(np.linalg.norm(state.x - ref)) / ref_norm))
        breg.append((k, f_ref + obj.eval_conjugate(state.y) - float(np.vdot(state.y, ref))))

    trace, breg = [], []
    if ref is not None:
        record(0, None)
    max_iters = int(config.max_iters)
    log_every = int(config.log_every)
    lam = obj.shrink_threshold
    lam = -1.0 if lam is None else float(lam)
    z = state.z if extended else b
    x_prev = np.empty_like(state.x)
    row_log, col_log = [], []

    stop_reason = "budget_exhausted"
    k = 0
    while k < max_iters:
        n = min(_CHUNK, max_iters - k)
        if extended:
            u = rng.random((n, 2))
            jj = cols.index(u[:, 0])
            ii = rows.index(u[:, 1])
        else:
            ii = rows.index(rng.random(n))
            jj = ii
        if config.record_samples:
            row_log.append(ii)
            col_log.append(jj)
        pos = 0
        while pos < n:
            # blocks end on logging boundaries
            stop = min(n, pos + log_every - k % log_every)
            done, stopped, change = kern.iterate(
                a, b, state.x, state.y, z, ii[pos:stop], jj[pos:stop],
                row_scale, col_scale if extended else row_scale,
                extended, lam, float(config.tol), x_prev,
            )
            k += done
            pos += done
            if stopped or k % log_every == 0 or k == max_iters:
                record(k, float(change))
            if stopped:
                stop_reason = "tolerance_met"
                break
        if stop_reason == "tolerance_met":
            break

    state.k = k
    return RunResult(
        final_x=state.x.copy(),
        iterations_used=k,
        stop_reason=stop_reason,
        error_trace=trace,
        bregman_trace=breg if ref is not None else None,
        final_y=state.y.copy(),
        final_z=None if state.z is None else state.z.copy(),
        row_samples=np.concatenate(row_log)[:k] if config.record_samples else None,
        col_samples=np.concatenate(col_log)[:k] if config.record_samples and extended else None,
    )


# --------------------------------------------------------------------------
# step sizes and theoretical rates


def default_stepsizes(a, obj=None, factor=1.5):
    """``(factor * gamma / lambda_r, factor / lambda_c)``; 1.5 is the experiments' choice."""
    gamma = 1.0 if obj is None else obj.gamma
    return factor * gamma / lambda_row(a), factor / lambda_col(a)


@dataclass(frozen=True)
class RateReport:
    lambda_r: float
    lambda_c: float
    sigma_min: float
    fro_norm_sq: float
    alpha_r: float
    alpha_c: float
    rho_c: float
    rho_r: Optional[float]
    gamma: float
    nu: Optional[float] = None
    delta: Optional[float] = None
    combined_rate: Optional[float] = None

    def default_delta(self):
        """Half-way choice with ``(1 + delta / gamma) * max(rho_c, rho_r) < 1``."""
        rho = max(self.rho_c, self.rho_r)
        return self.gamma * (1.0 / rho - 1.0) / 2.0

    def bregman_bound(self, k, proj_b_norm_sq, d0, delta=None):
        """Expected Bregman distance bound after ``k`` extended steps.

        ``proj_b_norm_sq`` is ``||A A^dagger B||_F^2`` and ``d0`` the initial
        Bregman distance to the solution.
        """
        if self.rho_r is None:
            raise ValueError("rho_r unavailable: supply nu for this objective")
        delta = self.delta if delta is None else delta
        if delta is None:
            delta = self.default_delta()
        g = self.gamma
        growth = (1.0 + delta / g) * self.rho_r
        i = np.arange(k)
        series = float(np.sum(self.rho_c ** (k - i) * growth**i))
        lead = (delta + g) / (2 * delta * g) * self.alpha_r**2 * self.lambda_r / self.fro_norm_sq
        return lead * proj_b_norm_sq * series + growth**k * d0

    def squared_error_bound(self, k, proj_b_norm_sq, x0_err_sq, delta=None):
        """Bound on ``E ||x_k - x_hat||_F^2`` for the Frobenius objective."""
        d0 = 0.5 * x0_err_sq
        return 2.0 / self.gamma * self.bregman_bound(k, proj_b_norm_sq, d0, delta)


def theoretical_rates(a, obj, alpha_r, alpha_c, nu=None, delta=None, tol=None):
    """Contraction factors of the column and row recursions.

    ``rho_c = 1 - (2 a_c - a_c^2 lambda_c) sigma_min^2 / ||A||_F^2`` and
    ``rho_r = 1 - (2 gamma a_r - a_r^2 lambda_r) nu / (2 gamma ||A||_F^2)``.
    For the Frobenius objective ``nu`` defaults to ``2 sigma_min^2``; for the
    elastic net it must be supplied or ``rho_r`` is left as ``None``.
    """
    a = as_tensor(a)
    lr, lc = lambda_row(a), lambda_col(a)
    smin = sigma_min_nonzero(a, tol)
    fro2 = float(np.vdot(a, a))
    gamma = obj.gamma
    rho_c = 1.0 - (2 * alpha_c - alpha_c**2 * lc) * smin**2 / fro2
    if nu is None and obj.kind == "frobenius":
        nu = nu_least_squares(a, tol)
    rho_r = None
    if nu is not None:
        rho_r = 1.0 - (2 * gamma * alpha_r - alpha_r**2 * lr) * nu / (2 * gamma * fro2)
    combined = None
    if delta is not None:
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta}")
        if rho_r is not None:
            combined = (1.0 + delta / gamma) * max(rho_c, rho_r)
    return RateReport(lr, lc, smin, fro2, alpha_r, alpha_c, rho_c, rho_r, gamma, nu, delta, combined)


# --------------------------------------------------------------------------
# empirical checks of the expectation bounds


@dataclass(frozen=True)
class BoundCheckRow:
    k: int
    mean: float
    bound: float
    passed: bool


def _least_squares_pieces(a, b, tol):
    x_hat = pinv_apply(a, b, tol)
    proj_b = tprod(a, x_hat)
    return x_hat, proj_b


def z_error_bound_check(a, b, alpha_c, seeds, checkpoints, slack=0.2, tol=None, backend=None):
    """Trial-mean ``||z_k - (B - A A^dagger B)||^2`` against ``rho_c^k ||A A^dagger B||^2``.

    Each seed drives the column recursion alone, drawing uniforms in pairs
    exactly as an extended run with that seed would, so ``z_k`` coincides
    with the ``z`` iterate of ``run("trek", ..., seed=s)``.
    """
    a, b = _check_problem(a, b)
    kern = kernels.get(backend)
    _, proj_b = _least_squares_pieces(a, b, tol)
    limit = b - proj_b
    bound0 = float(np.vdot(proj_b, proj_b))
    lc = lambda_col(a)
    smin = sigma_min_nonzero(a, tol)
    fro2 = float(np.vdot(a, a))
    rho_c = 1.0 - (2 * alpha_c - alpha_c**2 * lc) * smin**2 / fro2
    cols = col_distribution(a)
    col_scale = alpha_c / cols.weights
    checkpoints = sorted(set(int(c) for c in checkpoints))
    kmax = checkpoints[-1]
    sums = np.zeros(len(checkpoints))
    for seed in seeds:
        rng = np.random.default_rng(int(seed))
        z = b.copy()
        pos = 0
        if checkpoints[0] == 0:
            sums[0] += float(np.sum((z - limit) ** 2))
            pos = 1
        k = 0
        while k < kmax:
            n = min(_CHUNK, kmax - k)
            jj = cols.index(rng.random((n, 2))[:, 0])
            for t in range(n):
                j = int(jj[t])
                kern.col_step(a, j, col_scale[j], z)
                k += 1
                if pos < len(checkpoints) and k == checkpoints[pos]:
                    sums[pos] += float(np.sum((z - limit) ** 2))
                    pos += 1
    means = sums / len(seeds)
    rows = []
    for kc, mean in zip(checkpoints, means):
        bound = rho_c**kc * bound0
        rows.append(BoundCheckRow(kc, float(mean), bound, bool(mean <= bound * (1 + slack))))
    return rows


def x_error_bound_check(a, b, alpha_r, alpha_c, seeds, checkpoints, delta=None, slack=0.5, tol=None, backend=None):
    """Trial-mean TREK ``||x_k - A^dagger B||^2`` against the two-term expectation bound."""
    a, b = _check_problem(a, b)
    obj = Objective("frobenius")
    x_hat, proj_b = _least_squares_pieces(a, b, tol)
    report = theoretical_rates(a, obj, alpha_r, alpha_c, tol=tol)
    delta = report.default_delta() if delta is None else delta
    checkpoints = sorted(set(int(c) for c in checkpoints))
    stride = math.gcd(*checkpoints)
    ref_sq = float(np.vdot(x_hat, x_hat))
    wanted = set(checkpoints)
    sums = dict.fromkeys(checkpoints, 0.0)
    for seed in seeds:
        cfg = SolverConfig(alpha_r, alpha_c, max_iters=checkpoints[-1], seed=int(seed),
                           log_every=stride, reference_solution=x_hat)
        res = run("trek", a, b, obj, cfg, backend=backend)
        for k, rel in res.error_trace:
            if k in wanted:
                sums[k] += rel * rel * ref_sq
    proj_sq = float(np.vdot(proj_b, proj_b))
    rows = []
    for kc in checkpoints:
        mean = sums[kc] / len(seeds)
        bound = report.squared_error_bound(kc, proj_sq, ref_sq, delta)
        rows.append(BoundCheckRow(kc, mean, bound, bool(mean <= bound * (1 + slack))))
    return rows
