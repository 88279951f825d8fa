"""Synthetic experiments: problem generators and the multi-trial runner.

Two problem families are generated:

``least_squares``
    ``A`` standard normal, ``B = A * X0 + noise_scale * N`` with ``X0`` and
    ``N`` standard normal, so the system is inconsistent.  The reference is
    ``A^dagger * B``.
``sparse_recovery``
    ``A`` standard normal with horizontal slices ``n1-10 .. n1-6``
    overwritten by slices ``n1-5 .. n1-1`` (which makes ``bcirc(A)`` rank
    deficient), a nonnegative sparse ground truth ``X_s`` keeping the
    standard normal draws ``>= 2.33``, and noise drawn from the kernel of
    ``bcirc(A)^T`` so that ``A^T * B = A^T * A * X_s``.

Trial ``t`` draws its data from ``SeedSequence(seed, spawn_key=(t, 0, attempt))``
and seeds its solvers from ``SeedSequence(seed, spawn_key=(t, 1))``; every
algorithm of a trial runs on the same instance with the same solver seed.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import io
from .objectives import elastic_net_objective, frobenius_objective
from .oracle import bcirc_materialize, fold_matrix, null_space_basis
from .solvers import SolverConfig, default_stepsizes, run
from .spectral import pinv_apply
from .tensor import tprod

log = logging.getLogger(__name__)

SPARSE_THRESHOLD = 2.33
DUMP_DIR_ENV = "TKACZMARZ_DUMP_DIR"

_DEFAULTS = {
    "least_squares": dict(dims=(100, 20, 20, 20), max_iters=1000, algorithms=("trk", "trek")),
    "sparse_recovery": dict(dims=(100, 200, 10, 20), max_iters=20000, algorithms=("rrk", "rrek")),
}


@dataclass
class ExperimentSpec:
    kind: str
    n1: Optional[int] = None
    n2: Optional[int] = None
    n3: Optional[int] = None
    k: Optional[int] = None
    noise_scale: float = 0.1
    lam: float = 1.0
    trials: int = 10
    max_iters: Optional[int] = None
    seed: int = 0
    step_factor: float = 1.5
    algorithms: Optional[tuple] = None
    tol: float = 0.0
    log_every: Optional[int] = None

    def __post_init__(self):
        if self.kind not in _DEFAULTS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        d = _DEFAULTS[self.kind]
        for name, val in zip(("n1", "n2", "n3", "k"), d["dims"]):
            if getattr(self, name) is None:
                setattr(self, name, val)
        if self.max_iters is None:
            self.max_iters = d["max_iters"]
        if self.algorithms is None:
            self.algorithms = d["algorithms"]
        if self.log_every is None:
            self.log_every = max(1, self.max_iters // 1000)
        self.algorithms = tuple(self.algorithms)
        self.validate()

    def validate(self):
        for name in ("n1", "n2", "n3", "k", "trials", "max_iters", "log_every"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val}")
        if not 0 < self.step_factor < 2:
            raise ValueError(f"step_factor must lie in (0, 2), got {self.step_factor}")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be nonnegative")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.kind == "sparse_recovery":
            if self.n1 < 10:
                raise ValueError("sparse recovery needs n1 >= 10 (ten slices are duplicated)")
            if not self.lam > 0:
                raise ValueError(f"lambda must be positive, got {self.lam}")
        allowed = {"trk", "trek", "rrk", "rrek"}
        if self.kind == "sparse_recovery":
            allowed = {"rrk", "rrek"}
        bad = [a for a in self.algorithms if a not in allowed]
        if bad or not self.algorithms:
            raise ValueError(f"algorithms {bad or '()'} not available for {self.kind}; pick from {sorted(allowed)}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("duplicate algorithm names")

    def objective(self):
        if self.kind == "sparse_recovery":
            return elastic_net_objective(self.lam)
        return frobenius_objective()


def gen_least_squares(spec, rng):
    """Return ``(A, B, A^dagger * B)``."""
    a = rng.standard_normal((spec.n1, spec.n2, spec.n3))
    x0 = rng.standard_normal((spec.n2, spec.k, spec.n3))
    noise = rng.standard_normal((spec.n1, spec.k, spec.n3))
    b = tprod(a, x0) + noise * spec.noise_scale
    return a, b, pinv_apply(a, b)


def gen_sparse_recovery(spec, rng):
    """Return ``(A, B, X_s)``."""
    n1, n2, n3, k = spec.n1, spec.n2, spec.n3, spec.k
    a = rng.standard_normal((n1, n2, n3))
    a[n1 - 10 : n1 - 5] = a[n1 - 5 : n1]
    xs = rng.standard_normal((n2, k, n3))
    xs[xs < SPARSE_THRESHOLD] = 0.0
    basis = null_space_basis(bcirc_materialize(a).T)
    q = basis.shape[1]
    if q < 1:
        raise RuntimeError("kernel of bcirc(A)^T is empty despite duplicated slices")
    noise = fold_matrix(basis @ rng.standard_normal((q, k)), (n1, k, n3))
    b = tprod(a, xs) + noise * spec.noise_scale
    return a, b, xs


_GENERATORS = {"least_squares": gen_least_squares, "sparse_recovery": gen_sparse_recovery}


def trial_data_rng(seed, trial, attempt=0):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, 0, attempt)))


def trial_solver_seed(seed, trial):
    return int(np.random.SeedSequence(seed, spawn_key=(trial, 1)).generate_state(1, np.uint64)[0])


def make_instance(spec, trial):
    """Generate trial ``trial``'s instance, regenerating if ``A`` has a zero slice."""
    gen = _GENERATORS[spec.kind]
    for attempt in range(100):
        a, b, ref = gen(spec, trial_data_rng(spec.seed, trial, attempt))
        if np.all((a * a).sum(axis=(1, 2)) > 0) and np.all((a * a).sum(axis=(0, 2)) > 0):
            return a, b, ref
        log.warning("trial %d attempt %d: generated A has a zero slice; regenerating", trial, attempt)
    raise RuntimeError("could not generate a tensor without zero slices")


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    iters: np.ndarray
    mean_relerr: dict  # algorithm -> array aligned with iters
    runs: dict = field(default_factory=dict, repr=False)  # algorithm -> [RunResult per trial]
    references: list = field(default_factory=list, repr=False)

    def column_name(self, algo):
        return f"{algo}_mean_relerr"

    def csv_text(self):
        return io.format_trace_csv(
            self.iters, {self.column_name(a): self.mean_relerr[a] for a in self.spec.algorithms}
        )


def _solver_algorithm(spec, algo):
    if spec.kind == "sparse_recovery" and algo == "rrek":
        return "rrek_sparse"
    return algo


def run_experiment(spec, out=None, dump_dir=None, backend=None, keep_runs=True):
    """Run every algorithm on ``spec.trials`` seeded instances and average the traces.

    The relative error is measured against ``A^dagger B`` (least squares) or
    the ground truth ``X_s`` (sparse recovery) and averaged pointwise over
    the iteration indices common to all trials.
    """
    spec.validate()
    obj = spec.objective()
    dump_dir = dump_dir or os.environ.get(DUMP_DIR_ENV) or None
    if dump_dir:
        os.makedirs(dump_dir, exist_ok=True)
    traces = {a: [] for a in spec.algorithms}
    runs = {a: [] for a in spec.algorithms}
    refs = []
    for t in range(spec.trials):
        a, b, ref = make_instance(spec, t)
        alpha_r, alpha_c = default_stepsizes(a, obj, spec.step_factor)
        seed = trial_solver_seed(spec.seed, t)
        if dump_dir:
            ref_name = "Xs" if spec.kind == "sparse_recovery" else "ref"
            for name, tensor in (("A", a), ("B", b), (ref_name, ref)):
                io.write_tensor(os.path.join(dump_dir, f"trial{t:03d}_{name}.tt3"), tensor)
        if keep_runs:
            refs.append(ref)
        for algo in spec.algorithms:
            cfg = SolverConfig(alpha_r, alpha_c, max_iters=spec.max_iters, tol=spec.tol, seed=seed,
                               log_every=spec.log_every, reference_solution=ref)
            res = run(_solver_algorithm(spec, algo), a, b, obj, cfg, backend=backend)
            traces[algo].append(dict(res.error_trace))
            if keep_runs:
                runs[algo].append(res)
            if dump_dir:
                io.write_tensor(os.path.join(dump_dir, f"trial{t:03d}_{algo}_X.tt3"), res.final_x)
            log.info("trial %d %s: %d iterations, final relerr %.3e",
                     t, algo, res.iterations_used, res.error_trace[-1][1])

    common = None
    for per_algo in traces.values():
        for tr in per_algo:
            common = set(tr) if common is None else common & set(tr)
    iters = np.array(sorted(common), dtype=np.int64)
    means = {
        algo: np.array([[tr[k] for k in iters] for tr in per_algo]).mean(axis=0)
        for algo, per_algo in traces.items()
    }
    result = ExperimentResult(spec, iters, means, runs, refs)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(result.csv_text())
    return result
