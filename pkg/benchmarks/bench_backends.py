"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_backends.py [--iters 20000] [--repeat 3]

Times the t-product kernel and full TREK / sparse RREK runs on the desk
problems, reporting the best of ``--repeat`` warm runs per backend.
"""
import argparse
import time

import numpy as np

from tkaczmarz import kernels
from tkaczmarz.harness import ExperimentSpec, make_instance
from tkaczmarz.objectives import elastic_net_objective, frobenius_objective
from tkaczmarz.solvers import SolverConfig, default_stepsizes, run


def best_of(fn, repeat):
    fn()  # warm-up (numba compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(iters):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((40, 20, 16))
    b = rng.standard_normal((20, 8, 16))
    yield "tprod 40x20x16 * 20x8x16 (x50)", lambda kern: (lambda: [kern.tprod(a, b) for _ in range(50)])

    lsq = ExperimentSpec("least_squares", n1=40, n2=8, n3=4, k=4, trials=1)
    la, lb, _ = make_instance(lsq, 0)
    fro = frobenius_objective()
    lcfg = SolverConfig(*default_stepsizes(la, fro), max_iters=iters, seed=1, log_every=iters)
    yield f"TREK 40x8x4 K=4, {iters} steps", lambda kern: (lambda: run("trek", la, lb, fro, lcfg, kern.name))

    sp = ExperimentSpec("sparse_recovery", n1=40, n2=60, n3=4, k=4, trials=1, lam=5.0)
    sa, sb, _ = make_instance(sp, 0)
    en = elastic_net_objective(5.0)
    scfg = SolverConfig(*default_stepsizes(sa, en), max_iters=iters, seed=1, log_every=iters)
    yield f"RREK 40x60x4 K=4, {iters} steps", lambda kern: (lambda: run("rrek_sparse", sa, sb, en, scfg, kern.name))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--iters", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    backends = [kernels.NUMPY] + ([kernels.NUMBA] if kernels.NUMBA is not None else [])
    print(f"{'case':<36} " + " ".join(f"{k.name:>10}" for k in backends) + "   speedup")
    for name, make in cases(args.iters):
        times = [best_of(make(kern), args.repeat) for kern in backends]
        speed = f"{times[0] / times[1]:8.1f}x" if len(times) > 1 else ""
        print(f"{name:<36} " + " ".join(f"{t:9.4f}s" for t in times) + f"  {speed}")


if __name__ == "__main__":
    main()
