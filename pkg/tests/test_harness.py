import logging

import numpy as np
import pytest

from tkaczmarz import harness, io
from tkaczmarz.harness import ExperimentSpec, gen_least_squares, gen_sparse_recovery, run_experiment
from tkaczmarz.tensor import frobenius_norm, tprod, transpose


def test_experiment_defaults():
    lsq = ExperimentSpec("least_squares")
    assert (lsq.n1, lsq.n2, lsq.n3, lsq.k, lsq.max_iters) == (100, 20, 20, 20, 1000)
    assert lsq.algorithms == ("trk", "trek") and lsq.trials == 10
    assert lsq.noise_scale == 0.1 and lsq.step_factor == 1.5
    sp = ExperimentSpec("sparse_recovery")
    assert (sp.n1, sp.n2, sp.n3, sp.k, sp.max_iters) == (100, 200, 10, 20, 20000)
    assert sp.algorithms == ("rrk", "rrek") and sp.log_every == 20


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="least_squares", n1=0),
        dict(kind="least_squares", trials=0),
        dict(kind="least_squares", step_factor=2.0),
        dict(kind="least_squares", noise_scale=-1.0),
        dict(kind="least_squares", algorithms=("trk", "gmres")),
        dict(kind="least_squares", algorithms=("trk", "trk")),
        dict(kind="sparse_recovery", n1=9),
        dict(kind="sparse_recovery", lam=0.0),
        dict(kind="sparse_recovery", algorithms=("trk",)),
        dict(kind="tomography"),
    ],
)
def test_experiment_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentSpec(**kwargs)


def test_least_squares_generator(rng):
    spec = ExperimentSpec("least_squares", n1=40, n2=8, n3=4, k=4)
    a, b, ref = gen_least_squares(spec, rng)
    assert a.shape == (40, 8, 4) and b.shape == (40, 4, 4) and ref.shape == (8, 4, 4)
    resid = b - tprod(a, ref)
    assert frobenius_norm(tprod(transpose(a), resid)) < 1e-8 * frobenius_norm(b)
    assert frobenius_norm(resid) > 0.01 * frobenius_norm(b)  # inconsistent

    clean = ExperimentSpec("least_squares", n1=40, n2=8, n3=4, k=4, noise_scale=0.0)
    a, b, ref = gen_least_squares(clean, rng)
    assert frobenius_norm(tprod(a, ref) - b) < 1e-8 * frobenius_norm(b)


def test_sparse_generator(rng):
    spec = ExperimentSpec("sparse_recovery", n1=20, n2=30, n3=4, k=3)
    a, b, xs = gen_sparse_recovery(spec, rng)
    np.testing.assert_array_equal(a[10:15], a[15:20])
    assert np.all(xs[xs != 0] >= 2.33) and np.all(xs >= 0)
    noise = b - tprod(a, xs)
    assert frobenius_norm(noise) > 0
    assert frobenius_norm(tprod(transpose(a), noise)) < 1e-8 * frobenius_norm(noise)


def test_sparse_density():
    spec = ExperimentSpec("sparse_recovery", n1=20, n2=200, n3=10, k=20)
    xs = np.concatenate([gen_sparse_recovery(spec, harness.trial_data_rng(0, t))[2].ravel()
                         for t in range(3)])
    assert abs(np.count_nonzero(xs) / xs.size - 0.0099) < 0.003


def test_trial_streams_are_independent():
    a = harness.trial_data_rng(0, 0).random(4)
    b = harness.trial_data_rng(0, 1).random(4)
    c = harness.trial_data_rng(0, 0, attempt=1).random(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    assert harness.trial_solver_seed(0, 0) != harness.trial_solver_seed(0, 1)
    assert harness.trial_solver_seed(5, 2) == harness.trial_solver_seed(5, 2)


def test_zero_slice_regenerates(monkeypatch, caplog):
    calls = []
    real = harness.gen_least_squares

    def flaky(spec, rng):
        a, b, ref = real(spec, rng)
        if not calls:
            a[0] = 0.0
        calls.append(1)
        return a, b, ref

    monkeypatch.setitem(harness._GENERATORS, "least_squares", flaky)
    spec = ExperimentSpec("least_squares", n1=6, n2=3, n3=2, k=1)
    with caplog.at_level(logging.WARNING):
        a, _, _ = harness.make_instance(spec, 0)
    assert len(calls) == 2 and np.all((a * a).sum(axis=(1, 2)) > 0)
    assert "zero slice" in caplog.text


def test_run_experiment_small(tmp_path):
    spec = ExperimentSpec("least_squares", n1=12, n2=4, n3=3, k=2, trials=3, max_iters=300, log_every=50)
    out = tmp_path / "trace.csv"
    res = run_experiment(spec, out=str(out), dump_dir=str(tmp_path / "dump"))
    np.testing.assert_array_equal(res.iters, [0, 50, 100, 150, 200, 250, 300])
    text = out.read_text()
    assert text == res.csv_text()
    assert text.splitlines()[0] == "iter,trk_mean_relerr,trek_mean_relerr"
    per_trial = [dict(r.error_trace)[300] for r in res.runs["trek"]]
    assert res.mean_relerr["trek"][-1] == pytest.approx(np.mean(per_trial), rel=1e-15)
    assert np.all(res.mean_relerr["trk"][0] == 1.0)
    dumped = sorted(p.name for p in (tmp_path / "dump").iterdir())
    assert "trial000_A.tt3" in dumped and "trial002_trek_X.tt3" in dumped and "trial001_ref.tt3" in dumped
    np.testing.assert_array_equal(io.read_tensor(tmp_path / "dump" / "trial002_trek_X.tt3"),
                                  res.runs["trek"][2].final_x)


def test_run_experiment_deterministic():
    spec = ExperimentSpec("sparse_recovery", n1=12, n2=15, n3=2, k=2, trials=2, max_iters=200, log_every=20)
    assert run_experiment(spec).csv_text() == run_experiment(spec).csv_text()


def test_mean_is_order_independent():
    spec = ExperimentSpec("least_squares", n1=10, n2=4, n3=2, k=1, trials=4, max_iters=100, log_every=25)
    res = run_experiment(spec)
    traces = [np.array([dict(r.error_trace)[k] for k in res.iters]) for r in res.runs["trk"]]
    np.testing.assert_allclose(np.mean(traces[::-1], axis=0), res.mean_relerr["trk"], rtol=1e-15)


def test_dump_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv(harness.DUMP_DIR_ENV, str(tmp_path / "env"))
    spec = ExperimentSpec("least_squares", n1=6, n2=3, n3=2, k=1, trials=1, max_iters=10, algorithms=("trk",))
    run_experiment(spec)
    assert (tmp_path / "env" / "trial000_B.tt3").exists()
