import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tkaczmarz import oracle
from tkaczmarz.spectral import (
    FrequencyBlocks,
    RankTolerance,
    SVDConvergenceError,
    block_singular_values,
    from_frequency,
    lambda_col,
    lambda_row,
    pinv_apply,
    sigma_min_nonzero,
    spectral_norm,
    svd_complex,
    to_frequency,
)
from tkaczmarz.tensor import frobenius_norm, identity_tensor, tprod, transpose, zeros

extent = st.integers(1, 8)
seeds = st.integers(0, 2**32 - 1)


def rel(x, y):
    return np.linalg.norm(x - y) / np.linalg.norm(y)


def real_embedding(m):
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


# frequency blocks


def test_frequency_identity_blocks():
    f = to_frequency(identity_tensor(3, 5))
    for w in range(5):
        np.testing.assert_allclose(f.blocks[w], np.eye(3), atol=1e-15)


def test_frequency_round_trip(rng):
    a = rng.standard_normal((5, 4, 6))
    assert rel(from_frequency(to_frequency(a)), a) < 1e-12


def test_frequency_single_slice(rng):
    a = rng.standard_normal((3, 2, 1))
    np.testing.assert_array_equal(to_frequency(a).blocks[0], a[:, :, 0])


def test_frequency_matches_dft_definition(rng):
    a = rng.standard_normal((2, 3, 5))
    blocks = to_frequency(a).blocks
    for w in range(5):
        direct = sum(a[:, :, c] * np.exp(-2j * np.pi * w * c / 5) for c in range(5))
        np.testing.assert_allclose(blocks[w], direct, atol=1e-12)
    for w in range(1, 5):
        np.testing.assert_allclose(blocks[5 - w], blocks[w].conj(), atol=1e-12)


def test_from_frequency_rejects_asymmetric_blocks(rng):
    f = to_frequency(rng.standard_normal((2, 2, 4)))
    blocks = f.blocks.copy()
    blocks[1] += 1j
    with pytest.raises(ValueError):
        from_frequency(FrequencyBlocks(f.dims, blocks))


# complex SVD


def test_svd_diagonal_and_row():
    np.testing.assert_allclose(svd_complex(np.diag([3.0, 1.0])), [3.0, 1.0])
    v = np.array([[1.0, 2.0, -2.0]])
    np.testing.assert_allclose(svd_complex(v), [3.0])


@pytest.mark.parametrize("shape", [(5, 3), (3, 5), (1, 4), (4, 1), (6, 6)])
def test_svd_matches_real_embedding(rng, shape):
    m = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    s = svd_complex(m)
    emb = np.linalg.svd(real_embedding(m), compute_uv=False)
    np.testing.assert_allclose(np.repeat(s, 2), emb[: 2 * s.size], atol=1e-10)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)


@pytest.mark.parametrize("shape", [(5, 3), (3, 5), (7, 7)])
def test_svd_reconstruction(rng, shape):
    m = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    u, s, vh = svd_complex(m, compute_uv=True)
    assert np.abs(u @ np.diag(s) @ vh - m).max() < 1e-10 * s[0]
    k = s.size
    np.testing.assert_allclose(u.conj().T @ u, np.eye(k), atol=1e-12)
    np.testing.assert_allclose(vh @ vh.conj().T, np.eye(k), atol=1e-12)


def test_svd_rank_deficient(rng):
    x = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
    m = x @ (rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)))
    u, s, vh = svd_complex(m, compute_uv=True)
    assert s[2:].max() < 1e-12 * s[0]
    assert np.abs(u @ np.diag(s) @ vh - m).max() < 1e-10 * s[0]


def test_svd_errors():
    with pytest.raises(ValueError):
        svd_complex(np.array([[np.nan, 1.0]]))
    assert issubclass(SVDConvergenceError, ArithmeticError)


# spectral norm / sigma_min


def test_spectral_norm_examples(rng):
    assert spectral_norm(identity_tensor(3, 4)) == pytest.approx(1.0, abs=1e-15)
    assert spectral_norm(zeros(2, 3, 4)) == 0.0
    a = rng.standard_normal((4, 3, 5))
    dense = np.linalg.norm(oracle.bcirc_materialize(a), 2)
    assert abs(spectral_norm(a) - dense) / dense < 1e-10


def test_block_values_match_dense_multiset(rng):
    a = rng.standard_normal((3, 2, 4))
    ours = np.sort(block_singular_values(a).ravel())
    dense = np.sort(np.linalg.svd(oracle.bcirc_materialize(a), compute_uv=False))
    np.testing.assert_allclose(ours, dense, atol=1e-10)


def test_sigma_min_examples(rng):
    assert sigma_min_nonzero(identity_tensor(3, 4)) == pytest.approx(1.0, abs=1e-14)
    a = rng.standard_normal((6, 3, 4))
    dense = oracle.sigma_min_nonzero_dense(oracle.bcirc_materialize(a))
    assert abs(sigma_min_nonzero(a) - dense) / dense < 1e-8


def test_sigma_min_rank_deficient(rng):
    a = rng.standard_normal((2, 3, 4))
    a[1] = a[0]
    m = oracle.bcirc_materialize(a)
    full = np.linalg.svd(m, compute_uv=False)
    assert full[-1] < 1e-12 * full[0]  # the dense matrix really is singular
    dense = oracle.sigma_min_nonzero_dense(m)
    assert abs(sigma_min_nonzero(a) - dense) / dense < 1e-8
    assert sigma_min_nonzero(a, RankTolerance(1e-10)) == sigma_min_nonzero(a)


def test_sigma_min_zero_tensor():
    with pytest.raises(ValueError):
        sigma_min_nonzero(zeros(2, 2, 2))
    with pytest.raises(ValueError):
        RankTolerance(0.0)


@settings(max_examples=60, deadline=None)
@given(extent, extent, extent, seeds)
def test_spectral_norm_transpose_invariant(n1, n2, n3, seed):
    a = np.random.default_rng(seed).standard_normal((n1, n2, n3))
    assert abs(spectral_norm(a) - spectral_norm(transpose(a))) < 1e-10 * spectral_norm(a)


@settings(max_examples=60, deadline=None)
@given(extent, extent, extent, extent, seeds)
def test_range_lower_bound(n1, n2, n3, k, seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((n1, n2, n3))
    x = tprod(a, r.standard_normal((n2, k, n3)))
    lhs = frobenius_norm(tprod(transpose(a), x)) ** 2
    assert lhs >= (1 - 1e-8) * sigma_min_nonzero(a) ** 2 * frobenius_norm(x) ** 2


# slice constants


def test_lambda_examples(rng):
    a = rng.standard_normal((4, 3, 1))
    assert lambda_row(a) == 1.0 and lambda_col(a) == 1.0
    assert lambda_row(identity_tensor(3, 5)) == pytest.approx(1.0, abs=1e-15)
    b = rng.standard_normal((5, 4, 3))
    assert abs(lambda_row(b) - oracle.lambda_dense(b, "row")) < 1e-10
    assert abs(lambda_col(b) - oracle.lambda_dense(b, "col")) < 1e-10


def test_lambda_zero_slice_named(rng):
    a = rng.standard_normal((4, 3, 2))
    a[2] = 0.0
    with pytest.raises(ValueError, match="slice 2"):
        lambda_row(a)
    a = rng.standard_normal((4, 3, 2))
    a[:, 1] = 0.0
    with pytest.raises(ValueError, match="slice 1"):
        lambda_col(a)


def test_lambda_two_slice_hand_value():
    # bcirc of the 1x1x2 slice (a, b) is [[a, b], [b, a]] with norm |a| + |b|
    a = np.array([3.0, -1.0]).reshape(1, 1, 2)
    assert lambda_row(a) == pytest.approx(16.0 / 10.0, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(extent, extent, extent, seeds)
def test_lambda_range(n1, n2, n3, seed):
    # the n3 frequency blocks of a slice carry n3 * ||slice||_F^2 in total,
    # so the largest one lies between the mean and the sum
    a = np.random.default_rng(seed).standard_normal((n1, n2, n3))
    for lam in (lambda_row(a), lambda_col(a)):
        assert 1.0 - 1e-12 <= lam <= n3 * (1.0 + 1e-12)
        if n3 == 1:
            assert lam == 1.0


# pseudoinverse


def test_pinv_identity(rng):
    b = rng.standard_normal((3, 2, 4))
    assert rel(pinv_apply(identity_tensor(3, 4), b), b) < 1e-14


def test_pinv_consistent_recovery(rng):
    a = rng.standard_normal((7, 3, 4))
    x0 = rng.standard_normal((3, 2, 4))
    assert rel(pinv_apply(a, tprod(a, x0)), x0) < 1e-8


def test_pinv_matches_dense(rng):
    a = rng.standard_normal((8, 3, 4))
    b = rng.standard_normal((8, 2, 4))
    dense = oracle.fold_matrix(
        oracle.dense_pinv(oracle.bcirc_materialize(a)) @ oracle.unfold_matrix(b), (3, 2, 4)
    )
    assert rel(pinv_apply(a, b), dense) < 1e-8


def test_pinv_rank_deficient_matches_dense(rng):
    a = rng.standard_normal((5, 6, 3))
    a[1] = a[3]
    b = rng.standard_normal((5, 2, 3))
    dense = oracle.fold_matrix(
        oracle.dense_pinv_apply(oracle.bcirc_materialize(a), oracle.unfold_matrix(b)), (6, 2, 3)
    )
    assert rel(pinv_apply(a, b), dense) < 1e-8


def test_pinv_dimension_mismatch():
    with pytest.raises(ValueError):
        pinv_apply(np.ones((3, 2, 2)), np.ones((4, 1, 2)))


@settings(max_examples=60, deadline=None)
@given(extent, extent, extent, extent, seeds)
def test_pinv_normal_equations(n1, n2, n3, k, seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((n1, n2, n3))
    b = r.standard_normal((n1, k, n3))
    x = pinv_apply(a, b)
    at = transpose(a)
    atb = tprod(at, b)
    assert frobenius_norm(tprod(at, tprod(a, x)) - atb) / frobenius_norm(atb) < 1e-8
