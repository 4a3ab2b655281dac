import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from fasthcs.errors import DegenerateInputError, InputError, SubsetTooSmallError
from fasthcs.reduce import DataMatrix, center_and_reduce, classical_pca, pca_fit_on_subset


def pairwise(A):
    return np.linalg.norm(A[:, None, :] - A[None, :, :], axis=2)


def test_data_matrix_rejects_bad_input():
    with pytest.raises(InputError):
        DataMatrix(np.ones((2, 3)))
    with pytest.raises(InputError):
        DataMatrix(np.ones((5, 1)))
    Y = np.random.default_rng(0).normal(size=(5, 3))
    Y[2, 1] = np.nan
    with pytest.raises(InputError):
        DataMatrix(Y)


def test_identical_rows_are_degenerate():
    with pytest.raises(DegenerateInputError):
        center_and_reduce(np.ones((6, 4)))


def test_three_points_in_r5():
    Y = np.random.default_rng(1).normal(size=(3, 5))
    rb = center_and_reduce(Y)
    assert rb.r == 2 and rb.X.shape == (3, 2)
    np.testing.assert_allclose(pairwise(rb.X), pairwise(Y), atol=1e-10)


def test_wide_data_matches_covariance_spectrum():
    Y = np.random.default_rng(2).normal(size=(50, 200))
    rb = center_and_reduce(Y)
    assert rb.r == 49
    np.testing.assert_allclose(rb.basis.T @ rb.basis, np.eye(49), atol=1e-10)
    got = np.sort(np.linalg.eigvalsh(rb.X.T @ rb.X / 49))[::-1]
    want = np.sort(np.linalg.eigvalsh(np.cov(Y, rowvar=False)))[::-1][:49]
    np.testing.assert_allclose(got, want, rtol=1e-8)
    Yc = Y - Y.mean(axis=0)
    np.testing.assert_allclose(rb.X @ rb.X.T, Yc @ Yc.T, atol=1e-8 * np.abs(Yc @ Yc.T).max())


def test_back_transform_restores_means_and_round_trips():
    Y = np.random.default_rng(3).normal(size=(20, 60)) + 5.0
    rb = center_and_reduce(Y)
    back = rb.back_transform()
    np.testing.assert_allclose(back.mean(axis=0), Y.mean(axis=0), atol=1e-10)
    np.testing.assert_allclose(back, Y, atol=1e-10)
    again = center_and_reduce(back)
    signs = np.sign(np.sum(again.X * rb.X, axis=0))
    np.testing.assert_allclose(again.X * signs, rb.X, atol=1e-10)


def test_tall_data_kept_as_is():
    Y = np.random.default_rng(4).normal(size=(40, 6))
    rb = center_and_reduce(Y)
    assert not rb.reduced and rb.r == 6
    np.testing.assert_allclose(rb.X, Y - Y.mean(axis=0), atol=1e-12)


def test_rank_one_line():
    t = np.linspace(-2, 3, 7)[:, None]
    direction = np.array([1.0, 2.0, -2.0]) / 3
    Y = 1.5 + t * direction
    fit = pca_fit_on_subset(Y, np.arange(7), 2)
    assert abs(fit.eigenvalues[1]) < 1e-12
    assert abs(abs(fit.loadings[:, 0] @ direction) - 1) < 1e-10


def test_full_subset_matches_sample_covariance():
    Y = np.random.default_rng(5).normal(size=(30, 5)) @ np.diag([3, 2, 1, 0.5, 0.1])
    fit = pca_fit_on_subset(Y, np.arange(30), 3)
    want = np.sort(np.linalg.eigvalsh(np.cov(Y, rowvar=False)))[::-1][:3]
    np.testing.assert_allclose(fit.eigenvalues, want, rtol=1e-8)
    np.testing.assert_allclose(fit.loadings.T @ fit.loadings, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(classical_pca(Y, 3).eigenvalues, want, rtol=1e-8)


def test_subset_too_small():
    Y = np.random.default_rng(6).normal(size=(10, 4))
    with pytest.raises(SubsetTooSmallError):
        pca_fit_on_subset(Y, [0, 1], 2)


def test_largest_entry_of_each_loading_is_positive():
    Y = np.random.default_rng(7).normal(size=(25, 6))
    P = pca_fit_on_subset(Y, np.arange(25), 4).loadings
    idx = np.abs(P).argmax(axis=0)
    assert np.all(P[idx, np.arange(4)] > 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_rigid_motion_equivariance(seed):
    rng = np.random.default_rng(seed)
    Y = rng.normal(size=(15, 4)) * [4, 2, 1, 0.5]
    R = ortho_group.rvs(4, random_state=seed)
    b = rng.normal(size=4) * 10
    H = np.arange(0, 15, 2)
    f1 = pca_fit_on_subset(Y, H, 2)
    f2 = pca_fit_on_subset(Y @ R + b, H, 2)
    np.testing.assert_allclose(f2.center, f1.center @ R + b, atol=1e-8)
    np.testing.assert_allclose(f2.eigenvalues, f1.eigenvalues, rtol=1e-8)
    rotated = R.T @ f1.loadings
    cos = np.abs(np.sum(rotated * f2.loadings, axis=0))
    np.testing.assert_allclose(cos, 1.0, atol=1e-8)
