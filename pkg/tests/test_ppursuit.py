import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ortho_group

from fasthcs.iindex import subset_size_h
from fasthcs.ppursuit import PPConfig, draw_direction_pairs, pp_outlyingness, pp_subset_and_fit
from fasthcs.reduce import pca_fit_on_subset

import oracles


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_shift_invariance(seed):
    rng = np.random.default_rng(seed)
    Y = rng.normal(size=(30, 5))
    b = rng.normal(size=5) * 100
    cfg = PPConfig(200, seed=seed % 1000)
    np.testing.assert_allclose(pp_outlyingness(Y + b, cfg), pp_outlyingness(Y, cfg), atol=1e-10, rtol=1e-8)


def test_collinear_points():
    u = np.array([2.0, -1.0, 2.0]) / 3
    Y = np.arange(11.0)[:, None] * u + [1.0, 2.0, 3.0]
    out = pp_outlyingness(Y, PPConfig(50))
    t = list(range(11))
    med = oracles.median(t)
    mad = oracles.median([abs(v - med) for v in t])
    want = np.array([abs(v - med) / mad for v in t])
    np.testing.assert_allclose(out, want, atol=1e-10)
    assert set(np.flatnonzero(out > out.max() - 1e-10)) == {0, 10}


def test_far_point_most_outlying():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        Y = rng.normal(size=(40, 4)) * 0.1
        v = rng.normal(size=4)
        Y[seed % 40] = 1e6 * v / np.linalg.norm(v)
        out = pp_outlyingness(Y, PPConfig(100, seed=seed))
        assert np.argmax(out) == seed % 40
        assert np.sum(out == out.max()) == 1


def test_rotation_keeps_ranking():
    rng = np.random.default_rng(3)
    Y = rng.normal(size=(50, 6)) * [5, 3, 2, 1, 1, 0.5]
    R = ortho_group.rvs(6, random_state=4)
    cfg = PPConfig(300, seed=7)
    a, b = pp_outlyingness(Y, cfg), pp_outlyingness(Y @ R, cfg)
    np.testing.assert_allclose(a, b, rtol=1e-8)
    np.testing.assert_array_equal(np.argsort(a, kind="stable"), np.argsort(b, kind="stable"))


def test_zero_mad_rule():
    Y = np.zeros((10, 2))
    Y[:9, 0] = np.arange(9)
    Y[9] = [4.0, 1.0]
    out = pp_outlyingness(Y, PPConfig(400))
    # Rows 4 and 9 give the direction (0, 1); its MAD is 0 and only row 9 is off the median.
    assert np.isinf(out[9])
    assert np.isfinite(out[:9]).all()


def test_pairs_are_distinct_rows():
    Y = np.random.default_rng(0).normal(size=(10, 3))
    Y[5] = Y[6]
    pairs = draw_direction_pairs(Y, 500, 1)
    assert np.all(pairs[:, 0] != pairs[:, 1])
    assert not np.any({tuple(p) for p in pairs} & {(5, 6), (6, 5)})


def test_subset_size_and_determinism():
    Y = np.random.default_rng(1).normal(size=(80, 7))
    r1 = pp_subset_and_fit(Y, 3, PPConfig(seed=5, threads=1))
    assert r1.subset.size == subset_size_h(80, 3)
    for threads in (2, 8):
        r2 = pp_subset_and_fit(Y, 3, PPConfig(seed=5, threads=threads))
        np.testing.assert_array_equal(r1.subset, r2.subset)
        np.testing.assert_array_equal(r1.outlyingness, r2.outlyingness)


@pytest.mark.parametrize("fraction", [0.2, 0.4])
def test_huge_norm_outliers_excluded(fraction):
    rng = np.random.default_rng(2)
    n, p, q = 100, 6, 3
    Y = rng.normal(size=(n, p))
    clean_max = pca_fit_on_subset(Y, np.arange(n), q).eigenvalues[0]
    bad = rng.choice(n, int(fraction * n), replace=False)
    V = rng.normal(size=(bad.size, p))
    Y[bad] = 1e9 * V / np.linalg.norm(V, axis=1, keepdims=True)
    res = pp_subset_and_fit(Y, q, PPConfig(seed=3))
    assert not np.isin(res.subset, bad).any()
    assert res.model.eigenvalues[0] < 10 * clean_max


def test_explosion_at_breakdown_limit():
    rng = np.random.default_rng(8)
    n, p, q = 101, 5, 2
    Y = rng.normal(size=(n, p))
    clean_max = pca_fit_on_subset(Y, np.arange(n), q).eigenvalues[0]
    c = (n - 1) // 2 - 1
    Y[:c] = 1e9 * rng.normal(size=(c, p))
    res = pp_subset_and_fit(Y, q, PPConfig(seed=1))
    assert res.model.eigenvalues[0] < 10 * clean_max
