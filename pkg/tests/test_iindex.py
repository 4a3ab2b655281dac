import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fasthcs.errors import ConfigurationError, DegenerateSubsetError
from fasthcs.iindex import (
    SearchConfig,
    compute_scores,
    growing_step,
    i_index,
    i_index_terms,
    num_starting_subsets,
    omega,
    sample_direction,
    search,
    squared_hyperplane_distance,
    subset_size_h,
)
from fasthcs.parallel import rng_for
from fasthcs.reduce import center_and_reduce
from fasthcs.simharness import ContaminationSpec, generate

import oracles

# ceil(log 0.01 / log(1 - (e/n)^(q+1))) at 50 digits (mpmath)
M_TABLE = [
    ((200, 5, 103), 245),
    ((200, 5, 120), 97),
    ((100, 3, 52), 61),
    ((50, 2, 27), 27),
    ((200, 5, 150), 24),
]


@pytest.mark.parametrize("n,q,h", [(200, 5, 103), (200, 10, 106), (130, 15, 73)])
def test_h(n, q, h):
    assert subset_size_h(n, q) == h


@pytest.mark.parametrize("args,M", M_TABLE)
def test_num_starting_subsets(args, M):
    assert num_starting_subsets(*args) == M


def test_num_starting_subsets_monotone_and_errors():
    Ms = [num_starting_subsets(200, 5, e) for e in range(103, 200)]
    assert all(a >= b for a, b in zip(Ms, Ms[1:]))
    with pytest.raises(ConfigurationError):
        num_starting_subsets(200, 5, 102)
    with pytest.raises(ConfigurationError, match="smaller q"):
        num_starting_subsets(10_000, 400, 5201)


def test_omega_sequence():
    assert [omega(200, 5, 5, w) for w in range(1, 6)] == [26, 45, 65, 84, 103]
    assert oracles.omega_seq(200, 5, 5) == [26, 45, 65, 84, 103]


def test_last_omega_is_h_on_grid():
    for n in range(3, 501):
        for q in range(1, n - 1):
            for W in (1, 2, 5, 7):
                assert omega(n, q, W, W) == subset_size_h(n, q)


def test_scores_centered_on_start():
    X = np.random.default_rng(0).normal(size=(30, 6))
    H0 = [1, 4, 9, 16, 25]
    scores, _ = compute_scores(X, H0, 4)
    np.testing.assert_allclose(scores[H0].mean(axis=0), 0, atol=1e-10)


def test_scores_one_dimensional():
    X = np.random.default_rng(1).normal(size=(10, 3))
    H0 = [2, 7]
    seg = X[7] - X[2]
    u = seg / np.linalg.norm(seg)
    mid = X[H0].mean(axis=0)
    from fasthcs.reduce import pca_fit_on_subset

    fit = pca_fit_on_subset(X, H0, 1, 1.0)
    got = fit.scores(X)[:, 0]
    want = (X - mid) @ u
    np.testing.assert_allclose(np.abs(got), np.abs(want), atol=1e-10)
    assert abs(abs(got @ want) - want @ want) < 1e-10


def test_scores_rotate_with_data():
    from scipy.stats import ortho_group

    X = np.random.default_rng(2).normal(size=(20, 5))
    R = ortho_group.rvs(5, random_state=3)
    H0 = [0, 3, 5, 8]
    s1, _ = compute_scores(X, H0, 3)
    s2, _ = compute_scores(X @ R, H0, 3)
    np.testing.assert_allclose(s1 @ s1.T, s2 @ s2.T, atol=1e-8)


def test_degenerate_start():
    X = np.zeros((10, 4))
    X[:, 0] = np.arange(10)
    with pytest.raises(DegenerateSubsetError):
        compute_scores(X, [0, 1, 2, 3], 3)


@pytest.mark.parametrize(
    "points,a", [([[1, 0], [0, 1]], [1, 1]), ([[2, 0], [0, 2]], [0.5, 0.5])]
)
def test_sample_direction_examples(points, a):
    scores = np.array(points, dtype=float)
    got = sample_direction(scores, [0, 1], np.random.default_rng(0))
    np.testing.assert_allclose(got, a, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_sample_direction_residual(seed):
    rng = np.random.default_rng(seed)
    scores = rng.normal(size=(12, 3)) + 0.5
    H0 = np.arange(4)
    a = sample_direction(scores, H0, rng_for(seed))
    fits = np.sort(np.abs(scores[H0] @ a - 1))[:3]
    assert fits.max() <= 1e-8


def test_squared_hyperplane_distance():
    assert squared_hyperplane_distance([0, 0], [1, 1]) == pytest.approx(0.5)
    assert squared_hyperplane_distance([0.25, 0.75], [1, 1]) == pytest.approx(0, abs=1e-15)
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, s = rng.normal(size=3), rng.normal(size=3)
        # geometric distance: the foot of the perpendicular from s onto {x : x.a = 1}
        foot = s - (s @ a - 1) / (a @ a) * a
        assert squared_hyperplane_distance(s, a) == pytest.approx(np.sum((s - foot) ** 2), rel=1e-12)


def test_i_index_zero_when_subset_is_optimal():
    d2 = np.random.default_rng(4).random((12, 3))
    d2[:8] *= 1e-3
    assert i_index(np.arange(8), d2, 8) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_i_index_matches_straight_line(seed):
    rng = np.random.default_rng(seed)
    d2 = rng.exponential(size=(12, 3))
    H = np.sort(rng.choice(12, 8, replace=False))
    terms, _ = i_index_terms(H, d2, 8)
    assert np.all(terms >= 0)
    assert i_index(H, d2, 8) == pytest.approx(oracles.i_index(list(H), d2, 8), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_growing_step_matches_straight_line(seed):
    rng = np.random.default_rng(seed)
    d2 = rng.exponential(size=(30, 4))
    H0 = np.sort(rng.choice(30, 4, replace=False))
    got = growing_step(H0, d2, 3, 5)
    assert got.size == subset_size_h(30, 3)
    assert list(got) == oracles.grow(list(H0), d2, 3, 5)


def test_growing_step_ties_go_to_lowest_index():
    d2 = np.ones((10, 2))
    got = growing_step(np.array([7, 8, 9]), d2, 2, 2)
    assert list(got) == list(range(subset_size_h(10, 2)))


def test_far_outlier_never_grown_into():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 3))
    X[17] = [0.0, 0.0, 500.0]
    H0 = np.array([0, 1, 2, 3])
    scores, _ = compute_scores(X, H0, 3)
    cfg = SearchConfig(q=3)
    from fasthcs.iindex import evaluate_candidate

    cand = evaluate_candidate(X, H0, cfg, rng_for(1, 0))
    assert 17 not in cand.grown
    d2 = oracles.hyperplane_d2(cand.scores, cand.members)
    H = list(H0)
    for size in oracles.omega_seq(40, 3, cfg.W):
        D = (d2 / d2[H].mean(axis=0)).mean(axis=1)
        H = sorted(np.argsort(D, kind="stable")[:size])
        assert 17 not in H


def _toy(seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(12, 4)) * [3, 2, 0.3, 0.2]
    X[[3, 9]] += [0, 0, 6, -5]
    return X


def test_exhaustive_search_equals_oracle():
    X = _toy()
    q, n = 2, 12
    h = subset_size_h(n, q)
    rb = center_and_reduce(X)
    cfg = SearchConfig(q=q, K=3, exhaustive=True)
    res = search(rb, cfg, keep_candidates=True)
    assert res.n_candidates == len(list(itertools.combinations(range(n), q + 1)))
    best = None
    for cand in res.candidates:
        scores = oracles.subset_scores(rb.X, cand.start, q)
        d2 = oracles.hyperplane_d2(scores, cand.members)
        H = oracles.grow(list(cand.start), d2, q, cfg.W)
        value = oracles.i_index(H, d2, h)
        assert value == pytest.approx(cand.i_value, abs=1e-9)
        key = (round(value, 9), cand.m)
        if best is None or key < best[0]:
            best = (key, H)
    assert list(res.subset) == best[1]


def test_search_is_scale_invariant():
    X = _toy(1)
    cfg = SearchConfig(q=2, K=3, seed=4)
    a = search(center_and_reduce(X), cfg)
    b = search(center_and_reduce(X * 37.5), cfg)
    np.testing.assert_array_equal(a.subset, b.subset)


def test_search_deterministic_across_threads():
    X = np.random.default_rng(6).normal(size=(60, 8))
    rb = center_and_reduce(X)
    base = search(rb, SearchConfig(q=3, seed=9, threads=1))
    for threads in (2, 8):
        other = search(rb, SearchConfig(q=3, seed=9, threads=threads))
        np.testing.assert_array_equal(base.subset, other.subset)
        assert base.i_value == other.i_value
        np.testing.assert_array_equal(base.model.loadings, other.model.loadings)


def test_search_refits_on_full_space():
    Y = np.random.default_rng(7).normal(size=(20, 40))
    rb = center_and_reduce(Y)
    res = search(rb, SearchConfig(q=3), Y)
    assert res.model.center.shape == (40,)
    assert res.model.subset.size == subset_size_h(20, 3)


@pytest.mark.slow
def test_point_mass_outliers_excluded():
    clean = 0
    for seed in range(100):
        spec = ContaminationSpec(n=200, p=100, q=5, epsilon=0.4, nu=6, config="point_mass", seed=seed)
        data, truth = generate(spec)
        res = search(center_and_reduce(data), SearchConfig(q=5, seed=seed))
        clean += not truth.labels[res.subset].any()
    assert clean >= 95
