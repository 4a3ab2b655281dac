"""The I-index h-subset: starting subsets, growing steps and candidate ranking."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, DegenerateSubsetError
from .parallel import parallel_map, rng_for
from .reduce import Method, PcaModel, ReducedBasis, pca_fit_on_subset

logger = logging.getLogger(__name__)

# Stand-in for +inf when a direction's subset average is zero but d2_i is not.
SATURATED = 1e300
# Squared quantities below ZERO_RTOL times their reference scale are exact zeros.
ZERO_RTOL = 1e-20
# A q x (q+1) hyperplane system with condition number above this is singular.
SINGULAR_RCOND = 1e-10

_MAX_COUNT = 2**63 - 1


def subset_size_h(n: int, q: int) -> int:
    """ceil((n + q + 1) / 2)."""
    return (n + q + 2) // 2


def num_starting_subsets(n: int, q: int, e: int) -> int:
    """Number of random (q+1)-subsets giving a clean one with probability >= 0.99."""
    h = subset_size_h(n, q)
    if not h <= e < n:
        raise ConfigurationError(f"need h={h} <= e < n={n}, got e={e}")
    clean = (e / n) ** (q + 1)
    if clean <= 0.0:
        raise ConfigurationError(
            f"(e/n)^(q+1) underflows for q={q}; use a smaller q or a larger e"
        )
    M = math.log(0.01) / math.log1p(-clean)
    if not math.isfinite(M) or M > _MAX_COUNT:
        raise ConfigurationError(
            f"M={M:.3g} starting subsets needed for q={q}, e={e}, n={n}; "
            "use a smaller q or a larger e"
        )
    return math.ceil(M)


def omega(n: int, q: int, W: int, w: int) -> int:
    """Subset size after growing step w (of W)."""
    return -(-(n - q - 1) * w // (2 * W)) + q + 1


@dataclass(frozen=True)
class SearchConfig:
    q: int
    e: int | None = None
    K: int = 25
    W: int = 5
    seed: int = 1
    max_resample: int = 50
    threads: int = 1
    # Evaluate every (q+1)-subset instead of M random ones (tiny n only).
    exhaustive: bool = False
    M: int | None = None

    def validate(self, n: int, p: int) -> None:
        q = self.q
        if not 2 <= q < min(p, n):
            raise ConfigurationError(f"need 2 <= q < min(p, n) = {min(p, n)}, got q={q}")
        if n <= q + 1:
            raise ConfigurationError(f"need n > q + 1, got n={n}, q={q}")
        h = subset_size_h(n, q)
        e = self.clean_count(n)
        if not h <= e < n:
            raise ConfigurationError(f"need h={h} <= e < n={n}, got e={e}")
        if self.K < 1 or self.W < 1:
            raise ConfigurationError("K and W must be >= 1")
        if self.max_resample < 0:
            raise ConfigurationError("max_resample must be >= 0")

    def clean_count(self, n: int) -> int:
        return subset_size_h(n, self.q) if self.e is None else self.e

    def num_candidates(self, n: int) -> int:
        if self.M is not None:
            return self.M
        return num_starting_subsets(n, self.q, self.clean_count(n))


@dataclass(frozen=True)
class CandidateSubset:
    m: int
    start: np.ndarray
    scores: np.ndarray
    members: np.ndarray  # K x q rows of ``start`` each hyperplane passes through
    normals: np.ndarray  # K x q unit normals
    offsets: np.ndarray  # K offsets: hyperplane is {s : s . normal = offset}
    grown: np.ndarray
    i_value: float
    exact: bool

    @property
    def directions(self) -> np.ndarray:
        """Directions a_k with s . a_k = 1 on the hyperplane (inf rows if through 0)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.normals / self.offsets[:, None]


@dataclass(frozen=True)
class IIndexResult:
    subset: np.ndarray
    model: PcaModel
    i_value: float
    exact: bool
    best: CandidateSubset
    n_candidates: int
    candidates: tuple[CandidateSubset, ...] | None = None


def compute_scores(X: np.ndarray, H0, q: int) -> tuple[np.ndarray, PcaModel]:
    """Scores of all rows on the q leading loadings of the rows in ``H0``.

    Raises DegenerateSubsetError when ``H0`` spans fewer than q - 1 dimensions.
    A span of exactly q - 1 is allowed: it is the only way an exact-fit
    subset can be seen from score space.
    """
    H0 = np.asarray(H0)
    fit = pca_fit_on_subset(X, H0, q, np.sqrt(q))
    L = fit.eigenvalues
    span = int(np.sum(L > L[0] * ZERO_RTOL)) if L[0] > 0 else 0
    if span < q - 1 or span == 0:
        raise DegenerateSubsetError(f"starting subset spans {span} < {q - 1} dimensions")
    return fit.scores(X), fit


def hyperplane_through(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched hyperplanes through q points in R^q.

    ``points`` has shape (K, q, q). Returns unit normals (K, q), offsets (K,)
    and a boolean mask of systems that were nonsingular.
    """
    K, q, _ = points.shape
    A = np.concatenate([points, -np.ones((K, q, 1))], axis=2)
    _, s, Vt = np.linalg.svd(A)
    ok = s[:, -1] > s[:, 0] * SINGULAR_RCOND
    null = Vt[:, -1, :]
    norm = np.linalg.norm(null[:, :q], axis=1)
    ok &= norm > 0
    norm[norm == 0] = 1.0
    normals = null[:, :q] / norm[:, None]
    offsets = null[:, q] / norm
    # Orient so the offset is non-negative; d2 does not depend on it.
    flip = np.where(offsets < 0, -1.0, 1.0)
    return normals * flip[:, None], offsets * flip, ok


def _draw_members(rng: np.random.Generator, H0: np.ndarray, K: int, q: int) -> np.ndarray:
    order = rng.random((K, H0.size)).argsort(axis=1)[:, :q]
    return np.sort(H0[order], axis=1)


def sample_hyperplanes(
    scores: np.ndarray, H0, K: int, rng: np.random.Generator, max_resample: int = 50
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """K hyperplanes, each through q distinct random members of ``H0`` (score space).

    Singular draws are redrawn up to ``max_resample`` times.
    """
    H0 = np.asarray(H0)
    q = scores.shape[1]
    if H0.size < q:
        raise DegenerateSubsetError(f"need at least q={q} members, got {H0.size}")
    members = _draw_members(rng, H0, K, q)
    normals, offsets, ok = hyperplane_through(scores[members])
    for _ in range(max_resample):
        if ok.all():
            break
        bad = np.flatnonzero(~ok)
        members[bad] = _draw_members(rng, H0, bad.size, q)
        normals[bad], offsets[bad], ok[bad] = hyperplane_through(scores[members[bad]])
    if not ok.all():
        raise DegenerateSubsetError("every draw of q members gave a singular system")
    return members, normals, offsets


def sample_direction(scores: np.ndarray, H0, rng: np.random.Generator, max_resample: int = 50):
    """Direction a with s_i . a = 1 for q random members i of ``H0``."""
    _, normals, offsets = sample_hyperplanes(scores, H0, 1, rng, max_resample)
    if offsets[0] <= 0:
        raise DegenerateSubsetError("hyperplane passes through the origin")
    return normals[0] / offsets[0]


def squared_hyperplane_distance(s, a) -> float:
    s, a = np.asarray(s, dtype=float), np.asarray(a, dtype=float)
    return float((s @ a - 1.0) ** 2 / (a @ a))


def squared_distances(scores, normals, offsets, reference: float) -> np.ndarray:
    """n x K matrix of squared distances to each hyperplane, tiny values snapped to 0."""
    d2 = (scores @ normals.T - offsets) ** 2
    d2[d2 <= reference * ZERO_RTOL] = 0.0
    return d2


def _normalized_outlyingness(d2: np.ndarray, H: np.ndarray) -> np.ndarray:
    den = d2[H].mean(axis=0)
    zero = den == 0
    ratio = np.empty_like(d2)
    ratio[:, ~zero] = d2[:, ~zero] / den[~zero]
    ratio[:, zero] = np.where(d2[:, zero] > 0, SATURATED, 0.0)
    return ratio.mean(axis=1)


def growing_step(H0, d2: np.ndarray, q: int, W: int) -> np.ndarray:
    """Grow ``H0`` to an h-subset in W steps of keeping the least outlying rows.

    ``d2`` is the n x K matrix of squared hyperplane distances. Ties at the
    cut-off go to the lowest index.
    """
    n = d2.shape[0]
    H = np.sort(np.asarray(H0))
    for w in range(1, W + 1):
        D = _normalized_outlyingness(d2, H)
        H = np.sort(np.argsort(D, kind="stable")[: omega(n, q, W, w)])
    return H


def i_index_terms(H, d2: np.ndarray, h: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-direction log ratios (>= 0) and the per-direction numerators."""
    H = np.asarray(H)
    # Sum sorted values on both sides so H == H_k gives exactly zero.
    num = np.sort(d2[H], axis=0).mean(axis=0)
    best = np.sort(d2, axis=0)[:h].mean(axis=0)
    terms = np.zeros_like(num)
    pos = best > 0
    terms[pos] = np.log(num[pos] / best[pos])
    terms[~pos & (num > 0)] = np.inf
    # H_k minimizes the h-subset average; negatives are summation-order noise.
    return np.maximum(terms, 0.0), num


def i_index(H, d2: np.ndarray, h: int) -> float:
    terms, _ = i_index_terms(H, d2, h)
    return float(terms.mean())


def evaluate_candidate(
    X: np.ndarray, H0, cfg: SearchConfig, rng: np.random.Generator, m: int = 0
) -> CandidateSubset:
    n = X.shape[0]
    q = cfg.q
    h = subset_size_h(n, q)
    H0 = np.sort(np.asarray(H0))
    scores, _ = compute_scores(X, H0, q)
    members, normals, offsets = sample_hyperplanes(scores, H0, cfg.K, rng, cfg.max_resample)
    reference = float(np.mean(np.sum(scores[H0] ** 2, axis=1)))
    d2 = squared_distances(scores, normals, offsets, reference)
    grown = growing_step(H0, d2, q, cfg.W)
    terms, num = i_index_terms(grown, d2, h)
    exact = bool(np.all(num == 0))
    if not exact and _is_flat_start(d2, H0):
        # A (q-1)-dimensional start is only useful when it is an exact fit.
        raise DegenerateSubsetError("flat starting subset without an exact fit")
    return CandidateSubset(
        m, H0, scores, members, normals, offsets, grown, float(terms.mean()), exact
    )


def _is_flat_start(d2: np.ndarray, H0: np.ndarray) -> bool:
    return bool(np.all(d2[H0] == 0))


def _starting_subsets(n: int, cfg: SearchConfig):
    if cfg.exhaustive:
        return list(enumerate(itertools.combinations(range(n), cfg.q + 1)))
    return [(m, None) for m in range(cfg.num_candidates(n))]


def _run_slot(X: np.ndarray, cfg: SearchConfig, m: int, start) -> CandidateSubset | None:
    n = X.shape[0]
    rng = rng_for(cfg.seed, m)
    if start is not None:
        try:
            return evaluate_candidate(X, np.array(start), cfg, rng, m)
        except DegenerateSubsetError:
            return None
    for _ in range(cfg.max_resample + 1):
        H0 = rng.choice(n, cfg.q + 1, replace=False)
        try:
            return evaluate_candidate(X, H0, cfg, rng, m)
        except DegenerateSubsetError:
            continue
    return None


def search(
    rb: ReducedBasis,
    cfg: SearchConfig,
    Y: np.ndarray | None = None,
    keep_candidates: bool = False,
) -> IIndexResult:
    """Best I-index h-subset and its PCA fit on the original variables."""
    X = rb.X
    n = X.shape[0]
    p = rb.basis.shape[0]
    cfg.validate(n, p)
    if rb.r < cfg.q:
        raise ConfigurationError(f"data has rank {rb.r} < q={cfg.q}")
    slots = _starting_subsets(n, cfg)
    results = parallel_map(lambda slot: _run_slot(X, cfg, *slot), slots, cfg.threads)
    candidates = [c for c in results if c is not None]
    if not candidates:
        raise DegenerateInputError("every starting subset was degenerate")
    if len(candidates) < len(slots):
        logger.info("%d of %d starting subsets degenerate", len(slots) - len(candidates), len(slots))
    best = min(candidates, key=lambda c: (c.i_value, c.m))
    if Y is None:
        Y = rb.back_transform()
    h = subset_size_h(n, cfg.q)
    model = pca_fit_on_subset(Y, best.grown, cfg.q, np.sqrt(h - 1), Method.IINDEX)
    return IIndexResult(
        best.grown,
        model,
        best.i_value,
        best.exact,
        best,
        len(candidates),
        tuple(candidates) if keep_candidates else None,
    )
