"""Projection-pursuit outlyingness and the fallback h-subset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError
from .iindex import subset_size_h
from .parallel import parallel_map, rng_for
from .reduce import Method, PcaModel, pca_fit_on_subset

_CHUNK = 256


@dataclass(frozen=True)
class PPConfig:
    n_directions: int = 1000
    seed: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.n_directions < 1:
            raise ConfigurationError("n_directions must be >= 1")


@dataclass(frozen=True)
class PPResult:
    subset: np.ndarray
    model: PcaModel
    outlyingness: np.ndarray


def draw_direction_pairs(Y: np.ndarray, n_directions: int, seed: int) -> np.ndarray:
    """(B, 2) row pairs whose difference vectors are nonzero."""
    n = Y.shape[0]
    rng = rng_for(seed, 0x5050)

    def draw(k):
        a = rng.integers(n, size=k)
        b = rng.integers(n - 1, size=k)
        b += b >= a
        return np.column_stack([a, b])

    pairs = draw(n_directions)
    for _ in range(100):
        zero = ~np.any(Y[pairs[:, 0]] != Y[pairs[:, 1]], axis=1)
        if not zero.any():
            return pairs
        pairs[zero] = draw(int(zero.sum()))
    raise DegenerateInputError("could not draw distinct rows for projection directions")


def _chunk_outlyingness(Y: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    V = (Y[pairs[:, 0]] - Y[pairs[:, 1]]).T
    proj = Y @ V
    dev = np.abs(proj - np.median(proj, axis=0))
    mad = np.median(dev, axis=0)
    out = np.zeros_like(dev)
    pos = mad > 0
    out[:, pos] = dev[:, pos] / mad[pos]
    # Zero MAD: anything off the median is infinitely outlying along v.
    out[:, ~pos] = np.where(dev[:, ~pos] > 0, np.inf, 0.0)
    return out.max(axis=1)


def pp_outlyingness(Y: np.ndarray, cfg: PPConfig = PPConfig()) -> np.ndarray:
    """max over random two-point directions v of |y.v - med| / MAD."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] < 3:
        raise ConfigurationError("need at least 3 observations")
    pairs = draw_direction_pairs(Y, cfg.n_directions, cfg.seed)
    chunks = [pairs[i : i + _CHUNK] for i in range(0, len(pairs), _CHUNK)]
    parts = parallel_map(lambda c: _chunk_outlyingness(Y, c), chunks, cfg.threads)
    return np.max(parts, axis=0)


def pp_subset_and_fit(
    Y: np.ndarray, q: int, cfg: PPConfig = PPConfig(), X: np.ndarray | None = None
) -> PPResult:
    """h least outlying rows and their PCA fit on ``Y``.

    Outlyingness is computed on ``X`` when given (an isometric copy of the
    centered ``Y``, e.g. the kernel-reduced coordinates), which is cheaper.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    out = pp_outlyingness(Y if X is None else X, cfg)
    h = subset_size_h(n, q)
    H = np.sort(np.argsort(out, kind="stable")[:h])
    model = pca_fit_on_subset(Y, H, q, np.sqrt(h - 1), Method.PROJECTION_PURSUIT)
    return PPResult(H, model, out)
