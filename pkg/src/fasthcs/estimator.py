"""End-to-end FastHCS fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iindex import IIndexResult, SearchConfig, search, subset_size_h
from .ppursuit import PPConfig, PPResult, pp_subset_and_fit
from .reduce import DataMatrix, PcaModel, ReducedBasis, as_data_matrix, center_and_reduce
from .select import SelectionOutcome, select_final


@dataclass(frozen=True)
class FastHCSFit:
    model: PcaModel
    selection: SelectionOutcome
    iindex: IIndexResult
    pp: PPResult
    reduced: ReducedBasis

    @property
    def subset(self) -> np.ndarray:
        return self.model.subset

    @property
    def h(self) -> int:
        return self.model.h


def fasthcs(
    data: DataMatrix | np.ndarray,
    q: int,
    seed: int = 1,
    e: int | None = None,
    K: int = 25,
    W: int = 5,
    n_directions: int = 1000,
    threads: int = 1,
    search_config: SearchConfig | None = None,
) -> FastHCSFit:
    """Robust PCA fit with q components.

    ``e`` is the presumed number of clean rows (default h); it only changes
    how many starting subsets are drawn.
    """
    Y = as_data_matrix(data).values
    rb = center_and_reduce(Y)
    cfg = search_config or SearchConfig(q=q, e=e, K=K, W=W, seed=seed, threads=threads)
    ires = search(rb, cfg, Y)
    pres = pp_subset_and_fit(Y, q, PPConfig(n_directions, seed, threads), X=rb.X)
    outcome = select_final(Y, ires, pres, q)
    return FastHCSFit(outcome.model, outcome, ires, pres, rb)


def clean_count_from_fraction(n: int, q: int, fraction: float) -> int:
    """Map a presumed clean fraction to e, clamped into [h, n - 1]."""
    e = int(np.ceil(fraction * n))
    return min(max(e, subset_size_h(n, q)), n - 1)
