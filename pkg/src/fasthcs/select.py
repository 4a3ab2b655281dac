"""Choosing between the I-index and projection-pursuit fits."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import FastHCSError
from .iindex import ZERO_RTOL, IIndexResult
from .ppursuit import PPResult
from .reduce import PcaModel

logger = logging.getLogger(__name__)

EXACT_FIT_ITOL = 1e-12


class Sentinel(str, enum.Enum):
    """Non-finite outcomes of the selection criterion."""

    PLUS_INF = "+inf"  # forces the projection-pursuit fit
    MINUS_INF = "-inf"  # forces the I-index fit

    def __float__(self) -> float:
        return float(self.value)


def d_value_positive(d: float | Sentinel) -> bool:
    return d is Sentinel.PLUS_INF or (not isinstance(d, Sentinel) and d > 0)


@dataclass(frozen=True)
class SelectionOutcome:
    model: PcaModel
    d_value: float | Sentinel
    chose_pp: bool
    exact_fit: np.ndarray | None
    i_value: float

    @property
    def subset(self) -> np.ndarray:
        return self.model.subset


def _log_ratio(num: np.ndarray, den: np.ndarray, tiny: float) -> np.ndarray:
    """log(num/den) with log(0/0) = 0 and +-inf for a single zero."""
    num_zero, den_zero = num <= tiny, den <= tiny
    out = np.zeros_like(num)
    both = ~num_zero & ~den_zero
    out[both] = np.log(num[both] / den[both])
    out[~num_zero & den_zero] = np.inf
    out[num_zero & ~den_zero] = -np.inf
    return out


def _column_var(values: np.ndarray) -> np.ndarray:
    if values.shape[0] < 2:
        return np.zeros(values.shape[1])
    return values.var(axis=0, ddof=1)


def selection_criterion(
    Y: np.ndarray, fit_I: PcaModel, fit_PP: PcaModel, H_I, H_PP, q: int
) -> float | Sentinel:
    """Difference of relative scatter of the two fits; > 0 selects projection pursuit.

    Variances use divisor count - 1. A zero (or undefined) variance of the
    projection-pursuit projections over H_PP minus H_I returns PLUS_INF.
    """
    Y = np.asarray(Y, dtype=float)
    H_I, H_PP = np.asarray(H_I), np.asarray(H_PP)
    both = np.intersect1d(H_I, H_PP)
    only_pp = np.setdiff1d(H_PP, H_I)
    if both.size < q:
        raise FastHCSError(f"|H_I & H_PP| = {both.size} < q = {q}")
    P_I, P_PP = fit_I.loadings[:, :q], fit_PP.loadings[:, :q]
    tiny = ZERO_RTOL * max(fit_I.eigenvalues.sum(), fit_PP.eigenvalues.sum(), 1e-300)

    var_minus = _column_var(Y[only_pp] @ P_PP)
    if var_minus.max() <= tiny:
        return Sentinel.PLUS_INF

    num_I = np.mean(((Y[H_I] - fit_I.center) @ P_I) ** 2, axis=0)
    var_both = _column_var(Y[both] @ P_I)
    num_PP = np.mean(((Y[both] - fit_PP.center) @ P_PP) ** 2, axis=0)

    with np.errstate(invalid="ignore"):
        D = _log_ratio(num_I, var_both, tiny).mean() - _log_ratio(num_PP, var_minus, tiny).max()
    if np.isnan(D) or D == np.inf:
        return Sentinel.PLUS_INF
    if D == -np.inf:
        return Sentinel.MINUS_INF
    return float(D)


def detect_exact_fit(
    model: PcaModel, Y: np.ndarray, i_value: float, tol: float = 1e-12
) -> np.ndarray | None:
    """Rows lying exactly on the model's nonzero-variance affine subspace.

    Returns None unless the winning I-index is zero.
    """
    if i_value > EXACT_FIT_ITOL:
        return None
    L = model.eigenvalues
    trace = L.sum()
    P = model.loadings[:, L > trace * tol]
    centered = np.asarray(Y, dtype=float) - model.center
    resid = centered - (centered @ P) @ P.T
    return np.flatnonzero(np.sum(resid**2, axis=1) <= tol * trace)


def select_final(
    Y: np.ndarray, iindex_result: IIndexResult, pp_result: PPResult, q: int
) -> SelectionOutcome:
    i_value = iindex_result.i_value
    exact = detect_exact_fit(iindex_result.model, Y, i_value)
    if exact is not None:
        logger.info("exact fit on %d rows; keeping the I-index fit", exact.size)
        return SelectionOutcome(iindex_result.model, Sentinel.MINUS_INF, False, exact, i_value)

    d = selection_criterion(
        Y, iindex_result.model, pp_result.model, iindex_result.subset, pp_result.subset, q
    )
    chose_pp = d_value_positive(d)
    logger.info("selection criterion D=%s -> %s", d, "PP" if chose_pp else "I-index")
    model = pp_result.model if chose_pp else iindex_result.model
    return SelectionOutcome(model, d, chose_pp, None, i_value)
