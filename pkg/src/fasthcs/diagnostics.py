"""Orthogonal and score distances, their cut-offs, and outlier flags."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError
from .iindex import subset_size_h
from .parallel import parallel_map
from .quantiles import chi2_quantile, normal_quantile
from .reduce import PcaModel, as_data_matrix

_ROW_CHUNK = 4096
EXACT_FIT_RTOL = 1e-12


class Flag(str, enum.Enum):
    REGULAR = "regular"
    OD_OUTLIER = "od_outlier"
    SD_OUTLIER = "sd_outlier"
    BOTH = "both"


@dataclass(frozen=True)
class DiagnosticReport:
    od: np.ndarray
    sd: np.ndarray
    od_cutoff: float
    sd_cutoff: float
    scaled_od: np.ndarray
    scaled_sd: np.ndarray
    flags: tuple[Flag, ...]
    exact_fit: bool = False

    @property
    def n(self) -> int:
        return self.od.shape[0]

    @property
    def outliers(self) -> np.ndarray:
        return np.array([f is not Flag.REGULAR for f in self.flags])


def orthogonal_distances(model: PcaModel, Y: np.ndarray) -> np.ndarray:
    centered = np.atleast_2d(np.asarray(Y, dtype=float)) - model.center
    resid = centered - (centered @ model.loadings) @ model.loadings.T
    return np.linalg.norm(resid, axis=1)


def orthogonal_distance(model: PcaModel, y) -> float:
    return float(orthogonal_distances(model, y)[0])


def score_distances(model: PcaModel, Y: np.ndarray) -> np.ndarray:
    L = model.eigenvalues
    if np.any(L <= 0):
        raise DegenerateModelError(
            f"model has a zero eigenvalue (exact fit); reduce q below {model.q}"
        )
    scores = (np.atleast_2d(np.asarray(Y, dtype=float)) - model.center) @ model.loadings
    return np.sqrt(np.sum(scores**2 / L, axis=1))


def score_distance(model: PcaModel, y) -> float:
    return float(score_distances(model, y)[0])


def od_cutoff(ods_on_H, e_over_n: float) -> float:
    """Wilson-Hilferty cut-off for orthogonal distances.

    (mean(od^2/3) + z_0.975 * sqrt(var(od^2/3) / chi2_{e/n,1}))^(3/2), with
    the sample variance (divisor |H| - 1). Returns 0 when every od is zero.
    """
    t = np.asarray(ods_on_H, dtype=float) ** (2.0 / 3.0)
    if t.size < 2:
        raise ValueError("need at least two distances")
    if not 0.0 < e_over_n < 1.0:
        raise ValueError(f"e_over_n must lie in (0, 1), got {e_over_n}")
    spread = np.sqrt(t.var(ddof=1) / chi2_quantile(e_over_n, 1))
    return float((t.mean() + normal_quantile(0.975) * spread) ** 1.5)


def sd_cutoff(q: int) -> float:
    return float(np.sqrt(chi2_quantile(0.975, q)))


def _scale(dist: np.ndarray, cutoff: float) -> np.ndarray:
    if cutoff > 0:
        return dist / cutoff
    return np.where(dist > 0, np.inf, 0.0)


def diagnose(data, model: PcaModel, e_over_n: float | None = None, threads: int = 1) -> DiagnosticReport:
    """Distances of every row to ``model`` and flags against the 97.5% cut-offs.

    The orthogonal-distance cut-off is estimated on the model's fitting
    subset; ``e_over_n`` defaults to h/n.
    """
    Y = as_data_matrix(data).values
    n = Y.shape[0]
    if model.center.shape[0] != Y.shape[1]:
        raise ValueError(
            f"model has {model.center.shape[0]} variables, data has {Y.shape[1]}"
        )
    if e_over_n is None:
        e_over_n = subset_size_h(n, model.q) / n
    chunks = [Y[i : i + _ROW_CHUNK] for i in range(0, n, _ROW_CHUNK)]
    od = np.concatenate(parallel_map(lambda c: orthogonal_distances(model, c), chunks, threads))
    sd = np.concatenate(parallel_map(lambda c: score_distances(model, c), chunks, threads))
    # Rows on the model's span up to rounding are exact-fit rows.
    od[od**2 <= EXACT_FIT_RTOL * model.eigenvalues.sum()] = 0.0
    c_od = od_cutoff(od[model.subset], e_over_n)
    c_sd = sd_cutoff(model.q)
    scaled_od, scaled_sd = _scale(od, c_od), _scale(sd, c_sd)
    flags = tuple(
        Flag.BOTH if o and s else Flag.OD_OUTLIER if o else Flag.SD_OUTLIER if s else Flag.REGULAR
        for o, s in zip(scaled_od > 1.0, scaled_sd > 1.0)
    )
    return DiagnosticReport(od, sd, c_od, c_sd, scaled_od, scaled_sd, flags, c_od == 0.0)
