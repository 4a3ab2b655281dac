"""Centering, the kernel reduction for wide data, and the subset PCA primitive."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, InputError, SubsetTooSmallError

# A singular value counts as nonzero above largest * max(n, p) * RANK_RTOL.
RANK_RTOL = np.finfo(float).eps


class Method(str, enum.Enum):
    IINDEX = "IIndex"
    PROJECTION_PURSUIT = "ProjectionPursuit"
    CLASSICAL = "Classical"


@dataclass(frozen=True)
class DataMatrix:
    """Raw observations with optional ground-truth labels (True = outlier)."""

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InputError(f"data must be a 2-d matrix, got shape {values.shape}")
        n, p = values.shape
        if n < 3:
            raise InputError(f"need at least 3 observations, got {n}")
        if p < 2:
            raise InputError(f"need at least 2 variables, got {p}")
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            i, j = bad[0]
            raise InputError(f"non-finite entry at row {i}, column {j}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=bool)
            if labels.shape != (n,):
                raise InputError(f"labels must have length {n}, got {labels.shape}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def as_data_matrix(data) -> DataMatrix:
    return data if isinstance(data, DataMatrix) else DataMatrix(data)


@dataclass(frozen=True)
class ReducedBasis:
    """Working coordinates ``X`` (n x r) with ``Y = X @ basis.T + mean``."""

    X: np.ndarray
    mean: np.ndarray
    basis: np.ndarray
    r: int

    @property
    def reduced(self) -> bool:
        return self.basis.shape[0] != self.r

    def back_transform(self, X: np.ndarray | None = None) -> np.ndarray:
        X = self.X if X is None else X
        return X @ self.basis.T + self.mean


@dataclass(frozen=True)
class PcaModel:
    center: np.ndarray
    eigenvalues: np.ndarray
    loadings: np.ndarray
    subset: np.ndarray
    method: Method = Method.IINDEX
    q: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "q", int(self.eigenvalues.shape[0]))

    @property
    def h(self) -> int:
        return int(self.subset.shape[0])

    def scores(self, Y: np.ndarray) -> np.ndarray:
        return (np.asarray(Y, dtype=float) - self.center) @ self.loadings

    def with_method(self, method: Method) -> PcaModel:
        return PcaModel(self.center, self.eigenvalues, self.loadings, self.subset, method)

    def to_full_space(self, rb: ReducedBasis) -> PcaModel:
        """Map a model fitted on ``rb.X`` back to the original variables."""
        center = rb.mean + rb.basis @ self.center
        loadings = _fix_signs(rb.basis @ self.loadings)
        return PcaModel(center, self.eigenvalues, loadings, self.subset, self.method)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that each one's largest-magnitude entry is positive."""
    if vectors.size == 0:
        return vectors
    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[rows, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def center_and_reduce(data) -> ReducedBasis:
    """Center the data and rotate it onto its r = rank(centered data) dimensional span.

    Wide data (p > n) is replaced by its kernel coordinates U sqrt(L), taken
    from the thin SVD of the centered rows (same U and L as the Gram
    eigendecomposition without squaring the condition number). Tall data is
    left as is unless it is rank deficient.
    """
    Y = as_data_matrix(data).values
    n, p = Y.shape
    mean = Y.mean(axis=0)
    Xc = Y - mean

    U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    if s[0] <= 0:
        raise DegenerateInputError("all observations are identical")
    keep = s > s[0] * max(n, p) * RANK_RTOL
    r = int(keep.sum())
    if p <= n and r == p:
        return ReducedBasis(Xc, mean, np.eye(p), p)
    U, s, V = U[:, keep], s[keep], Vt[keep].T
    if p > n:
        signs = np.sign(np.sum(_fix_signs(U) * U, axis=0))
    else:
        signs = np.sign(np.sum(_fix_signs(V) * V, axis=0))
    U, V = U * signs, V * signs
    return ReducedBasis(U * s, mean, V, r)


def pca_fit_on_subset(
    data: np.ndarray,
    H,
    q: int,
    scale_denominator: float | None = None,
    method: Method = Method.IINDEX,
) -> PcaModel:
    """Classical PCA of the rows indexed by ``H``.

    Eigenvalues are the squared singular values of the centered rows divided
    by ``scale_denominator`` (default sqrt(|H| - 1), i.e. sample covariance).
    """
    Y = np.asarray(data, dtype=float)
    H = np.unique(np.asarray(H, dtype=np.intp))
    if H.size < q + 1:
        raise SubsetTooSmallError(f"subset of size {H.size} cannot fit q={q} components")
    if q > Y.shape[1]:
        raise InputError(f"q={q} exceeds the number of variables {Y.shape[1]}")
    if scale_denominator is None:
        scale_denominator = np.sqrt(H.size - 1)
    rows = Y[H]
    center = rows.mean(axis=0)
    _, s, Vt = np.linalg.svd((rows - center) / scale_denominator, full_matrices=False)
    loadings = _fix_signs(Vt[:q].T)
    return PcaModel(center, s[:q] ** 2, loadings, H, method)


def classical_pca(data, q: int) -> PcaModel:
    Y = as_data_matrix(data).values
    return pca_fit_on_subset(Y, np.arange(Y.shape[0]), q, method=Method.CLASSICAL)
