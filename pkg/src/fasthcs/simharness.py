"""Contaminated-data generator and Monte-Carlo bias study."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import FastHCSError, GenerationError
from .estimator import fasthcs
from .iindex import SearchConfig, subset_size_h
from .parallel import derive_seed, parallel_map, rng_for
from .quantiles import chi2_quantile
from .reduce import DataMatrix, classical_pca

logger = logging.getLogger(__name__)

NU_RTOL = 1e-3


class Contamination(str, enum.Enum):
    SHIFT = "shift"
    POINT_MASS = "point_mass"


@dataclass(frozen=True)
class ContaminationSpec:
    n: int
    p: int
    q: int
    epsilon: float
    nu: float
    config: Contamination = Contamination.SHIFT
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "config", Contamination(self.config))
        if not 0.0 <= self.epsilon < 0.5:
            raise GenerationError(f"epsilon must lie in [0, 0.5), got {self.epsilon}")
        if self.nu <= 0:
            raise GenerationError(f"nu must be positive, got {self.nu}")
        if not self.p > self.q >= 2:
            raise GenerationError(f"need p > q >= 2, got p={self.p}, q={self.q}")
        if self.n - self.n_outliers < subset_size_h(self.n, self.q):
            raise GenerationError("fewer clean rows than h")

    @property
    def n_outliers(self) -> int:
        return int(math.floor(self.epsilon * self.n))


@dataclass(frozen=True)
class GroundTruth:
    sigma_u: np.ndarray  # diagonal entries of the clean covariance
    pi_q: np.ndarray  # p x q true loadings
    labels: np.ndarray  # True for outliers
    mu_c: np.ndarray | None = None

    @property
    def q(self) -> int:
        return self.pi_q.shape[1]


@dataclass(frozen=True)
class BiasRecord:
    spec: ContaminationSpec
    method: str
    bias_vq: float
    maxsub: float
    sumsub: float
    replicate: int
    failed: bool = False


def fibonacci(k: int) -> list[int]:
    out = [1, 1]
    while len(out) < k:
        out.append(out[-1] + out[-2])
    return out[:k]


def make_sigma_u(p: int, q: int) -> np.ndarray:
    """Diagonal of the clean covariance: Fibonacci head, linear 0.1 -> 0.001 tail."""
    if not p > q >= 2:
        raise GenerationError(f"need p > q >= 2, got p={p}, q={q}")
    head = sorted(fibonacci(q), reverse=True)
    tail = np.linspace(0.1, 0.001, p - q)
    return np.concatenate([np.asarray(head, dtype=float), tail])


# Pluggable clean-covariance generators: name -> f(p, q) -> diagonal entries.
SIGMA_GENERATORS: dict[str, Callable[[int, int], np.ndarray]] = {"fibonacci": make_sigma_u}


def nu_statistic(X: np.ndarray, sigma_diag: np.ndarray) -> float:
    """min_i sqrt(x_i' Sigma^-1 x_i / chi2_{0.975,p}) for a diagonal Sigma."""
    p = X.shape[1]
    maha = np.sum(X**2 / sigma_diag, axis=1)
    return float(np.sqrt(maha.min() / chi2_quantile(0.975, p)))


def _place_outliers(noise: np.ndarray, sigma: np.ndarray, axis: int, nu: float) -> float:
    """Shift along ``axis`` that makes the nu statistic of ``noise`` equal to nu."""
    p = noise.shape[1]
    crit = chi2_quantile(0.975, p)
    along = noise[:, axis]
    rest = np.sum(noise**2 / sigma, axis=1) - along**2 / sigma[axis]

    def stat(m):
        return math.sqrt(np.min((along + m) ** 2 / sigma[axis] + rest) / crit) - nu

    # min_i of functions increasing in m beyond every -along_i
    lo = max(0.0, float(np.max(-along)))
    if stat(lo) > nu * NU_RTOL:
        raise GenerationError(f"nu={nu} is closer than the outlier spread allows")
    hi = max(1.0, 2 * lo)
    while stat(hi) < 0:
        hi *= 2
    return brentq(stat, lo, hi, xtol=1e-14, rtol=1e-13)


def generate(spec: ContaminationSpec, sigma: str = "fibonacci") -> tuple[DataMatrix, GroundTruth]:
    """Clean Gaussian rows plus floor(eps n) outliers along the (q+1)-th axis.

    The outliers get the clean covariance (shift) or 1e-4 times it (point
    mass), and are moved so their closest member sits at exactly ``nu``.
    """
    n, p, q = spec.n, spec.p, spec.q
    sigma_u = SIGMA_GENERATORS[sigma](p, q)
    rng = rng_for(spec.seed, 0x5151)
    c = spec.n_outliers
    X = rng.standard_normal((n, p)) * np.sqrt(sigma_u)
    labels = np.zeros(n, dtype=bool)
    mu_c = None
    if c > 0:
        scale = 1.0 if spec.config is Contamination.SHIFT else 1e-2
        noise = rng.standard_normal((c, p)) * np.sqrt(sigma_u) * scale
        shift = _place_outliers(noise, sigma_u, q, spec.nu)
        mu_c = np.zeros(p)
        mu_c[q] = shift
        X[n - c :] = noise + mu_c
        labels[n - c :] = True
    pi_q = np.eye(p)[:, :q]
    return DataMatrix(X, labels), GroundTruth(sigma_u, pi_q, labels, mu_c)


def shape_bias(eigvals, loadings, truth: GroundTruth) -> float:
    """log condition number of Gamma^-1/2 G Gamma^-1/2 on its rank-q spectrum.

    Returns inf when the q-th eigenvalue vanishes.
    """
    L = np.asarray(eigvals, dtype=float)
    P = np.asarray(loadings, dtype=float)
    q = truth.q
    lam = truth.sigma_u[:q]
    if np.any(L <= 0):
        return math.inf
    g = L / np.exp(np.mean(np.log(L)))
    gamma = lam / np.exp(np.mean(np.log(lam)))
    # Pseudo-inverse square root of Gamma acts only on span(pi_q).
    B = (truth.pi_q.T @ P) * g
    B = B @ (P.T @ truth.pi_q)
    inv_root = 1.0 / np.sqrt(gamma)
    B = inv_root[:, None] * B * inv_root[None, :]
    ev = np.linalg.eigvalsh((B + B.T) / 2)
    if ev[-1] <= 0 or ev[0] <= ev[-1] * 1e-14:
        return math.inf
    return float(np.log(ev[-1] / ev[0]))


def _principal_cosines_sq(P, Pi) -> np.ndarray:
    M = np.asarray(Pi).T @ np.asarray(P)
    return np.clip(np.linalg.eigvalsh(M @ M.T), 0.0, 1.0)


def maxsub(P, Pi) -> float:
    return float(np.arccos(np.sqrt(_principal_cosines_sq(P, Pi)[0])))


def sumsub(P, Pi) -> float:
    return float(np.sum(_principal_cosines_sq(P, Pi)))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 200
    p: Sequence[int] = (100,)
    q: Sequence[int] = (5,)
    epsilon: Sequence[float] = (0.2, 0.4)
    nu: Sequence[float] = (2, 4, 6, 8, 10)
    config: Sequence[str] = ("shift", "point_mass")
    replicates: int = 50
    methods: Sequence[str] = ("fasthcs", "classical")
    seed: int = 1
    workers: int = 1
    e_over_n: float = 0.6
    K: int = 25
    W: int = 5
    n_directions: int = 1000

    @classmethod
    def from_dict(cls, raw: dict) -> ExperimentConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in raw.items()})
        bad = set(cfg.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods: {sorted(bad)}")
        if cfg.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not 0 < cfg.e_over_n < 1:
            raise ValueError("e_over_n must lie in (0, 1)")
        for c in cfg.config:
            Contamination(c)
        if not cfg.cells():
            raise ValueError("empty grid")
        return cfg

    def cells(self) -> list[ContaminationSpec]:
        return [
            ContaminationSpec(self.n, p, q, eps, nu, Contamination(c))
            for p in self.p
            for q in self.q
            for eps in self.epsilon
            for c in self.config
            for nu in self.nu
        ]


def _fit_fasthcs(data: DataMatrix, spec: ContaminationSpec, cfg: ExperimentConfig, seed: int):
    n = spec.n
    e = min(max(int(round(cfg.e_over_n * n)), subset_size_h(n, spec.q)), n - 1)
    return fasthcs(data, spec.q, seed=seed, e=e, K=cfg.K, W=cfg.W, n_directions=cfg.n_directions).model


METHODS: dict[str, Callable] = {
    "fasthcs": _fit_fasthcs,
    "classical": lambda data, spec, cfg, seed: classical_pca(data, spec.q),
}


def run_replicate(
    template: ContaminationSpec, cell_id: int, replicate: int, cfg: ExperimentConfig
) -> list[BiasRecord]:
    spec = replace(template, seed=derive_seed(cfg.seed, cell_id, replicate))
    try:
        data, truth = generate(spec)
    except GenerationError:
        logger.warning("cell %d replicate %d: generation failed", cell_id, replicate)
        return [BiasRecord(spec, m, math.inf, math.nan, math.nan, replicate, True) for m in cfg.methods]
    out = []
    for method in cfg.methods:
        try:
            model = METHODS[method](data, spec, cfg, derive_seed(spec.seed, 1))
        except (FastHCSError, np.linalg.LinAlgError) as exc:
            logger.warning("cell %d replicate %d %s failed: %s", cell_id, replicate, method, exc)
            out.append(BiasRecord(spec, method, math.inf, math.nan, math.nan, replicate, True))
            continue
        out.append(
            BiasRecord(
                spec,
                method,
                shape_bias(model.eigenvalues, model.loadings, truth),
                maxsub(model.loadings, truth.pi_q),
                sumsub(model.loadings, truth.pi_q),
                replicate,
            )
        )
    return out


def quantile(values: Iterable[float], prob: float) -> float:
    """Linear-interpolation quantile that tolerates +inf entries."""
    v = np.sort(np.asarray(list(values), dtype=float))
    v = v[~np.isnan(v)]
    if v.size == 0:
        return math.nan
    pos = prob * (v.size - 1)
    lo, hi = int(math.floor(pos)), int(math.ceil(pos))
    w = pos - lo
    if w == 0 or v[lo] == v[hi]:
        return float(v[lo])
    return float(v[lo] + w * (v[hi] - v[lo]))


@dataclass(frozen=True)
class SummaryRow:
    n: int
    p: int
    q: int
    epsilon: float
    nu: float
    config: str
    method: str
    statistic: str
    median: float
    q75: float
    n_ok: int
    n_failed: int


STATISTICS = ("bias_vq", "maxsub", "sumsub")


def summarize(records: Sequence[BiasRecord]) -> list[SummaryRow]:
    groups: dict[tuple, list[BiasRecord]] = {}
    for r in records:
        s = r.spec
        key = (s.n, s.p, s.q, s.epsilon, s.nu, s.config.value, r.method)
        groups.setdefault(key, []).append(r)
    rows = []
    for key, recs in groups.items():
        failed = sum(r.failed for r in recs)
        for stat in STATISTICS:
            vals = [getattr(r, stat) for r in recs]
            rows.append(
                SummaryRow(*key, stat, quantile(vals, 0.5), quantile(vals, 0.75), len(recs) - failed, failed)
            )
    return rows


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[BiasRecord] = field(default_factory=list)
    summary: list[SummaryRow] = field(default_factory=list)

    def lookup(self, **match) -> list[SummaryRow]:
        return [r for r in self.summary if all(getattr(r, k) == v for k, v in match.items())]


def _job(args):
    template, cell_id, replicate, cfg = args
    return run_replicate(template, cell_id, replicate, cfg)


def run_experiment(
    cfg: ExperimentConfig, progress: Callable[[int, int], None] | None = None
) -> ExperimentResult:
    """Run every cell x replicate and summarize median / 75th percentile per method."""
    cells = cfg.cells()
    records: list[BiasRecord] = []
    for cell_id, template in enumerate(cells):
        jobs = [(template, cell_id, r, cfg) for r in range(cfg.replicates)]
        for recs in parallel_map(_job, jobs, cfg.workers, processes=True):
            records.extend(recs)
        if progress is not None:
            progress(cell_id + 1, len(cells))
    return ExperimentResult(cfg, records, summarize(records))


def two_group_dataset(
    n_main: int = 80,
    n_minor: int = 50,
    p: int = 404,
    rank: int = 5,
    displacement: float = 5.0,
    noise: float = 0.05,
    seed: int = 0,
) -> DataMatrix:
    """Two groups of smooth curves; the minority follows a different low-rank pattern.

    Both groups share the mean curve; the minority's extra component is
    orthogonal to the main group's span, so its rows stand out in
    orthogonal distance.
    """
    rng = rng_for(seed, 0x7AB1)
    grid = np.linspace(0, 1, p)
    basis = np.array([np.sin((k + 1) * np.pi * grid) for k in range(rank + 1)]).T
    basis, _ = np.linalg.qr(basis)
    mean = 1.0 + 0.5 * np.cos(2 * np.pi * grid)
    scales = np.sqrt(np.linspace(2.0, 0.5, rank))
    main = mean + (rng.standard_normal((n_main, rank)) * scales) @ basis[:, :rank].T
    minor = mean + (rng.standard_normal((n_minor, rank)) * scales) @ basis[:, :rank].T
    minor += np.outer(displacement * (1 + 0.2 * rng.standard_normal(n_minor)), basis[:, rank])
    Y = np.vstack([main, minor]) + noise * rng.standard_normal((n_main + n_minor, p))
    labels = np.r_[np.zeros(n_main, bool), np.ones(n_minor, bool)]
    return DataMatrix(Y, labels)


def spec_as_dict(spec: ContaminationSpec) -> dict:
    d = asdict(spec)
    d["config"] = spec.config.value
    return d
