"""Replace n - h rows by a point mass or by far points and report the fitted spectrum.

    python3 scripts/breakdown.py --kind far --runs 50
"""

import argparse

import numpy as np

from fasthcs import fasthcs, pca_fit_on_subset, subset_size_h


def run(kind: str, runs: int, n: int, p: int, q: int) -> None:
    h = subset_size_h(n, q)
    bad = np.arange(n - h)
    scale = np.r_[np.linspace(4, 1, q), np.full(p - q, 0.5)]
    for seed in range(runs):
        rng = np.random.default_rng(seed)
        Y = rng.normal(size=(n, p)) * scale
        clean = pca_fit_on_subset(Y, np.arange(n), q).eigenvalues
        if kind == "point":
            Y[bad] = rng.normal(size=p)
        else:
            Z = rng.normal(size=(len(bad), p))
            Y[bad] = 1e9 * Z / np.linalg.norm(Z, axis=1, keepdims=True)
        fit = fasthcs(Y, q, seed=seed)
        L = fit.model.eigenvalues
        hit = int(np.isin(fit.iindex.subset, bad).sum())
        print(
            f"seed={seed:3d} l1/clean={L[0] / clean[0]:8.3f} lq={L[-1]:10.3g} "
            f"I-subset outliers={hit:3d} chose_pp={fit.selection.chose_pp}"
        )


def main() -> None:
    ap = argparse.ArgumentParser(description="breakdown check")
    ap.add_argument("--kind", choices=["point", "far"], default="far")
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--p", type=int, default=10)
    ap.add_argument("--q", type=int, default=3)
    a = ap.parse_args()
    run(a.kind, a.runs, a.n, a.p, a.q)


if __name__ == "__main__":
    main()
