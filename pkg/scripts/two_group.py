"""Fit the two-group high-dimensional dataset and write a diagnostic plot.

    python3 scripts/two_group.py --out results/two_group
"""

import argparse
from pathlib import Path

import numpy as np

from fasthcs import diagnose, fasthcs
from fasthcs.simharness import two_group_dataset
from fasthcs.svgplot import diagnostic_plot


def main() -> None:
    ap = argparse.ArgumentParser(description="two-group diagnostic plot")
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--q", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    data = two_group_dataset(seed=a.seed)
    fit = fasthcs(data, a.q, seed=1)
    report = diagnose(data, fit.model)
    a.out.mkdir(parents=True, exist_ok=True)
    svg = diagnostic_plot(report.scaled_sd, report.scaled_od, data.labels, "two groups")
    (a.out / "diagnostic.svg").write_text(svg)
    minority = data.labels
    print(f"selected {'PP' if fit.selection.chose_pp else 'I-index'} fit, D={float(fit.selection.d_value):.3g}")
    print(f"minority rows above the OD cut-off: {np.sum(report.scaled_od[minority] > 1)}/{minority.sum()}")
    print(f"majority rows flagged: {np.sum(report.outliers[~minority])}/{(~minority).sum()}")


if __name__ == "__main__":
    main()
