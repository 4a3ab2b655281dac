"""Run a bias grid from a JSON config and print the median table.

    python3 scripts/run_bias_grid.py scripts/configs/point_mass_eps04.json --out results/pm
"""

import argparse
import csv
import sys
from pathlib import Path

from fasthcs.cli import main as cli_main


def print_table(results: Path) -> None:
    with results.open(newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["statistic"] == "bias_vq"]
    print(f"{'eps':>5} {'config':>10} {'nu':>4} {'method':>10} {'median':>8} {'q75':>8} {'ok':>4}")
    for r in rows:
        print(
            f"{float(r['epsilon']):5.2f} {r['config']:>10} {float(r['nu']):4g} {r['method']:>10} "
            f"{float(r['median']):8.3f} {float(r['q75']):8.3f} {r['n_ok']:>4}"
        )


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", type=Path)
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)
    cmd = ["simulate", "--config", str(args.config), "--out", str(args.out)]
    if args.workers is not None:
        cmd += ["--workers", str(args.workers)]
    rc = cli_main(cmd)
    if rc == 0:
        print_table(args.out / "results.csv")
    return rc


if __name__ == "__main__":
    sys.exit(main())
