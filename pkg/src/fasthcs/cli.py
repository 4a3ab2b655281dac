"""Command-line front end: ``fasthcs fit | diagnose | simulate | generate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io, svgplot
from .diagnostics import diagnose
from .errors import ConfigurationError, DegenerateModelError, FastHCSError, InputError
from .estimator import clean_count_from_fraction, fasthcs
from .iindex import subset_size_h
from .simharness import (
    STATISTICS,
    ContaminationSpec,
    ExperimentConfig,
    generate,
    run_experiment,
)

EXIT_OK, EXIT_OUTLIERS, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3

logger = logging.getLogger("fasthcs")


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _write_outputs(out: Path, files: dict[str, str], manifest: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        io.atomic_write(out / name, text)
    manifest["outputs"] = {name: io.sha256(out / name) for name in sorted(files)}
    io.atomic_write(out / "manifest.json", io.dumps(manifest))


def cmd_fit(args) -> int:
    Y, _ = io.read_matrix(args.input, header=args.header)
    n, p = Y.shape
    q = args.q
    if q < 2:
        raise InputError(f"--q must be >= 2, got {q}")
    if n <= q + 1:
        raise InputError(f"{args.input}: n={n} rows is too few for q={q} (need n > q + 1)")
    if q >= n / 5:
        _warn(f"q={q} >= n/5={n / 5:g}; a smaller q is advised")
    h = subset_size_h(n, q)
    e = clean_count_from_fraction(n, q, args.clean_fraction) if args.clean_fraction else h
    fit = fasthcs(
        Y, q, seed=args.seed, e=e, K=args.K, W=args.W,
        n_directions=args.n_directions, threads=args.threads,
    )
    sel = fit.selection
    model_json = io.model_to_dict(
        fit.model,
        n=n,
        h=h,
        e=e,
        e_over_n=e / n,
        seed=args.seed,
        selection={
            "d_value": io.d_value_json(sel.d_value),
            "chose_pp": sel.chose_pp,
            "i_value": sel.i_value,
        },
        exact_fit=None if sel.exact_fit is None else sel.exact_fit.tolist(),
    )
    subset_csv = "index\n" + "".join(f"{i}\n" for i in fit.subset)
    manifest = _manifest(args, "fit", e_over_n=e / n, inputs=[args.input])
    _write_outputs(args.out, {"model.json": io.dumps(model_json), "subset.csv": subset_csv}, manifest)
    print(
        f"fit: n={n} p={p} q={q} h={h} method={fit.model.method.value} "
        f"D={io.d_value_json(sel.d_value)} -> {args.out / 'model.json'}"
    )
    return EXIT_OK


def cmd_diagnose(args) -> int:
    Y, _ = io.read_matrix(args.input, header=args.header)
    model, raw = io.load_model(args.model)
    if Y.shape[1] != model.center.shape[0]:
        raise InputError(
            f"{args.input} has {Y.shape[1]} columns but the model has {model.center.shape[0]} variables"
        )
    if model.subset.size and model.subset.max() >= Y.shape[0]:
        raise InputError("model subset indexes rows beyond the input data")
    e_over_n = args.e_over_n or raw.get("e_over_n") or model.h / Y.shape[0]
    report = diagnose(Y, model, e_over_n, threads=args.threads)
    labels = None
    if args.labels:
        lab, _ = io.read_matrix(args.labels, header=True)
        labels = lab[:, 0].astype(bool)
    files = {
        "report.csv": io.report_to_csv(report),
        "diagnostic.svg": svgplot.diagnostic_plot(report.scaled_sd, report.scaled_od, labels),
    }
    manifest = _manifest(args, "diagnose", e_over_n=e_over_n, inputs=[args.input, args.model])
    manifest["od_cutoff"], manifest["sd_cutoff"] = report.od_cutoff, report.sd_cutoff
    _write_outputs(args.out, files, manifest)
    n_out = int(report.outliers.sum())
    print(f"diagnose: {n_out} of {report.n} observations flagged -> {args.out / 'report.csv'}")
    return EXIT_OUTLIERS if args.fail_on_outliers and n_out else EXIT_OK


def cmd_simulate(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if args.workers is not None:
            raw["workers"] = args.workers
        cfg = ExperimentConfig.from_dict(raw)
    except (OSError, ValueError, TypeError, FastHCSError) as exc:
        raise InputError(f"{args.config}: invalid experiment config: {exc}") from None

    def progress(done, total):
        print(f"simulate: cell {done}/{total} done", file=sys.stderr, flush=True)

    result = run_experiment(cfg, progress)
    files = {"results.csv": _summary_csv(result.summary), "replicates.csv": _records_csv(result.records)}
    files.update(_panels(result.summary))
    manifest = _manifest(args, "simulate", inputs=[args.config])
    manifest["config"] = {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()}
    _write_outputs(args.out, files, manifest)
    failed = sum(r.failed for r in result.records)
    print(f"simulate: {len(result.records)} fits, {failed} failed -> {args.out / 'results.csv'}")
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        spec = ContaminationSpec(args.n, args.p, args.q, args.epsilon, args.nu, args.config, args.seed)
        data, truth = generate(spec)
    except FastHCSError as exc:
        raise InputError(str(exc)) from None
    files = {
        "data.csv": io.matrix_to_csv(data.values),
        "labels.csv": "outlier\n" + "".join(f"{int(v)}\n" for v in truth.labels),
    }
    _write_outputs(args.out, files, _manifest(args, "generate"))
    print(f"generate: {spec.n_outliers} outliers of {spec.n} rows -> {args.out / 'data.csv'}")
    return EXIT_OK


def _manifest(args, command: str, e_over_n=None, inputs=()) -> dict:
    m = {"command": command}
    for key in ("q", "seed", "K", "W", "n_directions", "threads", "clean_fraction"):
        if hasattr(args, key):
            m[key] = getattr(args, key)
    if e_over_n is not None:
        m["e_over_n"] = e_over_n
    m["inputs"] = {str(p): io.sha256(p) for p in inputs}
    m["out"] = str(args.out)
    return m


def _summary_csv(rows) -> str:
    header = "n,p,q,epsilon,nu,config,method,statistic,median,q75,n_ok,n_failed\n"
    lines = [
        f"{r.n},{r.p},{r.q},{io.fmt(r.epsilon)},{io.fmt(r.nu)},{r.config},{r.method},"
        f"{r.statistic},{io.fmt(r.median)},{io.fmt(r.q75)},{r.n_ok},{r.n_failed}\n"
        for r in rows
    ]
    return header + "".join(lines)


def _records_csv(records) -> str:
    header = "n,p,q,epsilon,nu,config,seed,replicate,method,bias_vq,maxsub,sumsub,failed\n"
    lines = [
        f"{r.spec.n},{r.spec.p},{r.spec.q},{io.fmt(r.spec.epsilon)},{io.fmt(r.spec.nu)},"
        f"{r.spec.config.value},{r.spec.seed},{r.replicate},{r.method},{io.fmt(r.bias_vq)},"
        f"{io.fmt(r.maxsub)},{io.fmt(r.sumsub)},{int(r.failed)}\n"
        for r in records
    ]
    return header + "".join(lines)


def _panels(rows) -> dict[str, str]:
    panels: dict[tuple, dict] = {}
    for r in rows:
        if r.statistic != STATISTICS[0]:
            continue
        curves = panels.setdefault((r.p, r.q, r.epsilon, r.config), {})
        nu, med, q75 = curves.setdefault(r.method, ([], [], []))
        nu.append(r.nu)
        med.append(r.median)
        q75.append(r.q75)
    out = {}
    for (p, q, eps, config), curves in panels.items():
        title = f"p={p}, q={q}, eps={eps:g}, {config}"
        out[f"bias_p{p}_q{q}_eps{eps:g}_{config}.svg"] = svgplot.bias_panel(curves, title)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fasthcs", description="FastHCS robust PCA")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a robust PCA model to a CSV matrix")
    f.add_argument("--input", type=Path, required=True)
    f.add_argument("--q", type=int, required=True)
    f.add_argument("--seed", type=int, default=1)
    f.add_argument("--clean-fraction", type=float, default=None,
                   help="presumed fraction of clean rows; fewer starting subsets")
    f.add_argument("--K", type=int, default=25)
    f.add_argument("--W", type=int, default=5)
    f.add_argument("--n-directions", type=int, default=1000)
    f.add_argument("--threads", type=int, default=1)
    f.add_argument("--header", action="store_true", help="first CSV row is a header")
    f.add_argument("--out", type=Path, required=True)
    f.set_defaults(func=cmd_fit)

    d = sub.add_parser("diagnose", help="distances, cut-offs and flags for a fitted model")
    d.add_argument("--input", type=Path, required=True)
    d.add_argument("--model", type=Path, required=True)
    d.add_argument("--labels", type=Path, default=None, help="optional 0/1 column with a header row, for plot colors")
    d.add_argument("--e-over-n", type=float, default=None)
    d.add_argument("--threads", type=int, default=1)
    d.add_argument("--header", action="store_true")
    d.add_argument("--fail-on-outliers", action="store_true")
    d.add_argument("--out", type=Path, required=True)
    d.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("simulate", help="run a contamination bias study")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out", type=Path, required=True)
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("generate", help="write one contaminated data set and its labels")
    g.add_argument("--n", type=int, default=200)
    g.add_argument("--p", type=int, default=100)
    g.add_argument("--q", type=int, default=5)
    g.add_argument("--epsilon", type=float, default=0.2)
    g.add_argument("--nu", type=float, default=6.0)
    g.add_argument("--config", choices=["shift", "point_mass"], default="shift")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", type=Path, required=True)
    g.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DegenerateModelError, FastHCSError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
