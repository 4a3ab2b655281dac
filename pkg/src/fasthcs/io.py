"""CSV matrices, model JSON and report CSV, written atomically."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticReport, Flag
from .errors import InputError
from .reduce import Method, PcaModel
from .select import Sentinel


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")


def read_matrix(path: Path, header: bool = False) -> tuple[np.ndarray, list[str] | None]:
    """Parse a comma-separated numeric matrix; raises InputError naming row/column."""
    with open(path, encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    names = None
    first = 1
    if header:
        if not rows:
            raise InputError(f"{path}: empty file")
        names, rows, first = rows[0], rows[1:], 2
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InputError(
                f"{path}: row {i + first} has {len(row)} fields, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise InputError(
                    f"{path}: row {i + first}, column {j + 1}: non-numeric value {cell!r}"
                ) from None
            if not math.isfinite(out[i, j]):
                raise InputError(f"{path}: row {i + first}, column {j + 1}: non-finite value")
    return out, names


def matrix_to_csv(values: np.ndarray, names: list[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if names is not None:
        w.writerow(names)
    for row in np.atleast_2d(values):
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def d_value_json(d):
    return d.value if isinstance(d, Sentinel) else d


def model_to_dict(model: PcaModel, **extra) -> dict:
    p, q = model.loadings.shape
    out = {
        "format": "fasthcs-model/1",
        "n_features": p,
        "n_components": q,
        "method": model.method.value,
        "center": model.center.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "loadings_layout": "column-major",
        "loadings": model.loadings.T.tolist(),
        "subset": model.subset.tolist(),
        "index_base": 0,
    }
    for k, v in extra.items():
        out[k] = d_value_json(v)
    return out


def model_from_dict(d: dict) -> PcaModel:
    try:
        p, q = int(d["n_features"]), int(d["n_components"])
        center = np.asarray(d["center"], dtype=float)
        eig = np.asarray(d["eigenvalues"], dtype=float)
        loadings = np.asarray(d["loadings"], dtype=float).T
        subset = np.asarray(d["subset"], dtype=np.intp)
        method = Method(d["method"])
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed model file: {exc}") from None
    if center.shape != (p,) or eig.shape != (q,) or loadings.shape != (p, q):
        raise InputError("model file shapes do not match n_features/n_components")
    return PcaModel(center, eig, loadings, subset, method)


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def load_model(path: Path) -> tuple[PcaModel, dict]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    return model_from_dict(raw), raw


REPORT_COLUMNS = ("index", "od", "sd", "scaled_od", "scaled_sd", "flag")


def report_to_csv(report: DiagnosticReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for i in range(report.n):
        w.writerow(
            [
                i,
                fmt(report.od[i]),
                fmt(report.sd[i]),
                fmt(report.scaled_od[i]),
                fmt(report.scaled_sd[i]),
                report.flags[i].value,
            ]
        )
    return buf.getvalue()


def report_from_csv(text: str) -> dict:
    rows = list(csv.DictReader(io.StringIO(text)))
    return {
        "index": np.array([int(r["index"]) for r in rows]),
        **{c: np.array([float(r[c]) for r in rows]) for c in REPORT_COLUMNS[1:5]},
        "flag": [Flag(r["flag"]) for r in rows],
    }
