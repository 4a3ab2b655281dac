"""Minimal SVG emitters for diagnostic plots and bias curves."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, PAD = 480, 400, 50
COLORS = {"fasthcs": "#1f4e9c", "classical": "#e08a2c"}


def _axis_max(values: np.ndarray, floor: float) -> float:
    finite = values[np.isfinite(values)]
    top = float(finite.max()) if finite.size else floor
    return max(top, floor) * 1.08


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD / 2}" y2="{HEIGHT - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{PAD}" y2="{PAD / 2}" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT / 2})">{escape(ylabel)}</text>',
    ]


class _Scale:
    def __init__(self, xmax: float, ymax: float, xmin: float = 0.0, ymin: float = 0.0):
        self.xmin, self.xmax, self.ymin, self.ymax = xmin, xmax, ymin, ymax

    def x(self, v: float) -> float:
        v = min(v, self.xmax)
        return PAD + (v - self.xmin) / (self.xmax - self.xmin) * (WIDTH - 1.5 * PAD)

    def y(self, v: float) -> float:
        v = min(v, self.ymax)
        return HEIGHT - PAD - (v - self.ymin) / (self.ymax - self.ymin) * (HEIGHT - 1.5 * PAD)


def _ticks(lo: float, hi: float, k: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / k for i in range(k + 1)]


def diagnostic_plot(scaled_sd, scaled_od, labels=None, title: str = "Diagnostic plot") -> str:
    """Scaled score distance (x) vs scaled orthogonal distance (y), unit cut-off lines.

    Infinite distances are drawn on the plot border.
    """
    sx, sy = np.asarray(scaled_sd, float), np.asarray(scaled_od, float)
    sc = _Scale(_axis_max(sx, 2.0), _axis_max(sy, 2.0))
    out = _frame(title, "score distance / cut-off", "orthogonal distance / cut-off")
    for t in _ticks(0, sc.xmax):
        out.append(f'<text x="{sc.x(t):.1f}" y="{HEIGHT - PAD + 14}" font-size="9" text-anchor="middle">{t:.2g}</text>')
    for t in _ticks(0, sc.ymax):
        out.append(f'<text x="{PAD - 4}" y="{sc.y(t):.1f}" font-size="9" text-anchor="end">{t:.2g}</text>')
    out.append(
        f'<line class="cutoff" x1="{sc.x(1):.2f}" y1="{sc.y(0):.2f}" x2="{sc.x(1):.2f}" '
        f'y2="{sc.y(sc.ymax):.2f}" stroke="gray" stroke-dasharray="4,3"/>'
    )
    out.append(
        f'<line class="cutoff" x1="{sc.x(0):.2f}" y1="{sc.y(1):.2f}" x2="{sc.x(sc.xmax):.2f}" '
        f'y2="{sc.y(1):.2f}" stroke="gray" stroke-dasharray="4,3"/>'
    )
    for i, (a, b) in enumerate(zip(sx, sy)):
        color = "#e08a2c" if labels is not None and labels[i] else "#1f4e9c"
        out.append(
            f'<circle class="mark" cx="{sc.x(a):.2f}" cy="{sc.y(b):.2f}" r="2.5" '
            f'fill="none" stroke="{color}"><title>{i}</title></circle>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bias_panel(curves: dict[str, tuple[Sequence[float], Sequence[float], Sequence[float]]], title: str) -> str:
    """Bias against nu; solid median and dotted 75th percentile per method.

    ``curves`` maps method -> (nu values, medians, 75th percentiles).
    """
    ys = [v for _, med, q75 in curves.values() for v in (*med, *q75)]
    xs = [v for nu, _, _ in curves.values() for v in nu]
    ymax = _axis_max(np.asarray(ys, float), 1.0)
    lo, hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if hi <= lo:
        lo, hi = lo - 1.0, hi + 1.0
    sc = _Scale(hi, ymax, lo)
    out = _frame(title, "nu", "bias(V_q)")
    for t in _ticks(0, ymax):
        out.append(f'<text x="{PAD - 4}" y="{sc.y(t):.1f}" font-size="9" text-anchor="end">{t:.2g}</text>')
    for t in sorted(set(xs)):
        out.append(f'<text x="{sc.x(t):.1f}" y="{HEIGHT - PAD + 14}" font-size="9" text-anchor="middle">{t:g}</text>')
    for k, (method, (nu, med, q75)) in enumerate(curves.items()):
        color = COLORS.get(method, "#444444")
        for vals, dash in ((med, ""), (q75, ' stroke-dasharray="2,3"')):
            pts = " ".join(
                f"{sc.x(a):.2f},{sc.y(b if math.isfinite(b) else ymax):.2f}" for a, b in zip(nu, vals)
            )
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(
            f'<text x="{WIDTH - PAD}" y="{PAD + 14 * k}" font-size="11" text-anchor="end" '
            f'fill="{color}">{escape(method)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
