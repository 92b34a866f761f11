"""Standalone SVG regret plots, written without a plotting library.

The plot group carries its axis mapping as data attributes
(``data-x0``, ``data-y0``, ``data-width``, ``data-height``, ``data-xmin``,
``data-xmax``, ``data-ymin``, ``data-ymax``) so the emitted coordinates can be
checked against the report. Both axes are linear.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .analysis import ExperimentReport

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")

WIDTH, HEIGHT = 720, 460
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 190, 40, 60


def _f(v: float) -> str:
    return f"{v:.3f}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + step * 1e-9, step)]


def render_svg(report: ExperimentReport, title: str = "", show_bounds: bool = False) -> str:
    """SVG text with one polyline per scenario and CI whiskers at every checkpoint.

    With ``show_bounds`` the first-theorem bound of each scenario is drawn as a
    dashed ``<path>`` (never a polyline, so polylines count scenarios).
    """
    if not report.scenarios or report.checkpoints.size == 0:
        raise ValueError("cannot plot an empty report")
    x = report.checkpoints.astype(float)
    mean, half = report.mean_regret, report.ci_halfwidth
    xmin, xmax = 0.0, float(x.max())
    ymin = min(0.0, float(np.nanmin(mean - half)))
    ymax = float(np.nanmax(mean + half))
    if show_bounds:
        ymax = max(ymax, float(np.nanmax(report.bound_t1)))
    if ymax <= ymin:
        ymax = ymin + 1.0
    x0, y0 = MARGIN_LEFT, MARGIN_TOP
    w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(v):
        return x0 + (v - xmin) / (xmax - xmin) * w

    def py(v):
        return y0 + (ymax - v) / (ymax - ymin) * h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>')
    out.append(
        f'<g id="plot" data-x0="{x0}" data-y0="{y0}" data-width="{w}" data-height="{h}" '
        f'data-xmin="{xmin!r}" data-xmax="{xmax!r}" data-ymin="{ymin!r}" data-ymax="{ymax!r}">'
    )
    out.append(f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="black"/>')
    for tv in _nice_ticks(ymin, ymax):
        out.append(f'<line class="tick" x1="{x0 - 5}" y1="{_f(py(tv))}" x2="{x0}" y2="{_f(py(tv))}" stroke="black"/>')
        out.append(
            f'<text x="{x0 - 8}" y="{_f(py(tv) + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">{tv:g}</text>'
        )
    for tv in _nice_ticks(xmin, xmax):
        out.append(f'<line class="tick" x1="{_f(px(tv))}" y1="{y0 + h}" x2="{_f(px(tv))}" y2="{y0 + h + 5}" stroke="black"/>')
        out.append(
            f'<text x="{_f(px(tv))}" y="{y0 + h + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{tv:g}</text>'
        )
    for k, name in enumerate(report.scenarios):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(x, mean[k]))
        out.append(f'<polyline class="regret" data-scenario={quoteattr(name)} points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for c, (a, b) in enumerate(zip(x, mean[k])):
            hw = half[k, c]
            out.append(
                f'<line class="ci" data-scenario={quoteattr(name)} data-checkpoint="{int(report.checkpoints[c])}" '
                f'x1="{_f(px(a))}" y1="{_f(py(b + hw))}" x2="{_f(px(a))}" y2="{_f(py(b - hw))}" stroke="{color}"/>'
            )
        if show_bounds and np.all(np.isfinite(report.bound_t1[k])):
            d = " ".join(
                ("M" if c == 0 else "L") + f"{_f(px(a))},{_f(py(b))}" for c, (a, b) in enumerate(zip(x, report.bound_t1[k]))
            )
            out.append(f'<path class="bound" data-scenario={quoteattr(name)} d="{d}" fill="none" stroke="{color}" stroke-dasharray="4 3"/>')
    out.append("</g>")
    out.append(f'<text x="{x0 + w / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-family="sans-serif" font-size="13">round</text>')
    out.append(
        f'<text x="18" y="{y0 + h / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {y0 + h / 2})">cumulative regret</text>'
    )
    lx = x0 + w + 20
    for k, name in enumerate(report.scenarios):
        ly = y0 + 12 + 18 * k
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text class="legend-entry" x="{lx + 24}" y="{ly}" font-family="sans-serif" font-size="11">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(report: ExperimentReport, path: str | Path, **kwargs) -> None:
    Path(path).write_text(render_svg(report, **kwargs))
