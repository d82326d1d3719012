"""Minimal hand-written SVG line charts (no plotting dependency).

Each chart shows one or more estimate series with optional error bars,
plus at most one ground-truth polyline (class "truth", dashed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

__all__ = ["Series", "line_chart"]

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 24, 40, 56
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


@dataclass
class Series:
    label: str
    x: list[float]
    y: list[float]
    yerr: list[float] | None = None


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(1, n - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    start = math.floor(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 0.5 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return format(v, ".4g")


def line_chart(path, series: list[Series], truth: Series | None = None,
               title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Write an SVG chart of the given series; `truth` gets the dashed line."""
    xs = [v for s in ([*series, truth] if truth else series) for v in s.x]
    ys = []
    for s in ([*series, truth] if truth else series):
        for i, v in enumerate(s.y):
            e = s.yerr[i] if s.yerr else 0.0
            ys.extend([v - e, v + e])
    if not xs:
        raise ValueError("nothing to plot")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(v: float) -> float:
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v: float) -> float:
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" '
                     f'font-size="14">{escape(title)}</text>')
    # axes and ticks
    ax_y = MARGIN_T + ph
    parts.append(f'<line x1="{MARGIN_L}" y1="{ax_y}" x2="{MARGIN_L + pw}" y2="{ax_y}" '
                 'stroke="black"/>')
    parts.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{ax_y}" '
                 'stroke="black"/>')
    for tx in _nice_ticks(x_lo, x_hi):
        if x_lo <= tx <= x_hi:
            parts.append(f'<line x1="{px(tx):.1f}" y1="{ax_y}" x2="{px(tx):.1f}" '
                         f'y2="{ax_y + 5}" stroke="black"/>')
            parts.append(f'<text x="{px(tx):.1f}" y="{ax_y + 18}" '
                         f'text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _nice_ticks(y_lo, y_hi):
        if y_lo <= ty <= y_hi:
            parts.append(f'<line x1="{MARGIN_L - 5}" y1="{py(ty):.1f}" x2="{MARGIN_L}" '
                         f'y2="{py(ty):.1f}" stroke="black"/>')
            parts.append(f'<text x="{MARGIN_L - 8}" y="{py(ty) + 4:.1f}" '
                         f'text-anchor="end">{_fmt(ty)}</text>')
    if xlabel:
        parts.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 14}" '
                     f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        parts.append(f'<text x="18" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 18 {MARGIN_T + ph / 2:.1f})">'
                     f'{escape(ylabel)}</text>')

    legend_y = MARGIN_T + 6
    if truth is not None:
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(truth.x, truth.y))
        parts.append(f'<polyline class="truth" points="{pts}" fill="none" '
                     'stroke="black" stroke-width="1.5" stroke-dasharray="6 4"/>')
        parts.append(f'<line x1="{MARGIN_L + pw - 150}" y1="{legend_y}" '
                     f'x2="{MARGIN_L + pw - 126}" y2="{legend_y}" stroke="black" '
                     'stroke-dasharray="6 4"/>')
        parts.append(f'<text x="{MARGIN_L + pw - 120}" y="{legend_y + 4}">'
                     f'{escape(truth.label)}</text>')
        legend_y += 18
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        if s.yerr is not None:
            for a, b, e in zip(s.x, s.y, s.yerr):
                parts.append(f'<line x1="{px(a):.2f}" y1="{py(b - e):.2f}" '
                             f'x2="{px(a):.2f}" y2="{py(b + e):.2f}" '
                             f'stroke="{color}" stroke-width="1"/>')
                for yy in (b - e, b + e):
                    parts.append(f'<line x1="{px(a) - 3:.2f}" y1="{py(yy):.2f}" '
                                 f'x2="{px(a) + 3:.2f}" y2="{py(yy):.2f}" '
                                 f'stroke="{color}" stroke-width="1"/>')
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(s.x, s.y))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        for a, b in zip(s.x, s.y):
            parts.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2.5" '
                         f'fill="{color}"/>')
        parts.append(f'<line x1="{MARGIN_L + pw - 150}" y1="{legend_y}" '
                     f'x2="{MARGIN_L + pw - 126}" y2="{legend_y}" stroke="{color}" '
                     'stroke-width="1.5"/>')
        parts.append(f'<text x="{MARGIN_L + pw - 120}" y="{legend_y + 4}">'
                     f'{escape(s.label)}</text>')
        legend_y += 18
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
