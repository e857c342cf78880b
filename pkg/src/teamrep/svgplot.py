"""Minimal deterministic SVG line/phase plots.

Hand-rolled on purpose: the output is plain text with fixed float formatting,
so identical inputs produce byte-identical, diffable images with no plotting
dependency.
"""

from __future__ import annotations

import numpy as np

WIDTH = 640
HEIGHT = 480
MARGIN_LEFT = 62
MARGIN_RIGHT = 18
MARGIN_TOP = 34
MARGIN_BOTTOM = 46

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(value: float) -> str:
    return format(float(value), ".6g")


def _axis_range(values: np.ndarray) -> tuple[float, float]:
    lo = float(np.min(values))
    hi = float(np.max(values))
    if hi - lo < 1e-12 * max(1.0, abs(lo)):
        pad = max(0.5, abs(lo) * 0.1)
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


class _Frame:
    def __init__(self, xs: np.ndarray, ys: np.ndarray):
        self.x_lo, self.x_hi = _axis_range(xs)
        self.y_lo, self.y_hi = _axis_range(ys)

    def px(self, x: float) -> float:
        span = self.x_hi - self.x_lo
        frac = (x - self.x_lo) / span
        return MARGIN_LEFT + frac * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)

    def py(self, y: float) -> float:
        span = self.y_hi - self.y_lo
        frac = (y - self.y_lo) / span
        return HEIGHT - MARGIN_BOTTOM - frac * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)


def line_plot_svg(series, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """Render labelled (xs, ys) series as one SVG document string.

    ``series`` is a sequence of (label, xs, ys).  Single-point series are
    drawn as a marker so degenerate (constant) data still renders.
    """
    all_x = np.concatenate([np.asarray(xs, float) for _, xs, _ in series])
    all_y = np.concatenate([np.asarray(ys, float) for _, _, ys in series])
    frame = _Frame(all_x, all_y)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    # axes box and ticks
    x0, x1 = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    y0, y1 = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    parts.append(
        f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" '
        'fill="none" stroke="#333333" stroke-width="1"/>'
    )
    for tick in np.linspace(frame.x_lo, frame.x_hi, 6):
        px = frame.px(tick)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{y1}" x2="{_fmt(px)}" y2="{y1 + 5}" '
            'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{y1 + 18}" font-size="11" text-anchor="middle" '
            f'font-family="monospace">{_fmt(tick)}</text>'
        )
        if tick != frame.x_lo:
            parts.append(
                f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y1}" '
                'stroke="#dddddd" stroke-width="0.5"/>'
            )
    for tick in np.linspace(frame.y_lo, frame.y_hi, 6):
        py = frame.py(tick)
        parts.append(
            f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" '
            'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" font-size="11" text-anchor="end" '
            f'font-family="monospace">{_fmt(tick)}</text>'
        )
        if tick != frame.y_lo:
            parts.append(
                f'<line x1="{x0}" y1="{_fmt(py)}" x2="{x1}" y2="{_fmt(py)}" '
                'stroke="#dddddd" stroke-width="0.5"/>'
            )
    if title:
        parts.append(
            f'<text x="{WIDTH // 2}" y="22" font-size="14" text-anchor="middle" '
            f'font-family="monospace">{title}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{WIDTH // 2}" y="{HEIGHT - 10}" font-size="12" '
            f'text-anchor="middle" font-family="monospace">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{HEIGHT // 2}" font-size="12" text-anchor="middle" '
            f'font-family="monospace" transform="rotate(-90 16 {HEIGHT // 2})">{ylabel}</text>'
        )
    for index, (label, xs, ys) in enumerate(series):
        xs = np.asarray(xs, float)
        ys = np.asarray(ys, float)
        color = PALETTE[index % len(PALETTE)]
        if xs.size == 1:
            parts.append(
                f'<circle cx="{_fmt(frame.px(xs[0]))}" cy="{_fmt(frame.py(ys[0]))}" '
                f'r="3" fill="{color}"/>'
            )
        else:
            points = " ".join(
                f"{_fmt(frame.px(x))},{_fmt(frame.py(y))}" for x, y in zip(xs, ys)
            )
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
                f'points="{points}"/>'
            )
        ly = MARGIN_TOP + 16 + 16 * index
        parts.append(
            f'<line x1="{x1 - 120}" y1="{ly - 4}" x2="{x1 - 96}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{x1 - 90}" y="{ly}" font-size="11" font-family="monospace">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
