"""Minimal deterministic SVG line charts (no charting dependency).

Output is a pure function of the input series: fixed palette, fixed layout,
fixed number formatting. Identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2")

_W, _H = 760, 480
_ML, _MR, _MT, _MB = 80, 24, 44, 56  # margins: left, right, top, bottom


def _nice_step(span: float) -> float:
    """Round span/5 to 1, 2, or 5 times a power of ten."""
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _linear_ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v: float) -> str:
    return format(v, ".6g")


def line_chart(
    series: list[tuple[str, np.ndarray, np.ndarray]],
    title: str,
    xlabel: str,
    ylabel: str,
    ylog: bool = False,
) -> str:
    """Render labeled (x, y) series as an SVG string.

    NaN points are dropped; in log mode nonpositive y values are dropped too.
    Raises ValueError when no series or when a series has no plottable points.
    """
    if not series:
        raise ValueError("no series to plot")
    cleaned = []
    for label, x, y in series:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        keep = np.isfinite(x) & np.isfinite(y)
        if ylog:
            keep &= y > 0.0
        if not np.any(keep):
            raise ValueError(f"series {label!r} has no plottable points")
        cleaned.append((label, x[keep], y[keep]))

    xmin = min(float(x.min()) for _, x, _ in cleaned)
    xmax = max(float(x.max()) for _, x, _ in cleaned)
    ymin = min(float(y.min()) for _, _, y in cleaned)
    ymax = max(float(y.max()) for _, _, y in cleaned)
    if xmax == xmin:
        xmax = xmin + 1.0
    if ylog:
        lo_exp = math.floor(math.log10(ymin))
        hi_exp = math.ceil(math.log10(ymax))
        if hi_exp == lo_exp:
            hi_exp += 1
        y_ticks = [10.0**e for e in range(lo_exp, hi_exp + 1)]
        ymin, ymax = 10.0**lo_exp, 10.0**hi_exp
    else:
        if ymax == ymin:
            ymax = ymin + 1.0
        pad = 0.05 * (ymax - ymin)
        ymin, ymax = ymin - pad, ymax + pad
        y_ticks = _linear_ticks(ymin, ymax)
    x_ticks = _linear_ticks(xmin, xmax)

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def sx(v: float) -> float:
        return _ML + plot_w * (v - xmin) / (xmax - xmin)

    def sy(v: float) -> float:
        if ylog:
            frac = (math.log10(v) - math.log10(ymin)) / (math.log10(ymax) - math.log10(ymin))
        else:
            frac = (v - ymin) / (ymax - ymin)
        return _MT + plot_h * (1.0 - frac)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="15">{title}</text>',
    ]
    # axes box and grid
    out.append(
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" fill="none" '
        f'stroke="black" stroke-width="1"/>'
    )
    for v in x_ticks:
        if v < xmin - 1e-12 or v > xmax + 1e-12:
            continue
        px = sx(v)
        out.append(
            f'<line x1="{px:.2f}" y1="{_MT}" x2="{px:.2f}" y2="{_MT + plot_h}" '
            f'stroke="#dddddd" stroke-width="0.5"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{_MT + plot_h + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(v)}</text>'
        )
    for v in y_ticks:
        py = sy(v)
        out.append(
            f'<line x1="{_ML}" y1="{py:.2f}" x2="{_ML + plot_w}" y2="{py:.2f}" '
            f'stroke="#dddddd" stroke-width="0.5"/>'
        )
        label = f"1e{int(round(math.log10(v)))}" if ylog else _fmt(v)
        out.append(
            f'<text x="{_ML - 6}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{label}</text>'
        )
    out.append(
        f'<text x="{_ML + plot_w / 2:.1f}" y="{_H - 14}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    out.append(
        f'<text x="20" y="{_MT + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 20 {_MT + plot_h / 2:.1f})">{ylabel}</text>'
    )
    # series
    for k, (label, x, y) in enumerate(cleaned):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{sx(float(xi)):.2f},{sy(float(yi)):.2f}" for xi, yi in zip(x, y))
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    # legend, top-right inside the plot box
    for k, (label, _, _) in enumerate(cleaned):
        color = PALETTE[k % len(PALETTE)]
        ly = _MT + 16 + 16 * k
        lx = _ML + plot_w - 170
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
            f'font-size="12">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
