"""Minimal native SVG line plots.

Writes fixed-size polyline charts with axes, ticks, an optional dashed guide
line, and a legend.  Output is a pure function of the inputs: no timestamps,
no environment lookups, coordinates rounded to a fixed number of digits.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

_PALETTE = ("#1f6fb2", "#c85a19", "#3a8f4d", "#8a4fb0", "#a02c3a")
_WIDTH = 640
_HEIGHT = 440
_MARGIN_L = 72
_MARGIN_R = 24
_MARGIN_T = 40
_MARGIN_B = 56


@dataclass(frozen=True)
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError(f"series {self.label!r}: x and y lengths differ")
        keep = np.isfinite(x) & np.isfinite(y)
        object.__setattr__(self, "x", x[keep])
        object.__setattr__(self, "y", y[keep])


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, count)


def _fmt(v: float) -> str:
    return format(v, ".2f")


def _label(v: float) -> str:
    return format(v, ".4g")


def line_plot(path, series, title: str = "", xlabel: str = "", ylabel: str = "") -> None:
    """Render the series to an SVG file at ``path``."""
    series = [s for s in series if len(s.x) > 0]
    if not series:
        raise ValueError("nothing to plot")
    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y for s in series])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    inner_w = _WIDTH - _MARGIN_L - _MARGIN_R
    inner_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x):
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * inner_w

    def py(y):
        return _MARGIN_T + (y_hi - y) / (y_hi - y_lo) * inner_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{inner_w}" height="{inner_h}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    if title:
        out.append(f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="15">{title}</text>')
    for tx in _ticks(x_lo, x_hi):
        x = px(tx)
        out.append(f'<line x1="{_fmt(x)}" y1="{_MARGIN_T + inner_h}" x2="{_fmt(x)}" '
                   f'y2="{_MARGIN_T + inner_h + 5}" stroke="#444444"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_MARGIN_T + inner_h + 20}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{_label(tx)}</text>')
    for ty in _ticks(y_lo, y_hi):
        y = py(ty)
        out.append(f'<line x1="{_MARGIN_L - 5}" y1="{_fmt(y)}" x2="{_MARGIN_L}" '
                   f'y2="{_fmt(y)}" stroke="#444444"/>')
        out.append(f'<text x="{_MARGIN_L - 9}" y="{_fmt(y + 4)}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{_label(ty)}</text>')
    if xlabel:
        out.append(f'<text x="{_MARGIN_L + inner_w // 2}" y="{_HEIGHT - 14}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="13">{xlabel}</text>')
    if ylabel:
        cy = _MARGIN_T + inner_h // 2
        out.append(f'<text x="18" y="{cy}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="13" '
                   f'transform="rotate(-90 18 {cy})">{ylabel}</text>')

    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(s.x, s.y))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"{dash}/>')
        ly = _MARGIN_T + 16 + 16 * i
        lx = _MARGIN_L + inner_w - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
                   f'font-size="12">{s.label}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
