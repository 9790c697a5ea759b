"""Minimal polyline SVG charts. Output is a pure function of the data, so
reruns produce byte-identical files."""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    dashed: bool = False


@dataclass
class Panel:
    series: list[Series]
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    hlines: list[float] = field(default_factory=list)
    logx: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick(v: float) -> str:
    return f"{v:.4g}"


def _limits(panel: Panel):
    xs = np.concatenate([np.asarray(s.x, float) for s in panel.series])
    ys = np.concatenate([np.asarray(s.y, float) for s in panel.series] + [np.asarray(panel.hlines, float)])
    if panel.logx:
        xs = np.log10(xs[xs > 0])
    xs, ys = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
    xlim = panel.xlim if panel.xlim is not None else (float(xs.min()), float(xs.max()))
    if panel.logx and panel.xlim is not None:
        xlim = (float(np.log10(xlim[0])), float(np.log10(xlim[1])))
    if panel.ylim is not None:
        ylim = panel.ylim
    else:
        lo, hi = float(ys.min()), float(ys.max())
        pad = 0.05 * (hi - lo) if hi > lo else 0.5
        ylim = (lo - pad, hi + pad)
    if xlim[1] == xlim[0]:
        xlim = (xlim[0] - 0.5, xlim[1] + 0.5)
    return xlim, ylim


def _panel(panel: Panel, x0: float, y0: float, w: float, h: float) -> list[str]:
    ml, mr, mt, mb = 60.0, 10.0, 24.0, 36.0
    pw, ph = w - ml - mr, h - mt - mb
    (xa, xb), (ya, yb) = _limits(panel)

    def X(x):
        x = np.log10(x) if panel.logx else x
        return x0 + ml + (np.asarray(x, float) - xa) / (xb - xa) * pw

    def Y(y):
        return y0 + mt + (yb - np.asarray(y, float)) / (yb - ya) * ph

    out = [f'<rect x="{_fmt(x0 + ml)}" y="{_fmt(y0 + mt)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
           'fill="none" stroke="#000" stroke-width="1"/>']
    out.append(f'<clipPath id="c{int(x0)}_{int(y0)}"><rect x="{_fmt(x0 + ml)}" y="{_fmt(y0 + mt)}" '
               f'width="{_fmt(pw)}" height="{_fmt(ph)}"/></clipPath>')
    for j in range(5):
        tx = xa + j * (xb - xa) / 4
        px = x0 + ml + j * pw / 4
        label = _tick(10 ** tx) if panel.logx else _tick(tx)
        out.append(f'<text x="{_fmt(px)}" y="{_fmt(y0 + h - mb + 14)}" font-size="10" text-anchor="middle">{label}</text>')
        ty = ya + j * (yb - ya) / 4
        py = y0 + mt + ph - j * ph / 4
        out.append(f'<text x="{_fmt(x0 + ml - 4)}" y="{_fmt(py + 3)}" font-size="10" text-anchor="end">{_tick(ty)}</text>')
    if panel.title:
        out.append(f'<text x="{_fmt(x0 + ml + pw / 2)}" y="{_fmt(y0 + 16)}" font-size="12" '
                   f'text-anchor="middle">{escape(panel.title)}</text>')
    if panel.xlabel:
        out.append(f'<text x="{_fmt(x0 + ml + pw / 2)}" y="{_fmt(y0 + h - 4)}" font-size="11" '
                   f'text-anchor="middle">{escape(panel.xlabel)}</text>')
    if panel.ylabel:
        cx, cy = x0 + 12, y0 + mt + ph / 2
        out.append(f'<text x="{_fmt(cx)}" y="{_fmt(cy)}" font-size="11" text-anchor="middle" '
                   f'transform="rotate(-90 {_fmt(cx)} {_fmt(cy)})">{escape(panel.ylabel)}</text>')
    clip = f'clip-path="url(#c{int(x0)}_{int(y0)})"'
    for v in panel.hlines:
        out.append(f'<line x1="{_fmt(x0 + ml)}" x2="{_fmt(x0 + ml + pw)}" y1="{_fmt(float(Y(v)))}" '
                   f'y2="{_fmt(float(Y(v)))}" stroke="#888" stroke-dasharray="2,2" {clip}/>')
    for i, s in enumerate(panel.series):
        px, py = X(s.x), Y(s.y)
        ok = np.isfinite(px) & np.isfinite(py)
        pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px[ok], py[ok]))
        dash = ' stroke-dasharray="5,3"' if s.dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{COLORS[i % len(COLORS)]}" '
                   f'stroke-width="1.5"{dash} {clip}/>')
        if s.label:
            ly = y0 + mt + 14 + 13 * i
            out.append(f'<text x="{_fmt(x0 + ml + pw - 6)}" y="{_fmt(ly)}" font-size="10" text-anchor="end" '
                       f'fill="{COLORS[i % len(COLORS)]}">{escape(s.label)}</text>')
    return out


def render(rows: list[list[Panel]], width: float = 720.0, row_height: float = 300.0) -> str:
    """Grid of panels; each inner list is one row, split evenly across the width."""
    height = row_height * len(rows)
    body = []
    for r, row in enumerate(rows):
        w = width / len(row)
        for c, panel in enumerate(row):
            body += _panel(panel, c * w, r * row_height, w, row_height)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
            f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="#fff"/>'] + body + ["</svg>"]) + "\n"
