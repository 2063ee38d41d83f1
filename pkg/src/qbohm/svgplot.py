"""Minimal hand-written SVG line plots (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Dict, List, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

Series = Tuple[str, Sequence[float], Sequence[float]]


def _nice_ticks(lo: float, hi: float, target: int = 5) -> List[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    s = f"{v:.3g}"
    return "0" if s in ("-0", "0.0") else s


def panel(series: Sequence[Series], title: str, xlabel: str, ylabel: str,
          origin: Tuple[float, float], size: Tuple[float, float] = (300.0, 240.0),
          hline: float = None) -> List[str]:
    """SVG elements for one set of axes with its lines and legend."""
    ox, oy = origin
    w, h = size
    left, right, top, bottom = 52.0, 10.0, 26.0, 40.0
    pw, ph = w - left - right, h - top - bottom
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    ys = ys[np.isfinite(ys)]
    xlo, xhi = float(xs.min()), float(xs.max())
    ylo, yhi = float(ys.min()), float(ys.max())
    if hline is not None:
        ylo, yhi = min(ylo, hline), max(yhi, hline)
    pad = 0.05 * (yhi - ylo or 1.0)
    ylo, yhi = ylo - pad, yhi + pad

    def px(x):
        return ox + left + (x - xlo) / (xhi - xlo or 1.0) * pw

    def py(y):
        return oy + top + (yhi - y) / (yhi - ylo) * ph

    out = ['<g font-family="sans-serif" font-size="10">',
           f'<text x="{_fmt(ox + left + pw / 2)}" y="{_fmt(oy + 14)}" text-anchor="middle" '
           f'font-size="11">{escape(title)}</text>',
           f'<rect x="{_fmt(ox + left)}" y="{_fmt(oy + top)}" width="{_fmt(pw)}" height="{_fmt(ph)}" '
           f'fill="none" stroke="#000"/>']
    for t in _nice_ticks(xlo, xhi):
        out.append(f'<line x1="{_fmt(px(t))}" y1="{_fmt(oy + top + ph)}" x2="{_fmt(px(t))}" '
                   f'y2="{_fmt(oy + top + ph + 4)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(px(t))}" y="{_fmt(oy + top + ph + 15)}" '
                   f'text-anchor="middle">{_tick_label(t)}</text>')
    for t in _nice_ticks(ylo, yhi):
        out.append(f'<line x1="{_fmt(ox + left - 4)}" y1="{_fmt(py(t))}" x2="{_fmt(ox + left)}" '
                   f'y2="{_fmt(py(t))}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(ox + left - 6)}" y="{_fmt(py(t) + 3)}" '
                   f'text-anchor="end">{_tick_label(t)}</text>')
    out.append(f'<text x="{_fmt(ox + left + pw / 2)}" y="{_fmt(oy + h - 8)}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    cy = oy + top + ph / 2
    out.append(f'<text x="{_fmt(ox + 12)}" y="{_fmt(cy)}" text-anchor="middle" '
               f'transform="rotate(-90 {_fmt(ox + 12)} {_fmt(cy)})">{escape(ylabel)}</text>')
    if hline is not None:
        out.append(f'<line x1="{_fmt(ox + left)}" y1="{_fmt(py(hline))}" x2="{_fmt(ox + left + pw)}" '
                   f'y2="{_fmt(py(hline))}" stroke="#888" stroke-dasharray="4 3"/>')
    for i, (label, x, y) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y) if math.isfinite(b))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = oy + top + 12 + 13 * i
        lx = ox + left + pw - 60
        out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 3)}" x2="{_fmt(lx + 16)}" y2="{_fmt(ly - 3)}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{_fmt(lx + 20)}" y="{_fmt(ly)}">{escape(label)}</text>')
    out.append("</g>")
    return out


def figure(panels: Sequence[Dict], panel_size: Tuple[float, float] = (300.0, 240.0)) -> str:
    """Panels laid out in one row; each dict holds the :func:`panel` keyword arguments."""
    w, h = panel_size
    body = []
    for i, p in enumerate(panels):
        body.extend(panel(origin=(i * w, 0.0), size=panel_size, **p))
    total = len(panels) * w
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(total)}" height="{_fmt(h)}" '
            f'viewBox="0 0 {_fmt(total)} {_fmt(h)}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="#fff"/>', *body, "</svg>"]) + "\n"
