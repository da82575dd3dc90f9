"""Minimal SVG 1.1 line plots (polylines, optional log axes)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=78, right=20, top=36, bottom=56)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _transform(values, log: bool):
    out = []
    for v in values:
        if log:
            out.append(math.log10(v) if v > 0 and math.isfinite(v) else None)
        else:
            out.append(v if math.isfinite(v) else None)
    return out


def _ticks(lo: float, hi: float, log: bool) -> list[tuple[float, str]]:
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 6)
        return [(float(e), f"1e{e}") for e in range(a, b + 1, step) if lo - 1e-9 <= e <= hi + 1e-9]
    span = hi - lo
    raw = span / 5 if span > 0 else 1.0
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * max(1.0, abs(hi)):
        ticks.append((v, _fmt(v)))
        v += step
    return ticks


def line_plot(
    series: Sequence[Series],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = False,
) -> str:
    """Render the series as an SVG document (deterministic text output)."""
    pts = [(_transform(s.x, logx), _transform(s.y, logy)) for s in series]
    xs = [v for xx, yy in pts for v, w in zip(xx, yy) if v is not None and w is not None]
    ys = [w for xx, yy in pts for v, w in zip(xx, yy) if v is not None and w is not None]
    if not xs:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(v):
        return L + (v - x0) / (x1 - x0) * (R - L)

    def py(v):
        return B - (v - y0) / (y1 - y0) * (B - T)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>',
    ]
    for v, lab in _ticks(x0, x1, logx):
        out.append(f'<line x1="{px(v):.2f}" y1="{B}" x2="{px(v):.2f}" y2="{B + 5}" stroke="black"/>')
        out.append(f'<text x="{px(v):.2f}" y="{B + 18}" text-anchor="middle">{escape(lab)}</text>')
    for v, lab in _ticks(y0, y1, logy):
        out.append(f'<line x1="{L - 5}" y1="{py(v):.2f}" x2="{L}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{L - 8}" y="{py(v) + 4:.2f}" text-anchor="end">{escape(lab)}</text>')
    for i, ((xx, yy), s) in enumerate(zip(pts, series)):
        color = COLORS[i % len(COLORS)]
        coords = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xx, yy) if a is not None and b is not None)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{coords}"/>')
        ly = T + 16 + 16 * i
        out.append(f'<line x1="{R - 150}" y1="{ly - 4}" x2="{R - 130}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{R - 124}" y="{ly}">{escape(s.label)}</text>')
    out.append(f'<text x="{(L + R) / 2:.1f}" y="{T - 12}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{(L + R) / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{(T + B) / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {(T + B) / 2:.1f})">'
        f"{escape(ylabel)}</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
