"""Minimal deterministic SVG line/marker plots (no plotting dependency)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=78, right=160, top=40, bottom=56)


@dataclass
class Series:
    label: str
    x: list[float]
    y: list[float]
    dashed: bool = False
    markers: bool = True


@dataclass
class HLine:
    y: float
    label: str


@dataclass
class Plot:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    hlines: list[HLine] = field(default_factory=list)
    log_y: bool = False


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * abs(hi) + 1e-300:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def render(plot: Plot) -> str:
    xs = [v for s in plot.series for v in s.x]
    ys = [v for s in plot.series for v in s.y] + [h.y for h in plot.hlines]
    if plot.log_y:
        ys = [v for v in ys if v > 0]
    if not xs or not ys:
        xs, ys = xs or [0.0, 1.0], ys or [1.0, 10.0]
    x0, x1 = min(xs), max(xs)
    if x0 == x1:
        x0, x1 = x0 - 1, x1 + 1
    if plot.log_y:
        y0 = math.floor(math.log10(min(ys)))
        y1 = math.ceil(math.log10(max(ys)))
        if y0 == y1:
            y1 += 1
        ty = lambda v: math.log10(v)  # noqa: E731
        yticks = [10.0**e for e in range(int(y0), int(y1) + 1)]
    else:
        lo, hi = min(ys), max(ys)
        pad = 0.05 * (hi - lo or 1.0)
        y0, y1 = lo - pad, hi + pad
        ty = lambda v: v  # noqa: E731
        yticks = _nice_ticks(y0, y1)

    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - (ty(y) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">{escape(plot.title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for xt in _nice_ticks(x0, x1, min(10, max(2, int(x1 - x0)))):
        if x0 <= xt <= x1:
            out.append(f'<line x1="{px(xt):.2f}" y1="{top + ph}" x2="{px(xt):.2f}" y2="{top + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px(xt):.2f}" y="{top + ph + 19}" text-anchor="middle">{_fmt(xt)}</text>')
    for yt in yticks:
        if not (y0 <= ty(yt) <= y1):
            continue
        out.append(f'<line x1="{left - 5}" y1="{py(yt):.2f}" x2="{left}" y2="{py(yt):.2f}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{py(yt):.2f}" x2="{left + pw}" y2="{py(yt):.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{py(yt) + 4:.2f}" text-anchor="end">{_fmt(yt)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle">{escape(plot.xlabel)}</text>')
    out.append(
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(plot.ylabel)}</text>'
    )

    legend_y = top + 10
    for h in plot.hlines:
        if plot.log_y and h.y <= 0:
            continue
        out.append(f'<line x1="{left}" y1="{py(h.y):.2f}" x2="{left + pw}" y2="{py(h.y):.2f}" '
                   f'stroke="black" stroke-dasharray="6,4"/>')
        out.append(f'<line x1="{left + pw + 10}" y1="{legend_y}" x2="{left + pw + 30}" y2="{legend_y}" '
                   f'stroke="black" stroke-dasharray="6,4"/>')
        out.append(f'<text x="{left + pw + 36}" y="{legend_y + 4}">{escape(h.label)}</text>')
        legend_y += 18
    for i, s in enumerate(plot.series):
        color = COLORS[i % len(COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(s.x, s.y) if not (plot.log_y and y <= 0)]
        dash = ' stroke-dasharray="4,3"' if s.dashed else ""
        if len(pts) > 1:
            path = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>')
        if s.markers:
            out += [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3.2" fill="{color}"/>' for a, b in pts]
        out.append(f'<line x1="{left + pw + 10}" y1="{legend_y}" x2="{left + pw + 30}" y2="{legend_y}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{left + pw + 36}" y="{legend_y + 4}">{escape(s.label)}</text>')
        legend_y += 18
    out.append("</svg>")
    return "\n".join(out) + "\n"
