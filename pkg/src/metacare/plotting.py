"""Log-log regret figures written directly as SVG 1.1.

Output is a deterministic function of the input curves: fixed layout,
fixed palette, fixed number formatting, series in order of first appearance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 1000, 700
LEFT, RIGHT, TOP, BOTTOM = 90, 780, 40, 630
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


class EmptyInput(ValueError):
    pass


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def series_vs_T(curves) -> list[Series]:
    """One series per (learner, mechanism, N, N0) with regret against rounds."""
    mechs = {c.mechanism for c in curves}
    out = []
    for c in curves:
        label = f"{c.learner} N={c.n_experts}"
        if len(mechs) > 1:
            label += f" ({c.mechanism}, N0={c.n_effective})"
        out.append(Series(label, np.asarray(c.checkpoints, float), np.asarray(c.mean, float)))
    return out


def series_vs_N(curves, times=None) -> list[Series]:
    """One series per (learner, mechanism, T) with regret against log2 N.

    ``times`` defaults to the largest checkpoint shared by every curve.
    """
    if times is None:
        common = set(int(t) for t in curves[0].checkpoints)
        for c in curves[1:]:
            common &= set(int(t) for t in c.checkpoints)
        if not common:
            raise EmptyInput("curves share no checkpoint")
        times = [max(common)]
    groups: dict[tuple, list] = {}
    for T in times:
        for c in curves:
            hit = np.nonzero(np.asarray(c.checkpoints) == T)[0]
            if hit.size:
                groups.setdefault((c.learner, c.mechanism, int(T)), []).append(
                    (math.log2(c.n_experts), float(c.mean[hit[0]]))
                )
    out = []
    for (learner, mech, T), pts in groups.items():
        pts.sort()
        xs, ys = zip(*pts)
        out.append(Series(f"{learner} T={T}", np.array(xs), np.array(ys)))
    return out


def _decades(lo: float, hi: float) -> tuple[int, int]:
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    if a == b:
        a, b = a - 1, b + 1
    return a, b


def render_svg(series, xlabel: str, ylabel: str = "expected regret", title: str | None = None) -> str:
    """Draw ``series`` on log10-log10 axes. Non-positive points are dropped."""
    kept = []
    for s in series:
        m = (s.x > 0) & (s.y > 0) & np.isfinite(s.x) & np.isfinite(s.y)
        if m.any():
            kept.append(Series(s.label, s.x[m], s.y[m]))
    if not kept:
        raise EmptyInput("nothing to plot")
    xa, xb = _decades(min(s.x.min() for s in kept), max(s.x.max() for s in kept))
    ya, yb = _decades(min(s.y.min() for s in kept), max(s.y.max() for s in kept))

    def px(v):
        return LEFT + (math.log10(v) - xa) / (xb - xa) * (RIGHT - LEFT)

    def py(v):
        return BOTTOM - (math.log10(v) - ya) / (yb - ya) * (BOTTOM - TOP)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="14">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{(LEFT + RIGHT) // 2}" y="25" text-anchor="middle">{escape(title)}</text>')
    # grid and tick labels at whole decades
    for k in range(xa, xb + 1):
        x = _fmt(px(10.0**k))
        out.append(f'<line x1="{x}" y1="{TOP}" x2="{x}" y2="{BOTTOM}" stroke="#dddddd"/>')
        out.append(f'<text x="{x}" y="{BOTTOM + 20}" text-anchor="middle">10<tspan dy="-6" '
                   f'font-size="10">{k}</tspan></text>')
    for k in range(ya, yb + 1):
        y = _fmt(py(10.0**k))
        out.append(f'<line x1="{LEFT}" y1="{y}" x2="{RIGHT}" y2="{y}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 10}" y="{y}" text-anchor="end" dominant-baseline="middle">10'
                   f'<tspan dy="-6" font-size="10">{k}</tspan></text>')
    out.append(f'<rect x="{LEFT}" y="{TOP}" width="{RIGHT - LEFT}" height="{BOTTOM - TOP}" '
               'fill="none" stroke="black"/>')
    out.append(f'<text x="{(LEFT + RIGHT) // 2}" y="{HEIGHT - 20}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{(TOP + BOTTOM) // 2}" text-anchor="middle" '
               f'transform="rotate(-90 20 {(TOP + BOTTOM) // 2})">{escape(ylabel)}</text>')
    for i, s in enumerate(kept):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(s.x, s.y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = TOP + 10 + 20 * i
        out.append(f'<line x1="{RIGHT + 10}" y1="{ly}" x2="{RIGHT + 40}" y2="{ly}" stroke="{color}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{RIGHT + 50}" y="{ly}" dominant-baseline="middle">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
