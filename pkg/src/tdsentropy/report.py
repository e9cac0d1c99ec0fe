"""Dominance-rate curves, entropy-curve features and SVG figures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from tdsentropy.core import DominanceGrid
from tdsentropy.errors import DomainError, NoDataError
from tdsentropy.estimators import NO_DATA, CurvePoint, EntropyCurve
from tdsentropy.ingest import CHANCE, RateSeries


@dataclass(frozen=True)
class TdsCurves:
    sample_id: str
    series: tuple  # RateSeries, one per attribute
    chance_level: float

    def chance_series(self) -> RateSeries:
        points = [CurvePoint(p.tau, self.chance_level)
                  for p in self.series[0].points]
        return RateSeries(self.sample_id, CHANCE, points, is_chance=True)

    def all_series(self) -> list:
        return list(self.series) + [self.chance_series()]


def tds_curves(grid: DominanceGrid) -> TdsCurves:
    """Per-attribute dominance rate ``n_a(tau) / panel size`` and chance level."""
    rates = grid.counts / grid.panel_denominator
    series = tuple(
        RateSeries(grid.sample_id, name,
                   [CurvePoint(float(t), float(r)) for t, r in zip(grid.tau, row)])
        for name, row in zip(grid.attributes, rates))
    return TdsCurves(grid.sample_id, series, 1.0 / grid.n_attributes)


@dataclass(frozen=True)
class CurveFeatures:
    sample_id: str
    first_defined_tau: float
    h_first: float
    h_max: float
    tau_argmax: float
    h_swallow: float
    rise_then_fall: bool


def curve_features(curve: EntropyCurve) -> CurveFeatures:
    """Summarize the rise-maximum-decline shape of an entropy curve.

    Points flagged ``no-data`` are ignored.  ``h_swallow`` is the value at
    the last defined point, which is tau = 100 for curves from a grid.
    """
    pts = [p for p in curve.points if NO_DATA not in p.flags]
    if not pts:
        raise NoDataError(f"curve for {curve.sample_id!r} has no defined point")
    pts.sort(key=lambda p: p.tau)
    first, last = pts[0], pts[-1]
    best = first
    for p in pts:
        if p.value > best.value:
            best = p
    return CurveFeatures(
        sample_id=curve.sample_id,
        first_defined_tau=first.tau,
        h_first=first.value,
        h_max=best.value,
        tau_argmax=best.tau,
        h_swallow=last.value,
        rise_then_fall=best.value > first.value and last.value < best.value,
    )


def moving_average(points: Sequence[CurvePoint], window: int = 5) -> list:
    """Centered moving average over defined points; the window shrinks at edges."""
    if window < 1 or window % 2 == 0:
        raise DomainError(f"window must be a positive odd integer, got {window}")
    half = window // 2
    defined = [NO_DATA not in p.flags for p in points]
    out = []
    for i, p in enumerate(points):
        if not defined[i]:
            out.append(p)
            continue
        lo, hi = max(0, i - half), min(len(points), i + half + 1)
        vals = [points[j].value for j in range(lo, hi) if defined[j]]
        out.append(CurvePoint(p.tau, float(np.mean(vals)), p.flags))
    return out


# -- SVG ------------------------------------------------------------------

WIDTH, HEIGHT = 640, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 60, 170, 40, 50
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
CHANCE_COLOR = "#000000"


def _num(x: float) -> str:
    return f"{x:.2f}"


def render_svg(series, axis_max_y: float, title: str) -> str:
    """Render labeled ``(tau, value)`` series as a standalone SVG line chart.

    Parameters
    ----------
    series : sequence of (label, points) pairs
        ``points`` is a sequence of ``(tau, value)``.  A label equal to
        ``"chance"`` is drawn dashed.
    axis_max_y : float
        Upper end of the y axis, 1.0 for entropy and rates, 0.25 for
        complexity.
    title : str
        Figure title.
    """
    series = list(series)
    if not series:
        raise DomainError("no series to plot")
    if any(len(pts) == 0 for _, pts in series):
        raise DomainError("cannot plot an empty series")
    if not axis_max_y > 0:
        raise DomainError("axis_max_y must be positive")

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + plot_h

    def sx(tau):
        return x0 + plot_w * float(tau) / 100.0

    def sy(v):
        v = min(max(float(v), 0.0), axis_max_y)
        return y0 - plot_h * v / axis_max_y

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'font-family="sans-serif" font-size="12">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{_num(x0 + plot_w / 2)}" y="24" text-anchor="middle" '
        f'font-size="14">{escape(title)}</text>',
        '<g class="axes" stroke="#000000" stroke-width="1">',
        f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{MARGIN_TOP}"/>',
        '</g>',
        '<g class="ticks">',
    ]
    for tau in range(0, 101, 20):
        x = _num(sx(tau))
        out.append(f'<line x1="{x}" y1="{y0}" x2="{x}" y2="{y0 + 5}" '
                   f'stroke="#000000"/>')
        out.append(f'<text x="{x}" y="{y0 + 18}" text-anchor="middle">'
                   f'{tau}</text>')
    for i in range(6):
        v = axis_max_y * i / 5
        y = _num(sy(v))
        out.append(f'<line x1="{x0 - 5}" y1="{y}" x2="{x0}" y2="{y}" '
                   f'stroke="#000000"/>')
        out.append(f'<text x="{x0 - 8}" y="{y}" text-anchor="end" '
                   f'dominant-baseline="middle">{v:g}</text>')
    out.append('</g>')
    out.append(f'<text x="{_num(x0 + plot_w / 2)}" y="{HEIGHT - 10}" '
               f'text-anchor="middle">% mastication time</text>')

    out.append('<g class="series" fill="none" stroke-width="1.5">')
    colors = []
    color_idx = 0
    for label, pts in series:
        if label == CHANCE:
            color, dash = CHANCE_COLOR, ' stroke-dasharray="6,4"'
        else:
            color, dash = PALETTE[color_idx % len(PALETTE)], ""
            color_idx += 1
        colors.append((color, dash))
        coords = " ".join(f"{_num(sx(t))},{_num(sy(v))}" for t, v in pts)
        out.append(f'<polyline stroke="{color}"{dash} '
                   f'data-label={quoteattr(str(label))} points="{coords}"/>')
    out.append('</g>')

    out.append('<g class="legend">')
    lx = WIDTH - MARGIN_RIGHT + 15
    for i, ((label, _), (color, dash)) in enumerate(zip(series, colors)):
        ly = MARGIN_TOP + 10 + 18 * i
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle">'
                   f'{escape(str(label))}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def curve_svg(curves, axis_max_y: float = 1.0,
              title: Optional[str] = None, labels=None) -> str:
    """Render curve objects (anything with ``points``) through :func:`render_svg`."""
    curves = list(curves)
    if labels is None:
        labels = [getattr(c, "label", None) or getattr(c, "estimator", "")
                  for c in curves]
    series = [(label, [(p.tau, p.value) for p in c.points])
              for label, c in zip(labels, curves)]
    if title is None:
        title = curves[0].sample_id if curves else ""
    return render_svg(series, axis_max_y, title)
