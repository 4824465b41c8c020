"""Deterministic self-contained SVG line plots.

No timestamps, random ids or external assets: identical input yields a
byte-identical document.  Supports per-phase background shading, dashed
vertical markers at switching times, and NaN-gapped series (one polyline per
contiguous finite run).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
)
SPAN_FILLS = ("#f2f2f2", "#e8f0f8", "#f8ece8", "#eef6ee")


@dataclass(frozen=True)
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))


@dataclass(frozen=True)
class PlotStyle:
    width: int = 880
    height: int = 460
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    legend: bool = True
    phase_spans: tuple[tuple[float, float, str], ...] = ()   # (lo, hi, label)
    vlines: tuple[tuple[float, str], ...] = ()               # (x, label)
    markers: tuple[tuple[float, float, str], ...] = ()       # (x, y, shape)


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    norm = raw / mag
    for step in (1.0, 2.0, 5.0):
        if norm <= step:
            return step * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    if hi <= lo:
        return [lo]
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _fmt_tick(v: float) -> str:
    return f"{v:.6g}"


def _esc(s: str) -> str:
    return (
        s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def emit_svg(series: list[Series] | tuple[Series, ...],
             style: PlotStyle | None = None) -> str:
    """Render the series to a standalone SVG document string."""
    style = style or PlotStyle()
    if not series:
        raise ValueError("emit_svg needs at least one series")
    for s in series:
        if s.x.size == 0:
            raise ValueError(f"series {s.name!r} is empty")
        if s.x.size != s.y.size:
            raise ValueError(f"series {s.name!r} has mismatched x/y lengths")
        if np.any(np.diff(s.x) < 0):
            raise ValueError(f"series {s.name!r} abscissae must be ascending")

    xs = np.concatenate([s.x for s in series])
    ys = np.concatenate([s.y[np.isfinite(s.y)] for s in series])
    if ys.size == 0:
        raise ValueError("no finite data to plot")
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if x_hi <= x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi <= y_lo:
        pad = max(abs(y_lo) * 0.1, 0.5)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    else:
        pad = 0.04 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

    w, h = style.width, style.height
    ml, mr, mt, mb = 62, 18, (34 if style.title else 16), 46
    pw, ph = w - ml - mr, h - mt - mb

    def px(x: float) -> float:
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        return mt + (y_hi - y) / (y_hi - y_lo) * ph

    out: list[str] = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">'
    )
    out.append(f'<rect width="{w}" height="{h}" fill="#ffffff"/>')

    for i, (lo, hi, label) in enumerate(style.phase_spans):
        a, b = max(lo, x_lo), min(hi, x_hi)
        if b <= a:
            continue
        fill = SPAN_FILLS[i % len(SPAN_FILLS)]
        out.append(
            f'<rect x="{px(a):.2f}" y="{mt}" width="{px(b) - px(a):.2f}" '
            f'height="{ph}" fill="{fill}"/>'
        )
        if label:
            out.append(
                f'<text x="{(px(a) + px(b)) / 2:.2f}" y="{mt + 14}" '
                f'font-size="11" fill="#888888" text-anchor="middle" '
                f'font-family="sans-serif">{_esc(label)}</text>'
            )

    # axes, ticks, grid
    x_ticks = _ticks(x_lo, x_hi)
    y_ticks = _ticks(y_lo, y_hi)
    for t in x_ticks:
        out.append(
            f'<line x1="{px(t):.2f}" y1="{mt}" x2="{px(t):.2f}" '
            f'y2="{mt + ph}" stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{px(t):.2f}" y="{mt + ph + 18}" font-size="12" '
            f'text-anchor="middle" font-family="sans-serif">{_fmt_tick(t)}</text>'
        )
    for t in y_ticks:
        out.append(
            f'<line x1="{ml}" y1="{py(t):.2f}" x2="{ml + pw}" y2="{py(t):.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{py(t) + 4:.2f}" font-size="12" '
            f'text-anchor="end" font-family="sans-serif">{_fmt_tick(t)}</text>'
        )
    out.append(
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" '
        f'stroke="#000000" stroke-width="1"/>'
    )
    out.append(
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" '
        f'stroke="#000000" stroke-width="1"/>'
    )

    for xv, label in style.vlines:
        if not x_lo <= xv <= x_hi:
            continue
        out.append(
            f'<line x1="{px(xv):.2f}" y1="{mt}" x2="{px(xv):.2f}" '
            f'y2="{mt + ph}" stroke="#555555" stroke-width="1" '
            f'stroke-dasharray="5,4"/>'
        )
        if label:
            out.append(
                f'<text x="{px(xv) + 3:.2f}" y="{mt + ph - 6}" font-size="11" '
                f'fill="#555555" font-family="sans-serif">{_esc(label)}</text>'
            )

    # data series: one polyline per contiguous finite run
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        finite = np.isfinite(s.y)
        start = None
        runs = []
        for k, ok in enumerate(finite):
            if ok and start is None:
                start = k
            elif not ok and start is not None:
                runs.append((start, k))
                start = None
        if start is not None:
            runs.append((start, len(finite)))
        for a, b in runs:
            if b - a == 1:
                out.append(
                    f'<circle cx="{px(s.x[a]):.2f}" cy="{py(s.y[a]):.2f}" '
                    f'r="2" fill="{color}"/>'
                )
                continue
            pts = " ".join(
                f"{px(s.x[k]):.2f},{py(s.y[k]):.2f}" for k in range(a, b)
            )
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                f'stroke-width="1.5"/>'
            )

    for xv, yv, shape in style.markers:
        if shape == "star":
            out.append(_star(px(xv), py(yv), 7.0))
        else:
            out.append(
                f'<circle cx="{px(xv):.2f}" cy="{py(yv):.2f}" r="4" '
                f'fill="#d62728"/>'
            )

    if style.legend:
        lx = ml + pw - 150
        ly = mt + 10
        box_h = 18 * len(series) + 8
        out.append(
            f'<rect x="{lx - 8}" y="{ly - 4}" width="150" height="{box_h}" '
            f'fill="#ffffff" fill-opacity="0.85" stroke="#cccccc"/>'
        )
        for i, s in enumerate(series):
            color = PALETTE[i % len(PALETTE)]
            yy = ly + 18 * i + 8
            out.append(
                f'<rect x="{lx}" y="{yy - 8}" width="14" height="4" '
                f'fill="{color}"/>'
            )
            out.append(
                f'<text x="{lx + 20}" y="{yy}" font-size="12" '
                f'font-family="sans-serif" class="legend">{_esc(s.name)}</text>'
            )

    if style.title:
        out.append(
            f'<text x="{w / 2:.0f}" y="20" font-size="15" text-anchor="middle" '
            f'font-family="sans-serif">{_esc(style.title)}</text>'
        )
    if style.xlabel:
        out.append(
            f'<text x="{ml + pw / 2:.0f}" y="{h - 10}" font-size="13" '
            f'text-anchor="middle" font-family="sans-serif">'
            f'{_esc(style.xlabel)}</text>'
        )
    if style.ylabel:
        out.append(
            f'<text x="16" y="{mt + ph / 2:.0f}" font-size="13" '
            f'text-anchor="middle" font-family="sans-serif" '
            f'transform="rotate(-90 16 {mt + ph / 2:.0f})">'
            f'{_esc(style.ylabel)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _star(cx: float, cy: float, r: float) -> str:
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else 0.4 * r
        ang = -math.pi / 2 + k * math.pi / 5
        pts.append(f"{cx + rad * math.cos(ang):.2f},{cy + rad * math.sin(ang):.2f}")
    return f'<polygon points="{" ".join(pts)}" fill="#e6b400" stroke="#8a6d00"/>'
