"""Minimal deterministic SVG line charts with optional shaded bands."""
from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .errors import DomainError
from .io import write_text

PALETTE = ("#000000", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
BAND_FILL = "#7f7f7f"


@dataclass(frozen=True)
class Series:
    label: str
    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise DomainError(f"series {self.label!r}: x and y lengths differ")

    def finite_points(self):
        return [(a, b) for a, b in zip(self.x, self.y) if math.isfinite(a) and math.isfinite(b)]


@dataclass(frozen=True)
class Band:
    """Vertical shaded interval ``[start, stop]`` on the x axis."""

    start: float
    stop: float
    label: str = ""


def _padded(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        return lo, hi
    pad = 0.05 * abs(lo) if lo != 0 else 0.05
    return lo - pad, hi + pad


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    raw = (hi - lo) / target
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = next(m * magnitude for m in (1, 2, 2.5, 5, 10) if m * magnitude >= raw)
    first = math.ceil(lo / step - 1e-9)
    last = math.floor(hi / step + 1e-9)
    return [k * step for k in range(first, last + 1)]


def _tick_label(value: float, ticks: list[float]) -> str:
    step = ticks[1] - ticks[0] if len(ticks) > 1 else abs(value) or 1.0
    decimals = max(0, -math.floor(math.log10(step) + 1e-9))
    if round(step * 10**decimals) != step * 10**decimals:
        decimals += 1
    text = f"{value:.{decimals}f}"
    return "0" if float(text) == 0 else text


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def render_svg(
    series,
    bands=(),
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 640,
    height: int = 420,
) -> str:
    series = list(series)
    if not series:
        raise DomainError("at least one series is required")
    for s in series:
        if len(s.finite_points()) < 2:
            raise DomainError(f"series {s.label!r} needs at least 2 finite points")

    xs = [p[0] for s in series for p in s.finite_points()]
    ys = [p[1] for s in series for p in s.finite_points()]
    x_lo, x_hi = _padded(min(xs), max(xs))
    y_lo, y_hi = _padded(min(ys), max(ys))

    left, right, top, bottom = 80, 20, 40, 60
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return top + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    if title:
        out.append(
            f'<text x="{_fmt(width / 2)}" y="24" text-anchor="middle" font-size="14">'
            f"{escape(title)}</text>"
        )

    for band in bands:
        a, b = sorted((band.start, band.stop))
        a, b = max(a, x_lo), min(b, x_hi)
        if b < a:
            continue
        out.append(
            f'<rect class="band" x="{_fmt(sx(a))}" y="{_fmt(top)}" '
            f'width="{_fmt(max(sx(b) - sx(a), 1.0))}" height="{_fmt(ph)}" '
            f'fill="{BAND_FILL}" fill-opacity="0.25"/>'
        )

    out.append(
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>'
    )
    xticks, yticks = nice_ticks(x_lo, x_hi), nice_ticks(y_lo, y_hi)
    for t in xticks:
        px = _fmt(sx(t))
        out.append(f'<line x1="{px}" y1="{top + ph}" x2="{px}" y2="{top + ph + 5}" stroke="#000000"/>')
        out.append(
            f'<text x="{px}" y="{top + ph + 18}" text-anchor="middle">{_tick_label(t, xticks)}</text>'
        )
    for t in yticks:
        py = _fmt(sy(t))
        out.append(f'<line x1="{left - 5}" y1="{py}" x2="{left}" y2="{py}" stroke="#000000"/>')
        out.append(
            f'<text x="{left - 8}" y="{py}" text-anchor="end" dominant-baseline="middle">'
            f"{_tick_label(t, yticks)}</text>"
        )
    if xlabel:
        out.append(
            f'<text x="{_fmt(left + pw / 2)}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>'
        )
    if ylabel:
        cy = _fmt(top + ph / 2)
        out.append(
            f'<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">'
            f"{escape(ylabel)}</text>"
        )

    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in s.finite_points())
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')

    entries = [(s.label, PALETTE[k % len(PALETTE)], "line") for k, s in enumerate(series) if s.label]
    entries += [(b.label, BAND_FILL, "band") for b in bands if b.label]
    for k, (label, color, kind) in enumerate(entries):
        ly = top + 14 + 16 * k
        lx = left + pw - 150
        if kind == "line":
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="1.5"/>')
        else:
            out.append(
                f'<rect x="{lx}" y="{ly - 5}" width="20" height="10" fill="{color}" fill-opacity="0.25"/>'
            )
        out.append(f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle">{escape(label)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_figure_svg(series, path, bands=(), **labels):
    """Render ``series`` (and optional shaded ``bands``) to an SVG file at ``path``."""
    return write_text(path, render_svg(series, bands=bands, **labels))
