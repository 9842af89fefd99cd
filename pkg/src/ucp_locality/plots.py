"""Self-contained SVG renderings: PDR histogram, per-level interval plots
and level bar charts.  Output is plain text with fixed number formatting,
so identical inputs give identical bytes."""

from __future__ import annotations

import numpy as np

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 20, 48, 56


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".") if v == v else "nan"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
        f'font-size="15">{title}</text>',
    ]


def _axes(x_label: str, y_label: str) -> list[str]:
    x0, y0 = _ML, _H - _MB
    x1, y1 = _W - _MR, _MT
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2:.1f}" y="{_H - 14}" '
        f'text-anchor="middle">{x_label}</text>',
        f'<text x="18" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">{y_label}</text>',
    ]


def _y_ticks(lo: float, hi: float, to_y) -> list[str]:
    parts = []
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        v = lo + frac * (hi - lo)
        y = to_y(v)
        parts.append(f'<line x1="{_ML - 4}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{_ML - 8}" y="{y + 4:.1f}" '
                     f'text-anchor="end">{_fmt(v)}</text>')
    return parts


def svg_histogram(values, bins: int = 10, title: str = "Histogram",
                  x_label: str = "value") -> str:
    """Counts over equal-width bins spanning the data range."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot plot an empty sample")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(arr, bins=edges)
    top = max(int(counts.max()), 1)

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB
    to_y = lambda v: _H - _MB - (v / top) * plot_h

    parts = _header(title) + _axes(x_label, "count") + _y_ticks(0, top, to_y)
    bar_w = plot_w / bins
    for i, count in enumerate(counts):
        x = _ML + i * bar_w
        y = to_y(float(count))
        h = _H - _MB - y
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w - 2:.1f}" '
                     f'height="{h:.1f}" fill="#4878a8"/>')
        parts.append(f'<text x="{x:.1f}" y="{_H - _MB + 16}" '
                     f'font-size="10">{_fmt(float(edges[i]))}</text>')
    parts.append(f'<text x="{_W - _MR:.1f}" y="{_H - _MB + 16}" font-size="10" '
                 f'text-anchor="end">{_fmt(hi)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_interval_plot(summaries, title: str,
                      y_label: str = "PDR") -> str:
    """Mean with 95% CI whiskers per factor level; levels whose CI is
    undefined (single project) show an open marker only."""
    summaries = list(summaries)
    if not summaries:
        raise ValueError("no levels to plot")
    values = [s.mean for s in summaries]
    values += [s.ci_low for s in summaries if s.ci_defined]
    values += [s.ci_high for s in summaries if s.ci_defined]
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.08 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB
    to_y = lambda v: _H - _MB - ((v - lo) / (hi - lo)) * plot_h

    parts = _header(title) + _axes("level", y_label) + _y_ticks(lo, hi, to_y)
    step = plot_w / (len(summaries) + 1)
    for i, s in enumerate(summaries):
        x = _ML + (i + 1) * step
        ym = to_y(s.mean)
        if s.ci_defined:
            y_lo, y_hi = to_y(s.ci_low), to_y(s.ci_high)
            parts.append(f'<line x1="{x:.1f}" y1="{y_lo:.1f}" x2="{x:.1f}" '
                         f'y2="{y_hi:.1f}" stroke="#a83838" stroke-width="2"/>')
            for y in (y_lo, y_hi):
                parts.append(f'<line x1="{x - 6:.1f}" y1="{y:.1f}" '
                             f'x2="{x + 6:.1f}" y2="{y:.1f}" stroke="#a83838" '
                             f'stroke-width="2"/>')
            parts.append(f'<circle cx="{x:.1f}" cy="{ym:.1f}" r="4" '
                         f'fill="#a83838"/>')
        else:
            parts.append(f'<circle cx="{x:.1f}" cy="{ym:.1f}" r="4" '
                         f'fill="white" stroke="#a83838" stroke-width="2"/>')
        parts.append(f'<text x="{x:.1f}" y="{_H - _MB + 16}" '
                     f'text-anchor="middle">{s.level}</text>')
        parts.append(f'<text x="{x:.1f}" y="{_H - _MB + 32}" font-size="10" '
                     f'text-anchor="middle">n={s.count}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_bar_chart(counts, title: str, x_label: str = "level") -> str:
    """Occupancy bar chart over levels 0..5."""
    counts = [int(c) for c in counts]
    top = max(max(counts), 1)
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB
    to_y = lambda v: _H - _MB - (v / top) * plot_h

    parts = _header(title) + _axes(x_label, "projects") + _y_ticks(0, top, to_y)
    bar_w = plot_w / len(counts)
    for level, count in enumerate(counts):
        x = _ML + level * bar_w
        y = to_y(float(count))
        h = _H - _MB - y
        parts.append(f'<rect x="{x + 4:.1f}" y="{y:.1f}" width="{bar_w - 8:.1f}" '
                     f'height="{h:.1f}" fill="#48a878"/>')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{_H - _MB + 16}" '
                     f'text-anchor="middle">{level}</text>')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{max(y - 6, 12):.1f}" '
                     f'text-anchor="middle" font-size="10">{count}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
