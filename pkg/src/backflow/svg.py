"""Tiny dependency-free SVG line charts for eyeballing the output curves."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#7f7f7f")
WIDTH, HEIGHT, PAD = 640, 420, 50


def line_chart(series, title="", xlabel="u0", ylabel="lambda_max", ylim=(0.0, 1.0)):
    """Render ``series`` (a list of ``(label, xs, ys)``) as an SVG document.

    Non-finite or missing y values break the polyline, so a step curve can
    be drawn as two segments by putting ``None`` at the jump.
    """
    xs_all = [x for _, xs, _ in series for x in xs]
    x0, x1 = min(xs_all), max(xs_all)
    if x1 == x0:
        x1 = x0 + 1.0
    y0, y1 = ylim

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
        'fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2:.1f}" y="{PAD / 2:.1f}" text-anchor="middle">{escape(title)}</text>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {HEIGHT / 2:.1f})">{escape(ylabel)}</text>',
    ]
    for tick in (x0, 0.5 * (x0 + x1), x1):
        parts.append(f'<text x="{sx(tick):.1f}" y="{HEIGHT - PAD + 16}" '
                     f'text-anchor="middle">{tick:.3g}</text>')
    for tick in (y0, 0.5 * (y0 + y1), y1):
        parts.append(f'<text x="{PAD - 6}" y="{sy(tick) + 4:.1f}" '
                     f'text-anchor="end">{tick:.3g}</text>')

    for k, (label, xs, ys) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        segment = []
        segments = [segment]
        for x, y in zip(xs, ys):
            if y is None or not math.isfinite(y):
                segment = []
                segments.append(segment)
                continue
            segment.append(f"{sx(x):.2f},{sy(min(max(y, y0), y1)):.2f}")
        for seg in segments:
            if len(seg) > 1:
                parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                             f'points="{" ".join(seg)}"/>')
        ly = PAD + 14 + 16 * k
        parts.append(f'<line x1="{WIDTH - PAD - 110}" y1="{ly - 4}" x2="{WIDTH - PAD - 90}" '
                     f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{WIDTH - PAD - 84}" y="{ly}">{escape(str(label))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
