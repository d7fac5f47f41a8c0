"""Single-panel SVG line charts of coverage curves, written by hand."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 64, 180, 24, 48
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _nice_ticks(lo, hi, n=5):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(v):
    return f"{v:.4g}"


def render_svg(curves, path) -> str:
    """Plot ``curves`` (CoverageCurve list) to ``path``; returns the SVG text.

    x is |theta|, y is coverage; a dashed line marks 1 - alpha. MC curves get
    +-2 SE error bars. A curve with a single point is drawn as a marker only.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("render_svg needs at least one curve")
    alphas = {round(c.alpha, 12) for c in curves}
    if len(alphas) != 1:
        raise ValueError(f"curves disagree on alpha: {sorted(alphas)}")
    level = 1.0 - curves[0].alpha

    xs = [x for c in curves for x in c.theta_norms]
    ys = [level]
    for c in curves:
        for e, s in zip(c.estimates, c.std_errors):
            half = 2 * s if c.method == "mc" else 0.0
            ys += [e - half, e + half]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    y_lo, y_hi = min(ys), max(ys)
    pad = max(0.1 * (y_hi - y_lo), 0.005)
    y_lo, y_hi = max(0.0, y_lo - pad), min(1.0, y_hi + pad)

    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return TOP + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="11">',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="white" stroke="#444"/>',
    ]
    for t in _nice_ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(t):.2f}" y1="{TOP + ph}" x2="{sx(t):.2f}" y2="{TOP + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{TOP + ph + 16}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _nice_ticks(y_lo, y_hi):
        out.append(f'<line x1="{LEFT - 4}" y1="{sy(t):.2f}" x2="{LEFT}" y2="{sy(t):.2f}" stroke="#444"/>')
        out.append(f'<text x="{LEFT - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{H - 10}" text-anchor="middle">|theta|</text>')
    out.append(f'<text x="14" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 14 {TOP + ph / 2:.2f})">coverage</text>')
    out.append(f'<line class="reference" x1="{LEFT}" y1="{sy(level):.2f}" x2="{LEFT + pw}" y2="{sy(level):.2f}" '
               'stroke="#000" stroke-dasharray="5,4"/>')

    legend_y = TOP + 8
    for i, c in enumerate(curves):
        col = COLORS[i % len(COLORS)]
        pts = [(sx(x), sy(e)) for x, e in zip(c.theta_norms, c.estimates)]
        if len(pts) > 1:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        for x, y in pts:
            out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{col}"/>')
        if c.method == "mc":
            for xv, e, s in zip(c.theta_norms, c.estimates, c.std_errors):
                if s > 0:
                    out.append(f'<line class="errorbar" x1="{sx(xv):.2f}" y1="{sy(e - 2 * s):.2f}" '
                               f'x2="{sx(xv):.2f}" y2="{sy(e + 2 * s):.2f}" stroke="{col}"/>')
        label = escape(f"{c.procedure_id} ({c.method})")
        ly = legend_y + 16 * i
        out.append(f'<line x1="{W - RIGHT + 12}" y1="{ly}" x2="{W - RIGHT + 32}" y2="{ly}" stroke="{col}" '
                   'stroke-width="2"/>')
        out.append(f'<text x="{W - RIGHT + 36}" y="{ly + 4}">{label}</text>')
    ly = legend_y + 16 * len(curves)
    out.append(f'<line x1="{W - RIGHT + 12}" y1="{ly}" x2="{W - RIGHT + 32}" y2="{ly}" stroke="#000" '
               'stroke-dasharray="5,4"/>')
    out.append(f'<text x="{W - RIGHT + 36}" y="{ly + 4}">1 - alpha = {_fmt(level)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return text
