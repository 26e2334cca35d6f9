"""Deterministic SVG charts: learning curves with standard-error bands, and
grid heatmaps for adjacency-distance visualization.

The output is plain hand-assembled SVG so that identical inputs produce
byte-identical files (golden-file friendly; no plotting library involved).
"""
from __future__ import annotations

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 48


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return [float(v) for v in raw]


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def line_chart(summaries, title: str = "", x_label: str = "", y_label: str = "") -> str:
    """Render curve summaries (dicts with label, x, mean, sem) as an SVG line
    chart with shaded standard-error bands. Bands are omitted where the SEM
    is zero everywhere."""
    if not summaries:
        raise ValueError("nothing to plot")
    xs = np.concatenate([np.asarray(s["x"], dtype=np.float64) for s in summaries])
    los = np.concatenate([np.asarray(s["mean"]) - np.asarray(s["sem"]) for s in summaries])
    his = np.concatenate([np.asarray(s["mean"]) + np.asarray(s["sem"]) for s in summaries])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(los.min()), float(his.max())
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + pw * (v - x0) / (x1 - x0)

    def sy(v):
        return MARGIN_T + ph * (1.0 - (v - y0) / (y1 - y0))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH // 2}" y="20" font-family="monospace" font-size="14" '
                   f'text-anchor="middle">{_esc(title)}</text>')

    # axes and ticks
    ax_y = MARGIN_T + ph
    out.append(f'<line x1="{MARGIN_L}" y1="{ax_y}" x2="{MARGIN_L + pw}" y2="{ax_y}" '
               f'stroke="black" stroke-width="1"/>')
    out.append(f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{ax_y}" '
               f'stroke="black" stroke-width="1"/>')
    for v in _ticks(x0, x1):
        px = sx(v)
        out.append(f'<line x1="{_fmt(px)}" y1="{ax_y}" x2="{_fmt(px)}" y2="{ax_y + 5}" '
                   f'stroke="black" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(px)}" y="{ax_y + 18}" font-family="monospace" '
                   f'font-size="11" text-anchor="middle">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        py = sy(v)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py)}" x2="{MARGIN_L}" y2="{_fmt(py)}" '
                   f'stroke="black" stroke-width="1"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(py + 4)}" font-family="monospace" '
                   f'font-size="11" text-anchor="end">{v:.4g}</text>')
    if x_label:
        out.append(f'<text x="{MARGIN_L + pw // 2}" y="{HEIGHT - 10}" font-family="monospace" '
                   f'font-size="12" text-anchor="middle">{_esc(x_label)}</text>')
    if y_label:
        cy = MARGIN_T + ph // 2
        out.append(f'<text x="14" y="{cy}" font-family="monospace" font-size="12" '
                   f'text-anchor="middle" transform="rotate(-90 14 {cy})">{_esc(y_label)}</text>')

    for i, s in enumerate(summaries):
        color = PALETTE[i % len(PALETTE)]
        x = np.asarray(s["x"], dtype=np.float64)
        mean = np.asarray(s["mean"], dtype=np.float64)
        sem = np.asarray(s["sem"], dtype=np.float64)
        if np.any(sem > 0.0):
            upper = [f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, mean + sem)]
            lower = [f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x[::-1], (mean - sem)[::-1])]
            out.append(f'<polygon points="{" ".join(upper + lower)}" fill="{color}" '
                       f'fill-opacity="0.2" stroke="none"/>')
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, mean))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')

    # legend, top-right corner of the plot area
    for i, s in enumerate(summaries):
        color = PALETTE[i % len(PALETTE)]
        ly = MARGIN_T + 14 + 16 * i
        lx = MARGIN_L + pw - 150
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2" class="legend"/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}" font-family="monospace" '
                   f'font-size="11">{_esc(str(s["label"]))}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def _ramp(t: float) -> str:
    """Cold (blue) -> warm (red) color ramp on [0, 1]."""
    t = min(max(t, 0.0), 1.0)
    r = int(round(40 + 215 * t))
    g = int(round(60 + 80 * (1.0 - abs(2 * t - 1.0))))
    b = int(round(40 + 215 * (1.0 - t)))
    return f"#{r:02x}{g:02x}{b:02x}"


def grid_heatmap(values: np.ndarray, walls: np.ndarray, title: str = "",
                 cell: int = 24, marks: dict | None = None) -> str:
    """Heatmap over a grid: values (H, W), NaN or wall cells drawn dark.
    marks maps (x, y) -> single-character label drawn on top."""
    h, w = values.shape
    width = w * cell + 2
    height = h * cell + (30 if title else 2)
    top = 28 if title else 1
    finite = values[np.isfinite(values)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    span = hi - lo if hi > lo else 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">']
    if title:
        out.append(f'<text x="{width // 2}" y="18" font-family="monospace" font-size="13" '
                   f'text-anchor="middle">{_esc(title)}</text>')
    for y in range(h):
        for x in range(w):
            if walls[y, x] or not np.isfinite(values[y, x]):
                color = "#222222"
            else:
                color = _ramp((values[y, x] - lo) / span)
            out.append(f'<rect x="{x * cell + 1}" y="{y * cell + top}" width="{cell}" '
                       f'height="{cell}" fill="{color}" stroke="#555555" stroke-width="0.5"/>')
    for (x, y), ch in (marks or {}).items():
        out.append(f'<text x="{x * cell + 1 + cell // 2}" y="{y * cell + top + cell // 2 + 5}" '
                   f'font-family="monospace" font-size="{cell - 8}" text-anchor="middle" '
                   f'fill="white">{_esc(ch)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
