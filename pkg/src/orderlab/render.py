"""Dependency-free SVG output: weight heatmaps, grids, bar tables and curves."""

from __future__ import annotations

import math
from html import escape

import numpy as np

from .layer import LayerShape
from .orderedness import apply_hidden_permutation, orderedness

NEUTRAL = "#f7f7f7"


def diverging_color(value: float, scale: float) -> str:
    """Blue for negative, red for positive, neutral grey-white at zero."""
    if scale <= 0 or value == 0 or not math.isfinite(value):
        return NEUTRAL
    t = max(-1.0, min(1.0, value / scale))
    lo = np.array([0xF7, 0xF7, 0xF7], dtype=float)
    hi = np.array([0xB2, 0x18, 0x2B] if t > 0 else [0x21, 0x66, 0xAC], dtype=float)
    rgb = lo + abs(t) * (hi - lo)
    return "#%02x%02x%02x" % tuple(int(round(c)) for c in rgb)


class Canvas:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height
        self.parts: list[str] = []

    def rect(self, x, y, w, h, fill, stroke="none", extra=""):
        self.parts.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="{w:.1f}" height="{h:.1f}" '
            f'fill="{fill}" stroke="{stroke}" {extra}/>'
        )

    def line(self, x1, y1, x2, y2, stroke="#333", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
            f'stroke="{stroke}" stroke-width="{width}"{d}/>'
        )

    def text(self, x, y, s, size=11, anchor="start", extra=""):
        self.parts.append(
            f'<text x="{x:.1f}" y="{y:.1f}" font-family="sans-serif" font-size="{size}" '
            f'text-anchor="{anchor}" {extra}>{escape(str(s))}</text>'
        )

    def polyline(self, pts, stroke, width=1.5):
        p = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
        self.parts.append(f'<polyline points="{p}" fill="none" stroke="{stroke}" stroke-width="{width}"/>')

    def circle(self, x, y, r, fill):
        self.parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="{r}" fill="{fill}"/>')

    def svg(self) -> str:
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width:.0f}" '
            f'height="{self.height:.0f}" viewBox="0 0 {self.width:.0f} {self.height:.0f}">'
        )
        return "\n".join([head, f'<rect width="100%" height="100%" fill="white"/>', *self.parts, "</svg>"]) + "\n"


def _draw_weights(c: Canvas, W: np.ndarray, shape: LayerShape, x0, y0, cell, scale, title, labels):
    n = shape.n
    rows, cols = W.shape
    gap = cell * 0.5
    c.text(x0, y0 - 8, title, size=12, extra='font-weight="bold"')
    for r in range(rows):
        for j in range(cols):
            x = x0 + j * cell + (gap if j >= n else 0)
            c.rect(x, y0 + r * cell, cell, cell, diverging_color(W[r, j], scale))
        kind = "out" if r < shape.o else "hid"
        c.text(x0 - 4, y0 + (r + 0.7) * cell, f"{kind} {labels[r]}", size=9, anchor="end")
    # frame the square state block, then the input columns separately
    c.rect(x0, y0, n * cell, rows * cell, "none", stroke="#444")
    if cols > n:
        c.rect(x0 + n * cell + gap, y0, (cols - n) * cell, rows * cell, "none", stroke="#444")
        c.text(x0 + n * cell + gap, y0 + rows * cell + 12, "inputs", size=9)
    if shape.o < n:
        c.line(x0, y0 + shape.o * cell, x0 + n * cell, y0 + shape.o * cell, stroke="#888", dash="3,2")
        c.line(x0 + shape.o * cell, y0, x0 + shape.o * cell, y0 + rows * cell, stroke="#888", dash="3,2")


def weights_svg(W: np.ndarray, shape: LayerShape, title: str = "weights", cell: float = 24.0) -> str:
    """Heatmap of ``W`` beside its hidden-reordered form under the orderedness witness."""
    W = np.asarray(W, dtype=float)
    res = orderedness(W, shape)
    Wp = apply_hidden_permutation(W, res.permutation, shape.o, shape.h)
    scale = float(np.max(np.abs(W))) if W.size else 0.0
    rows, cols = W.shape
    panel_w = cols * cell + cell * 0.5 + 80
    c = Canvas(2 * panel_w + 60, rows * cell + 110)
    own = [str(k) for k in range(rows)]
    permuted = own[: shape.o] + [str(shape.o + p) for p in res.permutation]
    _draw_weights(c, W, shape, 60, 40, cell, scale, title, own)
    _draw_weights(c, Wp, shape, 60 + panel_w, 40, cell, scale, "hidden units reordered", permuted)
    c.text(60, rows * cell + 85, f"O = {res.O:.4f}   L = {res.lower_mass:.4g}   S = {res.total_mass:.4g}   ({res.solver})", size=11)
    return c.svg()


def grid_svg(values: np.ndarray, row_labels, col_labels, title: str, row_name="", col_name="", cell=40.0) -> str:
    """Annotated heatmap of a 2-d grid of numbers (NaN cells left blank)."""
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    scale = float(np.max(np.abs(finite))) if finite.size else 0.0
    rows, cols = values.shape
    left = 20 + 8 * max(len(str(l)) for l in row_labels)
    c = Canvas(left + cols * cell + 30, rows * cell + 90)
    c.text(left, 20, title, size=12, extra='font-weight="bold"')
    top = 45
    for r in range(rows):
        c.text(left - 6, top + (r + 0.6) * cell, row_labels[r], size=10, anchor="end")
        for j in range(cols):
            v = values[r, j]
            c.rect(left + j * cell, top + r * cell, cell, cell, diverging_color(v, scale), stroke="#ddd")
            if math.isfinite(v):
                c.text(left + (j + 0.5) * cell, top + (r + 0.6) * cell, f"{v:.3f}", size=9, anchor="middle")
    for j in range(cols):
        c.text(left + (j + 0.5) * cell, top + rows * cell + 14, col_labels[j], size=10, anchor="middle")
    if col_name:
        c.text(left + cols * cell / 2, top + rows * cell + 32, col_name, size=11, anchor="middle")
    if row_name:
        c.text(8, top - 8, row_name, size=11)
    return c.svg()


PALETTE = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"]


def curves_svg(curves: dict[str, list[tuple[float, float]]], title: str, xlabel: str, ylabel: str) -> str:
    """Line plot; ``curves`` maps a legend label to (x, y) points."""
    W_, H_ = 560, 360
    left, right, top, bottom = 60, 170, 40, 50
    pts = [p for c in curves.values() for p in c if math.isfinite(p[1])]
    xs = [p[0] for p in pts] or [0.0, 1.0]
    ys = [p[1] for p in pts] or [0.0, 1.0]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if xhi == xlo:
        xhi = xlo + 1
    if yhi == ylo:
        yhi = ylo + 1
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    pw, ph = W_ - left - right, H_ - top - bottom

    def sx(x):
        return left + (x - xlo) / (xhi - xlo) * pw

    def sy(y):
        return top + (1 - (y - ylo) / (yhi - ylo)) * ph

    c = Canvas(W_, H_)
    c.text(left, 22, title, size=12, extra='font-weight="bold"')
    c.rect(left, top, pw, ph, "none", stroke="#444")
    for k in range(5):
        yv = ylo + k * (yhi - ylo) / 4
        c.line(left - 4, sy(yv), left, sy(yv))
        c.text(left - 6, sy(yv) + 4, f"{yv:.2f}", size=9, anchor="end")
        xv = xlo + k * (xhi - xlo) / 4
        c.line(sx(xv), top + ph, sx(xv), top + ph + 4)
        c.text(sx(xv), top + ph + 16, f"{xv:.2f}", size=9, anchor="middle")
    c.text(left + pw / 2, H_ - 10, xlabel, size=11, anchor="middle")
    c.text(14, top + ph / 2, ylabel, size=11, anchor="middle", extra=f'transform="rotate(-90 14 {top + ph / 2:.1f})"')
    for idx, (label, cpts) in enumerate(curves.items()):
        color = PALETTE[idx % len(PALETTE)]
        good = [(sx(x), sy(y)) for x, y in cpts if math.isfinite(y)]
        if good:
            c.polyline(good, color)
            for x, y in good:
                c.circle(x, y, 2.5, color)
        ly = top + 12 + idx * 16
        c.line(left + pw + 12, ly - 4, left + pw + 30, ly - 4, stroke=color, width=2)
        c.text(left + pw + 34, ly, label, size=10)
    return c.svg()
