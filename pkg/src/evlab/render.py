"""SVG drawings of staircases."""

from __future__ import annotations

from xml.sax.saxutils import escape

from .config import Configuration, staircase_path
from .lyapunov import f1, g_rect

CELL = 16
MARGIN = 24


def _panel(S: Configuration, x0: float, highlight_rect: bool, title: str | None):
    """SVG elements for one staircase with its top-left corner at ``x0``.

    Returns ``(elements, width, height)``.
    """
    parts = []
    if S.is_ground:
        w, h = 8 * CELL, 4 * CELL
        parts.append(f'<rect x="{x0}" y="{MARGIN}" width="{w}" height="{h}" '
                     'fill="none" stroke="#999" stroke-dasharray="4 3"/>')
        parts.append(f'<text x="{x0 + w / 2}" y="{MARGIN + h / 2}" text-anchor="middle" '
                     'font-size="12">ground state: empty staircase</text>')
        if title:
            parts.append(f'<text x="{x0}" y="{MARGIN - 8}" font-size="12">{escape(title)}</text>')
        return parts, w, h + 2 * MARGIN

    pts = staircase_path(S).points
    X = pts[-1][0]
    Y = pts[0][1]
    w, h = X * CELL, Y * CELL

    def sx(x):
        return x0 + x * CELL

    def sy(y):
        return MARGIN + (Y - y) * CELL

    region = [f"{sx(0)},{sy(0)}"] + [f"{sx(x)},{sy(y)}" for x, y in pts]
    parts.append(f'<polygon points="{" ".join(region)}" fill="#dbe8f6" stroke="none"/>')
    if highlight_rect:
        wit = g_rect(S)
        parts.append(
            f'<rect class="g-rect" x="{sx(0)}" y="{sy(wit.Y)}" width="{wit.X * CELL}" '
            f'height="{wit.Y * CELL}" fill="#f6c85f" fill-opacity="0.6" stroke="#c98a00"/>'
        )
    for gx in range(X + 1):
        parts.append(f'<line x1="{sx(gx)}" y1="{sy(0)}" x2="{sx(gx)}" y2="{sy(Y)}" '
                     'stroke="#eee" stroke-width="0.5"/>')
    for gy in range(Y + 1):
        parts.append(f'<line x1="{sx(0)}" y1="{sy(gy)}" x2="{sx(X)}" y2="{sy(gy)}" '
                     'stroke="#eee" stroke-width="0.5"/>')
    path = " ".join(f"{sx(x)},{sy(y)}" for x, y in pts)
    parts.append(f'<polyline class="staircase" points="{path}" fill="none" '
                 'stroke="#1f4e8c" stroke-width="2"/>')
    parts.append(f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(X)}" y2="{sy(0)}" stroke="#333"/>')
    parts.append(f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(0)}" y2="{sy(Y)}" stroke="#333"/>')
    label = f"area {f1(S)}"
    if highlight_rect:
        wit = g_rect(S)
        label += f", rectangle {wit.X}x{wit.Y} = {wit.g}"
    parts.append(f'<text x="{sx(0)}" y="{sy(0) + 16}" font-size="12">{escape(label)}</text>')
    if title:
        parts.append(f'<text x="{sx(0)}" y="{MARGIN - 8}" font-size="12">{escape(title)}</text>')
    return parts, w, h + 2 * MARGIN


def staircase_svg(configs, highlight_rect: bool = False, titles=None) -> str:
    """One SVG document with a panel per configuration, left to right."""
    if isinstance(configs, Configuration):
        configs = [configs]
    configs = list(configs)
    titles = list(titles) if titles is not None else [None] * len(configs)
    body = []
    x = MARGIN
    height = 0
    for S, title in zip(configs, titles):
        parts, w, h = _panel(S, x, highlight_rect, title)
        body.extend(parts)
        x += w + 2 * MARGIN
        height = max(height, h)
    width = x - MARGIN
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">')
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>',
                      *body, "</svg>"]) + "\n"
