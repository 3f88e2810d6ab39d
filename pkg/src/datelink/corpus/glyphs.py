"""Single-stroke glyph outlines for synthetic handwriting.

Each glyph is a list of polylines in a box of height 1 (y grows downwards)
plus an advance width.  Curves are sampled arcs.
"""
from __future__ import annotations

import math

Stroke = list[tuple[float, float]]


def arc(cx, cy, rx, ry, a0, a1, n=None) -> Stroke:
    """Points on an ellipse from angle ``a0`` to ``a1`` (degrees, counter-clockwise on screen)."""
    if n is None:
        n = max(4, int(abs(a1 - a0) / 12))
    pts = []
    for k in range(n + 1):
        a = math.radians(a0 + (a1 - a0) * k / n)
        pts.append((cx + rx * math.cos(a), cy - ry * math.sin(a)))
    return pts


def _ellipse(cx, cy, rx, ry) -> Stroke:
    return arc(cx, cy, rx, ry, 90, 450, 30)


GLYPHS: dict[str, list[Stroke]] = {
    "0": [_ellipse(0.3, 0.5, 0.28, 0.48)],
    "1": [[(0.12, 0.22), (0.34, 0.0), (0.34, 1.0)]],
    "2": [arc(0.3, 0.28, 0.27, 0.27, 160, -40) + [(0.02, 1.0), (0.62, 1.0)]],
    "3": [arc(0.28, 0.26, 0.26, 0.24, 150, -90) + arc(0.28, 0.74, 0.3, 0.26, 90, -150)],
    "4": [[(0.46, 1.0), (0.46, 0.0), (0.0, 0.66), (0.62, 0.66)]],
    "5": [[(0.56, 0.0), (0.1, 0.0), (0.05, 0.45)] + arc(0.3, 0.68, 0.28, 0.3, 125, -150)],
    "6": [arc(0.58, 0.72, 0.52, 0.72, 100, 180) + arc(0.33, 0.72, 0.27, 0.27, 180, 540, 28)],
    "7": [[(0.0, 0.0), (0.62, 0.0), (0.2, 1.0)]],
    "8": [_ellipse(0.3, 0.25, 0.22, 0.24), _ellipse(0.3, 0.73, 0.28, 0.27)],
    "9": [_ellipse(0.3, 0.28, 0.26, 0.27), [(0.56, 0.3), (0.48, 1.0)]],
    "-": [[(0.05, 0.55), (0.4, 0.55)]],
    ".": [[(0.1, 0.94), (0.16, 1.0)]],
    "/": [[(0.45, 0.0), (0.0, 1.0)]],
    "=": [[(0.0, 0.4), (0.45, 0.4)], [(0.0, 0.65), (0.45, 0.65)]],
    '"': [[(0.05, 0.0), (0.02, 0.3)], [(0.25, 0.0), (0.22, 0.3)]],
    " ": [],
    "A": [[(0.0, 1.0), (0.3, 0.0), (0.6, 1.0)], [(0.12, 0.62), (0.48, 0.62)]],
    "B": [
        [(0.0, 0.5), (0.0, 0.0), (0.3, 0.0)] + arc(0.3, 0.25, 0.22, 0.25, 90, -90) + [(0.0, 0.5)],
        [(0.0, 0.5), (0.0, 1.0), (0.33, 1.0)] + arc(0.33, 0.75, 0.25, 0.25, -90, 90) + [(0.0, 0.5)],
    ],
    "C": [arc(0.36, 0.5, 0.36, 0.5, 45, 315)],
    "D": [[(0.0, 0.0), (0.0, 1.0), (0.22, 1.0)] + arc(0.22, 0.5, 0.36, 0.5, -90, 90) + [(0.0, 0.0)]],
    "E": [[(0.55, 0.0), (0.0, 0.0), (0.0, 1.0), (0.55, 1.0)], [(0.0, 0.5), (0.45, 0.5)]],
    "F": [[(0.55, 0.0), (0.0, 0.0), (0.0, 1.0)], [(0.0, 0.5), (0.45, 0.5)]],
    "G": [arc(0.36, 0.5, 0.36, 0.5, 45, 360) + [(0.4, 0.5)]],
    "H": [[(0.0, 0.0), (0.0, 1.0)], [(0.58, 0.0), (0.58, 1.0)], [(0.0, 0.5), (0.58, 0.5)]],
    "I": [[(0.08, 0.0), (0.08, 1.0)]],
    "J": [[(0.5, 0.0), (0.5, 0.72)] + arc(0.27, 0.72, 0.23, 0.28, 0, -180)],
    "K": [[(0.0, 0.0), (0.0, 1.0)], [(0.55, 0.0), (0.0, 0.58)], [(0.16, 0.44), (0.6, 1.0)]],
    "L": [[(0.0, 0.0), (0.0, 1.0), (0.5, 1.0)]],
    "M": [[(0.0, 1.0), (0.05, 0.0), (0.36, 0.62), (0.67, 0.0), (0.72, 1.0)]],
    "N": [[(0.0, 1.0), (0.0, 0.0), (0.58, 1.0), (0.58, 0.0)]],
    "O": [_ellipse(0.36, 0.5, 0.36, 0.5)],
    "P": [[(0.0, 1.0), (0.0, 0.0), (0.3, 0.0)] + arc(0.3, 0.27, 0.25, 0.27, 90, -90) + [(0.0, 0.54)]],
    "Q": [_ellipse(0.36, 0.5, 0.36, 0.5), [(0.42, 0.7), (0.76, 1.04)]],
    "R": [
        [(0.0, 1.0), (0.0, 0.0), (0.3, 0.0)] + arc(0.3, 0.27, 0.25, 0.27, 90, -90) + [(0.0, 0.54)],
        [(0.22, 0.54), (0.6, 1.0)],
    ],
    "S": [arc(0.3, 0.25, 0.27, 0.25, 30, 270) + arc(0.3, 0.75, 0.3, 0.25, 90, -150)],
    "T": [[(0.0, 0.0), (0.62, 0.0)], [(0.31, 0.0), (0.31, 1.0)]],
    "U": [[(0.0, 0.0), (0.0, 0.68)] + arc(0.3, 0.68, 0.3, 0.32, 180, 360) + [(0.6, 0.0)]],
    "V": [[(0.0, 0.0), (0.3, 1.0), (0.6, 0.0)]],
    "W": [[(0.0, 0.0), (0.2, 1.0), (0.4, 0.3), (0.6, 1.0), (0.8, 0.0)]],
    "X": [[(0.0, 0.0), (0.6, 1.0)], [(0.6, 0.0), (0.0, 1.0)]],
    "Y": [[(0.0, 0.0), (0.3, 0.5), (0.6, 0.0)], [(0.3, 0.5), (0.3, 1.0)]],
    "Z": [[(0.0, 0.0), (0.6, 0.0), (0.0, 1.0), (0.6, 1.0)]],
}

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"

_SPACE_WIDTH = 0.45


def advance(ch: str) -> float:
    """Horizontal advance of a glyph (excluding inter-glyph spacing)."""
    strokes = GLYPHS[ch]
    if not strokes:
        return _SPACE_WIDTH
    return max(x for s in strokes for x, _ in s)


def supported(text: str) -> bool:
    return all(ch in GLYPHS for ch in text)
