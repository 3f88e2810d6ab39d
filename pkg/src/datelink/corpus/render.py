"""Synthetic handwritten-date images.

Glyph strokes are drawn at twice the output resolution with a smooth
per-glyph wobble, a shared slant and random thickness, rotated,
box-downsampled and then degraded with fading, paper texture, blots and
sensor noise.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from PIL import Image, ImageDraw
from scipy import ndimage

from ..dates import MISSING, WILDCARD, TokenLabel
from .glyphs import GLYPHS, advance

SUPERSAMPLE = 2
DEFAULT_SIZE = (64, 160)

MONTH_NAMES = {
    1: ("JANUARY", "JAN"), 2: ("FEBRUARY", "FEB"), 3: ("MARCH", "MAR"), 4: ("APRIL", "APR"),
    5: ("MAY", "MAY"), 6: ("JUNE", "JUN"), 7: ("JULY", "JUL"), 8: ("AUGUST", "AUG"),
    9: ("SEPTEMBER", "SEP"), 10: ("OCTOBER", "OCT"), 11: ("NOVEMBER", "NOV"), 12: ("DECEMBER", "DEC"),
}

LAYOUTS = ("day-month-year", "year-day-month")
MONTH_RENDERINGS = ("numeric", "text")
SEPARATORS = ("-", ".", "/", " ")
# Share of the free horizontal space over which the text start may vary.
PLACEMENT_SPREAD = 0.35


@dataclass(frozen=True)
class StyleParams:
    """Handwriting and degradation parameters.

    Lengths are in output pixels.  ``fade_level`` is the largest fraction
    by which ink contrast may drop; ``noise_level`` is the standard
    deviation of additive pixel noise.
    """

    glyph_jitter: float = 1.2
    stroke_thickness: tuple[float, float] = (1.2, 2.6)
    rotation_range: float = 4.0
    noise_level: float = 0.05
    fade_level: float = 0.4
    blot_prob: float = 0.15
    layout: str = "day-month-year"
    month_rendering: str = "numeric"

    def __post_init__(self):
        object.__setattr__(self, "stroke_thickness", tuple(float(t) for t in self.stroke_thickness))
        lo, hi = self.stroke_thickness
        checks = [
            (0 <= self.glyph_jitter <= 5, "glyph_jitter must be in [0, 5]"),
            (0 < lo <= hi <= 8, "stroke_thickness must satisfy 0 < lo <= hi <= 8"),
            (0 <= self.rotation_range <= 30, "rotation_range must be in [0, 30]"),
            (0 <= self.noise_level <= 0.5, "noise_level must be in [0, 0.5]"),
            (0 <= self.fade_level < 1, "fade_level must be in [0, 1)"),
            (0 <= self.blot_prob <= 1, "blot_prob must be in [0, 1]"),
            (self.layout in LAYOUTS, f"layout must be one of {LAYOUTS}"),
            (self.month_rendering in MONTH_RENDERINGS, f"month_rendering must be one of {MONTH_RENDERINGS}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stroke_thickness"] = list(self.stroke_thickness)
        return d


def _groups(label: TokenLabel, style: StyleParams, rng: np.random.Generator) -> list[str]:
    syms = label.symbols
    day = "".join(s for s in syms[:2] if s != MISSING)
    month = syms[2]
    if month == MISSING:
        month_text = ""
    elif month == WILDCARD:
        month_text = '"' if rng.random() < 0.5 else "="
    elif style.month_rendering == "text":
        month_text = MONTH_NAMES[int(month)][int(rng.integers(2))]
    else:
        month_text = month
    year = "".join(s for s in syms[3:] if s != MISSING)
    if style.layout == "year-day-month":
        parts = [year, day, month_text]
    else:
        parts = [day, month_text, year]
    return [p for p in parts if p]


def _layout(groups, H, W, rng):
    """Glyph placements ``(char, x0, top, height, width_scale)`` in output pixels."""
    sep = SEPARATORS[int(rng.integers(len(SEPARATORS)))]
    chars: list[tuple[str, float]] = []
    for gi, g in enumerate(groups):
        if gi:
            chars.append((sep, 0.55))
        chars.extend((c, 1.0) for c in g)
    height = rng.uniform(0.42, 0.68) * H
    aspect = rng.uniform(0.8, 1.15)
    gap = rng.uniform(0.12, 0.3)

    def total(h):
        return sum(advance(c) * h * aspect * s + gap * h for c, s in chars) - gap * h

    slant = rng.uniform(-0.25, 0.3)
    limit = 0.92 * W / (1.0 + abs(slant) * 0.4)
    if total(height) > limit:
        height *= limit / total(height)
    span = total(height)
    lo = 0.03 * W + max(0.0, -slant) * height
    hi = W - span - 0.03 * W - max(0.0, slant) * height
    x = lo + rng.uniform(0.0, PLACEMENT_SPREAD) * max(0.0, hi - lo)
    top = rng.uniform(0.08 * H, max(0.08 * H, H - height - 0.12 * H))
    placed = []
    for c, s in chars:
        scale = rng.uniform(0.9, 1.08)
        gh = height * scale
        dy = rng.normal(0, 0.04 * height)
        if c in "-=\"./":
            gh = height
        placed.append((c, x, top + dy + (height - gh), gh, aspect * s))
        x += advance(c) * height * aspect * s + gap * height
    return placed, slant


def _smooth_offsets(n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Low-frequency 2-D displacement along a polyline of ``n`` points."""
    anchors = max(2, min(n, 4))
    knots = rng.normal(0, sigma, size=(anchors, 2))
    t = np.linspace(0, anchors - 1, n)
    return np.stack([np.interp(t, np.arange(anchors), knots[:, k]) for k in range(2)], axis=1)


def _draw_strokes(placed, slant, style, H, W, rng) -> np.ndarray:
    S = SUPERSAMPLE
    canvas = Image.new("L", (W * S, H * S), 0)
    draw = ImageDraw.Draw(canvas)
    thickness = rng.uniform(*style.stroke_thickness)
    for c, x0, top, gh, wscale in placed:
        glyph_slant = slant + rng.normal(0, 0.05)
        for stroke in GLYPHS[c]:
            pts = []
            offsets = _smooth_offsets(len(stroke), style.glyph_jitter, rng)
            for (u, v), (ox, oy) in zip(stroke, offsets):
                px = x0 + u * gh * wscale + glyph_slant * (1.0 - v) * gh + ox
                py = top + v * gh + oy
                pts.append((px * S, py * S))
            w = max(1, int(round(thickness * S * rng.uniform(0.85, 1.15))))
            if len(pts) > 1:
                draw.line(pts, fill=255, width=w, joint="curve")
            r = w / 2.0
            for px, py in (pts[0], pts[-1]):
                draw.ellipse((px - r, py - r, px + r, py + r), fill=255)
    angle = rng.uniform(-style.rotation_range, style.rotation_range)
    if angle:
        canvas = canvas.rotate(angle, resample=Image.BILINEAR, fillcolor=0)
    small = canvas.resize((W, H), resample=Image.BOX)
    return np.asarray(small, dtype=np.float32) / 255.0


def _degrade(mask: np.ndarray, style: StyleParams, rng: np.random.Generator) -> np.ndarray:
    H, W = mask.shape
    paper = rng.uniform(0.8, 0.98)
    texture = ndimage.gaussian_filter(rng.standard_normal((H, W)), sigma=rng.uniform(3, 8))
    texture *= 0.04 / max(float(texture.std()), 1e-6)
    ink = rng.uniform(0.55, 0.9) * (1.0 - style.fade_level * rng.random())
    # uneven ink pressure along the line
    pressure = 1.0 - 0.35 * style.fade_level * ndimage.gaussian_filter(rng.random((H, W)), sigma=6)
    img = paper + texture - ink * mask * pressure
    if rng.random() < style.blot_prob:
        yy, xx = np.mgrid[0:H, 0:W]
        for _ in range(int(rng.integers(1, 3))):
            cy, cx = rng.uniform(0, H), rng.uniform(0, W)
            ry, rx = rng.uniform(2, 7), rng.uniform(2, 10)
            blob = np.exp(-(((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2))
            img -= rng.uniform(0.1, 0.35) * blob
    img += rng.normal(0, style.noise_level, size=(H, W))
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def render_date(
    label: TokenLabel,
    style: StyleParams | None = None,
    seed=0,
    size: tuple[int, int] = DEFAULT_SIZE,
    return_mask: bool = False,
):
    """Render ``label`` as a grayscale image in [0, 1] (paper bright, ink dark).

    Deterministic in ``(label, style, seed, size)``.  An all-missing label
    yields paper, texture and noise only.  With ``return_mask=True`` the
    glyph ink mask (before degradation) is returned as well.
    """
    style = style or StyleParams()
    rng = np.random.default_rng(seed)
    H, W = size
    groups = _groups(label, style, rng)
    if groups:
        placed, slant = _layout(groups, H, W, rng)
        mask = _draw_strokes(placed, slant, style, H, W, rng)
    else:
        mask = np.zeros((H, W), dtype=np.float32)
    image = _degrade(mask, style, rng)
    return (image, mask) if return_mask else image


def render_text(text: str, style: StyleParams | None = None, seed=0,
                size: tuple[int, int] = (32, 128), return_mask: bool = False):
    """Render an arbitrary upper-case string (used for synthetic name fields)."""
    style = style or StyleParams()
    rng = np.random.default_rng(seed)
    H, W = size
    words = [w for w in text.split(" ") if w]
    if words:
        placed = _layout_words(words, H, W, rng)
        mask = _draw_strokes(placed, rng.uniform(-0.2, 0.25), style, H, W, rng)
    else:
        mask = np.zeros((H, W), dtype=np.float32)
    image = _degrade(mask, style, rng)
    return (image, mask) if return_mask else image


def _layout_words(words, H, W, rng):
    text = " ".join(words)
    height = rng.uniform(0.5, 0.72) * H
    aspect = rng.uniform(0.8, 1.1)
    gap = rng.uniform(0.1, 0.22)

    def total(h):
        return sum(advance(c) * h * aspect + gap * h for c in text) - gap * h

    limit = 0.94 * W
    if total(height) > limit:
        height *= limit / total(height)
    x = rng.uniform(0.02 * W, max(0.02 * W, W - total(height) - 0.02 * W))
    top = rng.uniform(0.08 * H, max(0.08 * H, H - height - 0.1 * H))
    placed = []
    for c in text:
        placed.append((c, x, top + rng.normal(0, 0.03 * height), height, aspect))
        x += advance(c) * height * aspect + gap * height
    return placed


def render_mosaic(images, columns: int = 4) -> np.ndarray:
    """Tile equally sized images into one array (for eyeballing samples)."""
    images = list(images)
    H, W = images[0].shape
    rows = math.ceil(len(images) / columns)
    out = np.ones((rows * (H + 2), columns * (W + 2)), dtype=np.float32)
    for k, img in enumerate(images):
        r, c = divmod(k, columns)
        out[r * (H + 2) : r * (H + 2) + H, c * (W + 2) : c * (W + 2) + W] = img
    return out
