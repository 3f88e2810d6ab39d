"""Training-time image augmentation: random erase and small affine jitter."""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

ERASE_AREA = (0.02, 0.20)
ERASE_ASPECT = (0.3, 3.3)
MAX_ROTATION_DEG = 3.0
MAX_SHIFT_FRAC = 0.05


def random_erase(image: np.ndarray, prob: float, rng: np.random.Generator) -> np.ndarray:
    """With probability ``prob`` overwrite one rectangle with uniform noise.

    The rectangle covers 2-20% of the image with aspect ratio in [0.3, 3.3].
    Returns a new array; the input is never modified.
    """
    out = np.array(image, copy=True)
    if prob <= 0 or rng.random() >= prob:
        return out
    H, W = out.shape
    for _ in range(20):
        area = rng.uniform(*ERASE_AREA) * H * W
        log_r = rng.uniform(math.log(ERASE_ASPECT[0]), math.log(ERASE_ASPECT[1]))
        aspect = math.exp(log_r)
        h = int(round(math.sqrt(area * aspect)))
        w = int(round(math.sqrt(area / aspect)))
        if 0 < h <= H and 0 < w <= W:
            top = int(rng.integers(0, H - h + 1))
            left = int(rng.integers(0, W - w + 1))
            out[top : top + h, left : left + w] = rng.random((h, w))
            return out
    return out


def affine_jitter(image: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Rotate by up to +-3 degrees and shift by up to 5% of each side."""
    H, W = image.shape
    angle = math.radians(rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG))
    shift = np.array([rng.uniform(-1, 1) * MAX_SHIFT_FRAC * H, rng.uniform(-1, 1) * MAX_SHIFT_FRAC * W])
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    centre = np.array([(H - 1) / 2, (W - 1) / 2])
    offset = centre - rot @ (centre + shift)
    out = ndimage.affine_transform(image, rot, offset=offset, order=1, mode="nearest")
    return np.clip(out, 0.0, 1.0).astype(image.dtype, copy=False)
