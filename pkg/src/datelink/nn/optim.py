"""SGD with momentum, cosine-with-warmup schedule and gradient clipping."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..dates import SequenceFormat
from ..errors import NonFinite
from .model import Model

CLIP_MODES = ("norm", "agc")
AGC_EPS = 1e-3
# Desk-scale epoch counts on 10k images: about 19 CPU-s per epoch on one core, so
# DDM fits its 20 CPU-min budget and the year formats their 40 CPU-min budget.
DESK_EPOCHS = {SequenceFormat.DDM: 50, SequenceFormat.DDMYY: 100, SequenceFormat.DDMYYYY: 100}


@dataclass(frozen=True)
class TrainConfig:
    """Training recipe.  Defaults are the full-scale recipe (250 epochs of
    batch 256); :meth:`desk` gives a schedule that finishes on one CPU core."""

    batch_size: int = 256
    lr_max: float = 0.6
    momentum: float = 0.9
    epochs: int = 250
    warmup_epochs: int = 10
    grad_clip_value: float = 0.02
    clip_mode: str = "norm"
    weight_decay: float = 7e-6
    label_smoothing: float = 0.1
    random_erase_prob: float = 0.4
    affine_jitter: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if not 0 <= self.warmup_epochs < self.epochs:
            raise ValueError("warmup_epochs must be in [0, epochs)")
        for name in ("lr_max", "momentum", "grad_clip_value", "weight_decay", "random_erase_prob"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.clip_mode not in CLIP_MODES:
            raise ValueError(f"clip_mode must be one of {CLIP_MODES}")
        if not 0 <= self.label_smoothing < 1:
            raise ValueError("label_smoothing must be in [0, 1)")
        if self.random_erase_prob > 1:
            raise ValueError("random_erase_prob must be <= 1")

    @classmethod
    def desk(cls, **overrides) -> "TrainConfig":
        """Desk-scale recipe: adaptive clipping and no extra augmentation.

        The renderer already varies every image; erase and jitter on top of it
        slowed convergence more than a 50-epoch budget can absorb.
        """
        base = dict(batch_size=64, lr_max=0.6, epochs=50, warmup_epochs=1, clip_mode="agc",
                    random_erase_prob=0.0, affine_jitter=False)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return asdict(self)


def lr_schedule(cfg: TrainConfig, epoch: int) -> float:
    """Linear warmup to ``lr_max`` then cosine annealing to zero."""
    if not 0 <= epoch < cfg.epochs:
        raise ValueError(f"epoch {epoch} outside [0, {cfg.epochs})")
    W, E = cfg.warmup_epochs, cfg.epochs
    if epoch < W:
        return cfg.lr_max * (epoch + 1) / W
    return cfg.lr_max * 0.5 * (1.0 + math.cos(math.pi * (epoch - W) / (E - W)))


def clip_by_norm(g: np.ndarray, max_norm: float) -> np.ndarray:
    if max_norm <= 0:
        return g
    norm = float(np.sqrt(np.sum(np.square(g, dtype=np.float64))))
    if norm > max_norm:
        return g * (max_norm / norm)
    return g


def _unit_norms(x: np.ndarray) -> np.ndarray:
    """L2 norm per output unit (last axis); a vector is one unit."""
    x64 = x.astype(np.float64, copy=False)
    if x.ndim <= 1:
        return np.sqrt(np.sum(np.square(x64)))
    return np.sqrt(np.sum(np.square(x64), axis=tuple(range(x.ndim - 1)), keepdims=True))


def adaptive_clip(g: np.ndarray, w: np.ndarray, ratio: float, eps: float = AGC_EPS) -> np.ndarray:
    """Unit-wise adaptive clip: scale each unit so ``|g_i| <= ratio * max(|w_i|, eps)``."""
    if ratio <= 0:
        return g
    limit = ratio * np.maximum(_unit_norms(w), eps)
    norm = _unit_norms(g)
    scale = np.where(norm > limit, limit / np.maximum(norm, 1e-300), 1.0)
    return g * scale.astype(g.dtype)


def sgd_step(model: Model, grads: dict[str, np.ndarray], lr: float, cfg: TrainConfig) -> Model:
    """One in-place update: gradient clip, then momentum with weight decay.

    ``v <- momentum * v + clip(g) + weight_decay * w``;  ``w <- w - lr * v``.
    With ``clip_mode="norm"`` each tensor's norm is capped at
    ``grad_clip_value``; with ``"agc"`` each output unit's gradient norm is
    capped at ``grad_clip_value`` times that unit's weight norm.
    """
    for name, w in model.params.items():
        g = grads[name]
        if g.shape != w.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, expected {w.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFinite(f"gradient for {name} is not finite")
        if cfg.clip_mode == "agc":
            g = adaptive_clip(g, w, cfg.grad_clip_value)
        else:
            g = clip_by_norm(g, cfg.grad_clip_value)
        g = g.astype(w.dtype, copy=False)
        v = model.velocity.get(name)
        step = g + cfg.weight_decay * w if cfg.weight_decay else g
        v = step if v is None else cfg.momentum * v + step
        model.velocity[name] = v
        w -= lr * v
    return model
