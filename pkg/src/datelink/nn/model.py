"""A small multi-head convolutional classifier with hand-written backprop.

Layout (NHWC throughout)::

    image (H, W) in [0, 1], paper bright / ink dark
      -> ink = 1 - image
      -> [conv 3x3 (padding 1, stride s) -> ReLU] x len(conv_blocks)
      -> flatten (or global average pool)
      -> dense(feature_dim) -> ReLU -> dropout
      -> one linear classifier per head
"""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..dates import HeadSpec, SequenceFormat, TokenLabel
from ..errors import ConfigMismatch, ShapeMismatch
from ..loss import softmax

KERNEL = 3


@dataclass(frozen=True)
class ConvBlock:
    filters: int
    stride: int = 2


DEFAULT_BLOCKS = (ConvBlock(16), ConvBlock(32), ConvBlock(64), ConvBlock(64))


@dataclass(frozen=True)
class ModelConfig:
    heads: tuple[HeadSpec, ...]
    input_height: int = 64
    input_width: int = 160
    channels: int = 1
    conv_blocks: tuple[ConvBlock, ...] = DEFAULT_BLOCKS
    feature_dim: int = 128
    pooling: str = "flatten"
    dropout_prob: float = 0.4
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, ConvBlock) else ConvBlock(*b) for b in self.conv_blocks)
        object.__setattr__(self, "conv_blocks", blocks)
        object.__setattr__(self, "heads", tuple(self.heads))
        if not blocks:
            raise ValueError("a model needs at least one conv block")
        if any(b.filters < 1 or b.stride < 1 for b in blocks):
            raise ValueError("conv blocks need positive filters and stride")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise ValueError("dropout_prob must be in [0, 1)")
        if not self.heads:
            raise ValueError("a model needs at least one head")
        if self.channels != 1:
            raise ValueError("only grayscale (channels=1) input is supported")
        if self.pooling not in ("flatten", "gap"):
            raise ValueError("pooling must be 'flatten' or 'gap'")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")
        if self.input_height < 1 or self.input_width < 1 or self.feature_dim < 1:
            raise ValueError("input sizes and feature_dim must be positive")

    @classmethod
    def for_format(cls, fmt, smoothing: float = 0.0, **kwargs) -> "ModelConfig":
        return cls(heads=SequenceFormat.parse(fmt).heads(smoothing), **kwargs)

    @property
    def format(self) -> SequenceFormat | None:
        return SequenceFormat.from_heads(self.heads)

    def feature_map_shapes(self) -> list[tuple[int, int, int]]:
        shapes = []
        h, w = self.input_height, self.input_width
        for b in self.conv_blocks:
            h = (h + 2 - KERNEL) // b.stride + 1
            w = (w + 2 - KERNEL) // b.stride + 1
            shapes.append((h, w, b.filters))
        return shapes

    @property
    def pooled_dim(self) -> int:
        h, w, c = self.feature_map_shapes()[-1]
        return c if self.pooling == "gap" else h * w * c

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter shapes in declaration (and checkpoint) order."""
        shapes: dict[str, tuple[int, ...]] = {}
        cin = self.channels
        for i, b in enumerate(self.conv_blocks):
            shapes[f"conv{i}.w"] = (KERNEL, KERNEL, cin, b.filters)
            shapes[f"conv{i}.b"] = (b.filters,)
            cin = b.filters
        shapes["fc.w"] = (self.pooled_dim, self.feature_dim)
        shapes["fc.b"] = (self.feature_dim,)
        for h in self.heads:
            shapes[f"head.{h.name}.w"] = (self.feature_dim, h.class_count)
            shapes[f"head.{h.name}.b"] = (h.class_count,)
        return shapes

    def to_dict(self) -> dict:
        d = asdict(self)
        d["heads"] = [
            {"name": h.name, "alphabet": list(h.alphabet), "smoothing_alpha": h.smoothing_alpha}
            for h in self.heads
        ]
        d["conv_blocks"] = [[b.filters, b.stride] for b in self.conv_blocks]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["heads"] = tuple(
            HeadSpec(h["name"], tuple(h["alphabet"]), h.get("smoothing_alpha", 0.0))
            for h in d["heads"]
        )
        d["conv_blocks"] = tuple(ConvBlock(*b) for b in d.get("conv_blocks", DEFAULT_BLOCKS))
        return cls(**d)


class Model:
    """Weights plus optimizer state for one :class:`ModelConfig`."""

    def __init__(self, config: ModelConfig, params: dict[str, np.ndarray], rng=None):
        expected = config.param_shapes()
        if list(params) != list(expected):
            raise ConfigMismatch("parameter names do not match the config")
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ConfigMismatch(f"{name} has shape {params[name].shape}, expected {shape}")
        self.config = config
        self.params = {k: np.ascontiguousarray(v, dtype=config.dtype) for k, v in params.items()}
        self.rng = rng if rng is not None else np.random.default_rng(config.seed + 1)
        self.velocity: dict[str, np.ndarray] = {}

    @property
    def heads(self) -> tuple[HeadSpec, ...]:
        return self.config.heads

    def copy(self) -> "Model":
        m = Model(self.config, {k: v.copy() for k, v in self.params.items()})
        m.rng = copy.deepcopy(self.rng)
        m.velocity = {k: v.copy() for k, v in self.velocity.items()}
        return m

    def num_params(self) -> int:
        return int(sum(v.size for v in self.params.values()))


def init_model(cfg: ModelConfig) -> Model:
    """Fan-in scaled normal weights (He for ReLU layers), zero biases."""
    init_seq, dropout_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    rng = np.random.default_rng(init_seq)
    params = {}
    for name, shape in cfg.param_shapes().items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
            continue
        fan_in = int(np.prod(shape[:-1]))
        gain = 1.0 if name.startswith("head.") else 2.0
        params[name] = rng.standard_normal(shape) * np.sqrt(gain / fan_in)
    return Model(cfg, params, rng=np.random.default_rng(dropout_seq))


def _conv_out(n: int, stride: int) -> int:
    return (n + 2 - KERNEL) // stride + 1


def _im2col(xp: np.ndarray, ho: int, wo: int, s: int) -> np.ndarray:
    n, _, _, c = xp.shape
    cols = np.empty((n, ho, wo, KERNEL, KERNEL, c), dtype=xp.dtype)
    for i in range(KERNEL):
        for j in range(KERNEL):
            cols[:, :, :, i, j, :] = xp[:, i : i + s * (ho - 1) + 1 : s, j : j + s * (wo - 1) + 1 : s, :]
    return cols.reshape(n * ho * wo, KERNEL * KERNEL * c)


def _col2im(dcols: np.ndarray, x_shape, ho: int, wo: int, s: int) -> np.ndarray:
    n, h, w, c = x_shape
    dcols = dcols.reshape(n, ho, wo, KERNEL, KERNEL, c)
    dxp = np.zeros((n, h + 2, w + 2, c), dtype=dcols.dtype)
    for i in range(KERNEL):
        for j in range(KERNEL):
            dxp[:, i : i + s * (ho - 1) + 1 : s, j : j + s * (wo - 1) + 1 : s, :] += dcols[:, :, :, i, j, :]
    return dxp[:, 1:-1, 1:-1, :]


def _as_batch(model: Model, images) -> tuple[np.ndarray, bool]:
    x = np.asarray(images)
    single = x.ndim == 2
    if single:
        x = x[None]
    cfg = model.config
    if x.ndim != 3 or x.shape[1:] != (cfg.input_height, cfg.input_width):
        raise ShapeMismatch(
            f"expected images of shape ({cfg.input_height}, {cfg.input_width}), got {np.shape(images)}"
        )
    return x, single


def forward_cached(model: Model, images: np.ndarray, train_mode: bool = False, rng=None):
    """Batched forward pass returning per-head logits and a backprop cache."""
    cfg, p = model.config, model.params
    x, _ = _as_batch(model, images)
    a = (1.0 - x.astype(cfg.dtype, copy=False))[..., None]
    convs = []
    for i, b in enumerate(cfg.conv_blocks):
        n, h, w, c = a.shape
        ho, wo = _conv_out(h, b.stride), _conv_out(w, b.stride)
        xp = np.pad(a, ((0, 0), (1, 1), (1, 1), (0, 0)))
        cols = _im2col(xp, ho, wo, b.stride)
        z = cols @ p[f"conv{i}.w"].reshape(-1, b.filters) + p[f"conv{i}.b"]
        out = np.maximum(z, 0).reshape(n, ho, wo, b.filters)
        convs.append((cols, a.shape, ho, wo, out))
        a = out
    if cfg.pooling == "gap":
        feats = a.mean(axis=(1, 2))
    else:
        feats = a.reshape(a.shape[0], -1)
    hidden = np.maximum(feats @ p["fc.w"] + p["fc.b"], 0)
    mask = None
    if train_mode and cfg.dropout_prob > 0:
        rng = model.rng if rng is None else rng
        keep = 1.0 - cfg.dropout_prob
        mask = (rng.random(hidden.shape) < keep).astype(cfg.dtype) / keep
        hidden = hidden * mask
    logits = [hidden @ p[f"head.{h.name}.w"] + p[f"head.{h.name}.b"] for h in cfg.heads]
    cache = {"convs": convs, "feats": feats, "hidden": hidden, "mask": mask, "final_shape": a.shape}
    return logits, cache


def forward(model: Model, image, train_mode: bool = False, rng=None) -> list[np.ndarray]:
    """Per-head logits for one ``(H, W)`` image or a ``(B, H, W)`` batch."""
    _, single = _as_batch(model, image)
    logits, _ = forward_cached(model, image, train_mode=train_mode, rng=rng)
    return [z[0] for z in logits] if single else logits


def backward(model: Model, cache: dict, dlogits: Sequence[np.ndarray]) -> dict[str, np.ndarray]:
    """Parameter gradients given gradients of the objective w.r.t. each head's logits."""
    cfg, p = model.config, model.params
    grads: dict[str, np.ndarray] = {}
    hidden = cache["hidden"]
    dhidden = np.zeros_like(hidden)
    head_grads = {}
    for h, dz in zip(cfg.heads, dlogits):
        dz = np.asarray(dz, dtype=cfg.dtype)
        head_grads[f"head.{h.name}.w"] = hidden.T @ dz
        head_grads[f"head.{h.name}.b"] = dz.sum(axis=0)
        dhidden += dz @ p[f"head.{h.name}.w"].T
    if cache["mask"] is not None:
        dhidden *= cache["mask"]
    dhidden *= hidden > 0
    grads["fc.w"] = cache["feats"].T @ dhidden
    grads["fc.b"] = dhidden.sum(axis=0)
    dfeats = dhidden @ p["fc.w"].T

    n, fh, fw, fc = cache["final_shape"]
    if cfg.pooling == "gap":
        da = np.broadcast_to(dfeats[:, None, None, :] / (fh * fw), (n, fh, fw, fc))
    else:
        da = dfeats.reshape(n, fh, fw, fc)
    conv_grads = {}
    for i in reversed(range(len(cfg.conv_blocks))):
        b = cfg.conv_blocks[i]
        cols, in_shape, ho, wo, out = cache["convs"][i]
        dz = (da * (out > 0)).reshape(-1, b.filters)
        conv_grads[f"conv{i}.w"] = (cols.T @ dz).reshape(p[f"conv{i}.w"].shape)
        conv_grads[f"conv{i}.b"] = dz.sum(axis=0)
        if i > 0:
            dcols = dz @ p[f"conv{i}.w"].reshape(-1, b.filters).T
            da = _col2im(dcols, in_shape, ho, wo, b.stride)
    grads.update(conv_grads)
    grads.update(head_grads)
    return {name: grads[name] for name in p}


@dataclass
class Prediction:
    """Softmax output for one image.

    ``argmax`` holds one class index per head; ``confidence`` is the product
    of the per-head maximum probabilities.
    """

    dists: list[np.ndarray]
    argmax: tuple[int, ...]
    confidence: float
    fmt: SequenceFormat | None = None

    @property
    def label(self) -> TokenLabel:
        if self.fmt is None:
            raise ValueError("this model's heads do not form a date format")
        return TokenLabel(self.fmt, self.argmax)


@dataclass
class Predictions:
    """Batched predictions: ``probs[t]`` is ``(N, C_t)``, ``tokens`` is ``(N, T)``."""

    probs: list[np.ndarray]
    tokens: np.ndarray
    confidence: np.ndarray
    fmt: SequenceFormat | None = None

    def __len__(self) -> int:
        return len(self.confidence)

    def __getitem__(self, i: int) -> Prediction:
        return Prediction(
            [p[i] for p in self.probs], tuple(int(t) for t in self.tokens[i]), float(self.confidence[i]), self.fmt
        )

    def labels(self) -> list[TokenLabel]:
        return [TokenLabel(self.fmt, tuple(row)) for row in self.tokens]


def _predictions_from_logits(logits: list[np.ndarray], fmt) -> Predictions:
    probs = [softmax(z.astype(np.float64)) for z in logits]
    tokens = np.stack([p.argmax(axis=1) for p in probs], axis=1)
    confidence = np.prod(np.stack([p.max(axis=1) for p in probs], axis=1), axis=1)
    return Predictions(probs, tokens, confidence, fmt)


def predict_batch(model: Model, images, batch_size: int = 256) -> Predictions:
    """Eval-mode predictions for ``(N, H, W)`` images, in input order."""
    images = np.asarray(images)
    if images.ndim == 2:
        images = images[None]
    chunks = []
    for start in range(0, len(images), batch_size):
        logits, _ = forward_cached(model, images[start : start + batch_size], train_mode=False)
        chunks.append(logits)
    fmt = model.config.format
    if not chunks:
        return Predictions([np.zeros((0, h.class_count)) for h in model.heads],
                           np.zeros((0, len(model.heads)), dtype=int), np.zeros(0), fmt)
    logits = [np.concatenate([c[t] for c in chunks]) for t in range(len(model.heads))]
    return _predictions_from_logits(logits, fmt)


def predict(model: Model, image) -> Prediction:
    x = np.asarray(image)
    if x.ndim != 2:
        raise ShapeMismatch("predict takes a single (H, W) image; use predict_batch for batches")
    return predict_batch(model, x)[0]


def adapt_model(model: Model, cfg: ModelConfig) -> Model:
    """Start a model for ``cfg`` from ``model``'s weights (transfer learning).

    The feature extractor carries over and must have identical shapes.
    Heads present in both (same name) keep their weights and must have the
    same alphabet; new heads are freshly initialised from ``cfg.seed``.
    """
    src = model.config
    if (src.input_height, src.input_width, src.conv_blocks, src.feature_dim, src.pooling) != (
        cfg.input_height, cfg.input_width, cfg.conv_blocks, cfg.feature_dim, cfg.pooling
    ):
        raise ConfigMismatch("feature extractors differ; cannot transfer weights")
    old_heads = {h.name: h for h in src.heads}
    for h in cfg.heads:
        if h.name in old_heads and old_heads[h.name].alphabet != h.alphabet:
            raise ConfigMismatch(f"head {h.name} alphabets differ; cannot transfer")
    fresh = init_model(cfg)
    params = {}
    for name in cfg.param_shapes():
        params[name] = model.params[name].copy() if name in model.params else fresh.params[name]
    return Model(cfg, params, rng=fresh.rng)
