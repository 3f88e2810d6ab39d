"""Field recognizers and trainers used by the linking pipeline.

A recognizer has ``predict(images) -> [(text, confidence), ...]``; a
trainer has ``train(pairs, seed) -> recognizer`` where ``pairs`` holds
``(CensusImage, text)`` tuples taken from matched manual records.

Three families ship here:

* ``MockRecognizer`` / ``MockTrainer``: simulation stand-ins whose
  accuracy grows with the training-set size and which memorize the exact
  pairs they were trained on.  Errors are pseudo-random per (model, image).
* ``DateRecognizer`` / ``DateTrainer``: the convolutional date model,
  fine-tuned from a base model.
* ``NameRecognizer`` / ``NameTrainer``: the same network with one A-Z head
  per character slot, for synthetic name fields.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..dates import MISSING, HeadSpec, SequenceFormat, TokenLabel, format_label, is_canonical
from ..nn.model import ConvBlock, Model, ModelConfig, adapt_model, init_model, predict_batch
from ..nn.optim import TrainConfig
from ..nn.train import train as train_model
from .records import FIELDS, CensusImage, comparable_date

_FIELD_CODE = {name: i + 1 for i, name in enumerate(FIELDS)}


def _field_rng(seed: int, fld: str, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, _FIELD_CODE[fld], index])


def corrupt_name(value: str, rng: np.random.Generator) -> str:
    """Replace one character by a different letter, keeping the case of the original."""
    if not value or not any(c.isalpha() for c in value):
        return "X"
    positions = [i for i, c in enumerate(value) if c.isalpha()]
    i = positions[int(rng.integers(len(positions)))]
    pool = [c for c in string.ascii_uppercase if c != value[i].upper()]
    new = pool[int(rng.integers(len(pool)))]
    new = new if value[i].isupper() else new.lower()
    return value[:i] + new + value[i + 1 :]


def corrupt_date(value: str, fmt: SequenceFormat, rng: np.random.Generator) -> str:
    """Change exactly one token of the date to another valid symbol."""
    label = comparable_date(value, fmt)
    if label is None:
        return "1-1" if fmt.year_digits == 0 else "1-1-" + "1" * fmt.year_digits
    heads = fmt.heads()
    for _ in range(50):
        h = int(rng.integers(len(heads)))
        if label.symbols[h] == MISSING:
            continue
        choices = [k for k in range(heads[h].class_count) if k != label.tokens[h] and heads[h].alphabet[k] != MISSING]
        tokens = list(label.tokens)
        tokens[h] = choices[int(rng.integers(len(choices)))]
        cand = TokenLabel(fmt, tuple(tokens))
        if is_canonical(cand):
            return format_label(cand)
    return value


@dataclass
class MockRecognizer:
    """Simulated recognizer for one field.

    An image the model was trained on returns its training text.  Any other
    image is read correctly with probability ``accuracy``, otherwise with a
    one-character (names) or one-token (dates) error.  The draw depends
    only on ``(seed, field, image.index)``, so a model is self-consistent
    across calls while different models err independently.
    """

    field_name: str
    accuracy: float
    seed: int
    memory: dict[str, str] = field(default_factory=dict)
    date_format: SequenceFormat = SequenceFormat.DDMYY

    def predict(self, images: Sequence[CensusImage]) -> list[tuple[str, float]]:
        out = []
        for img in images:
            if img.image_id in self.memory:
                out.append((self.memory[img.image_id], 0.99))
                continue
            truth = img.payload["truth"][self.field_name]
            rng = _field_rng(self.seed, self.field_name, img.index)
            if rng.random() < self.accuracy:
                out.append((truth, float(rng.uniform(0.7, 1.0))))
            elif self.field_name == "date":
                out.append((corrupt_date(truth, self.date_format, rng), float(rng.uniform(0.2, 0.8))))
            else:
                out.append((corrupt_name(truth, rng), float(rng.uniform(0.2, 0.8))))
        return out


@dataclass(frozen=True)
class MockTrainer:
    """Learning curve ``acc(n) = a_max - (a_max - a_0) * exp(-n / scale)``."""

    field_name: str
    base_accuracy: float = 0.85
    max_accuracy: float = 0.97
    scale: float = 1500.0
    seed: int = 0
    date_format: SequenceFormat = SequenceFormat.DDMYY

    def __post_init__(self):
        if not 0 <= self.base_accuracy <= self.max_accuracy <= 1:
            raise ValueError("need 0 <= base_accuracy <= max_accuracy <= 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def accuracy_for(self, n: int) -> float:
        return self.max_accuracy - (self.max_accuracy - self.base_accuracy) * math.exp(-n / self.scale)

    def base(self) -> MockRecognizer:
        return MockRecognizer(self.field_name, self.base_accuracy, self.seed, {}, self.date_format)

    def train(self, pairs: Sequence[tuple[CensusImage, str]], seed: int) -> MockRecognizer:
        memory = {img.image_id: text for img, text in pairs}
        return MockRecognizer(self.field_name, self.accuracy_for(len(pairs)), seed, memory, self.date_format)


def mock_model_set(trainers: dict[str, MockTrainer]) -> dict[str, MockRecognizer]:
    return {name: t.base() for name, t in trainers.items()}


# -- neural date field ------------------------------------------------------------

def _pixels(images: Sequence[CensusImage], key: str) -> np.ndarray:
    return np.stack([img.payload["pixels"][key] for img in images])


@dataclass
class DateRecognizer:
    model: Model
    batch_size: int = 256

    def predict(self, images: Sequence[CensusImage]) -> list[tuple[str, float]]:
        if not images:
            return []
        preds = predict_batch(self.model, _pixels(images, "date"), self.batch_size)
        return [(format_label(lab), float(c)) for lab, c in zip(preds.labels(), preds.confidence)]


@dataclass
class DateTrainer:
    """Fine-tune a copy of ``base`` (re-headed to ``fmt`` if needed) on matched dates."""

    base: Model
    cfg: TrainConfig
    fmt: SequenceFormat | None = None

    def start_model(self) -> Model:
        fmt = self.fmt or self.base.config.format
        if fmt is self.base.config.format:
            return self.base.copy()
        target = replace(self.base.config, heads=fmt.heads())
        return adapt_model(self.base, target)

    def train(self, pairs: Sequence[tuple[CensusImage, str]], seed: int) -> DateRecognizer:
        model = self.start_model()
        fmt = model.config.format
        keep = [(img, comparable_date(text, fmt)) for img, text in pairs]
        keep = [(img, lab) for img, lab in keep if lab is not None]
        if keep:
            x = _pixels([img for img, _ in keep], "date")
            y = np.array([lab.tokens for _, lab in keep], dtype=np.int64)
            train_model(model, (x, y), replace(self.cfg, seed=int(seed)))
        return DateRecognizer(model)


# -- synthetic-glyph name field ----------------------------------------------------

NAME_LETTERS = tuple(string.ascii_uppercase)


def name_heads(max_len: int = 8) -> tuple[HeadSpec, ...]:
    return tuple(HeadSpec(f"Char{i + 1}", NAME_LETTERS + (MISSING,)) for i in range(max_len))


def name_config(max_len: int = 8, size: tuple[int, int] = (32, 128), seed: int = 0) -> ModelConfig:
    return ModelConfig(
        heads=name_heads(max_len),
        input_height=size[0],
        input_width=size[1],
        conv_blocks=(ConvBlock(16), ConvBlock(32), ConvBlock(64)),
        seed=seed,
    )


def encode_name(text: str, max_len: int) -> tuple[int, ...] | None:
    """Left-aligned letter indices padded with MISSING; ``None`` if not representable."""
    t = text.strip().upper()
    if not t:
        return tuple([len(NAME_LETTERS)] * max_len)
    if len(t) > max_len or any(c not in NAME_LETTERS for c in t):
        return None
    return tuple(NAME_LETTERS.index(c) for c in t) + (len(NAME_LETTERS),) * (max_len - len(t))


def decode_name(tokens: Sequence[int]) -> str:
    out = []
    for t in tokens:
        if t >= len(NAME_LETTERS):
            break
        out.append(NAME_LETTERS[t])
    return "".join(out)


@dataclass
class NameRecognizer:
    model: Model
    field_name: str = "first_name"

    def predict(self, images: Sequence[CensusImage]) -> list[tuple[str, float]]:
        if not images:
            return []
        preds = predict_batch(self.model, _pixels(images, self.field_name))
        return [(decode_name(tok), float(c)) for tok, c in zip(preds.tokens, preds.confidence)]


@dataclass
class NameTrainer:
    base: Model
    cfg: TrainConfig
    field_name: str = "first_name"

    def train(self, pairs: Sequence[tuple[CensusImage, str]], seed: int) -> NameRecognizer:
        model = self.base.copy()
        max_len = len(model.heads)
        keep = [(img, encode_name(text, max_len)) for img, text in pairs]
        keep = [(img, tok) for img, tok in keep if tok is not None]
        if keep:
            x = _pixels([img for img, _ in keep], self.field_name)
            y = np.array([tok for _, tok in keep], dtype=np.int64)
            train_model(model, (x, y), replace(self.cfg, seed=int(seed)))
        return NameRecognizer(model, self.field_name)


def fresh_name_model(max_len: int = 8, size: tuple[int, int] = (32, 128), seed: int = 0) -> Model:
    return init_model(name_config(max_len, size, seed))
