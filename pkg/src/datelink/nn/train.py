"""Mini-batch training loop."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ..errors import FormatMismatch
from ..loss import batch_loss_and_grad
from .augment import affine_jitter, random_erase
from .model import Model, backward, forward_cached, predict_batch
from .optim import TrainConfig, lr_schedule, sgd_step

log = logging.getLogger(__name__)

LOG_FIELDS = ("epoch", "lr", "train_loss", "train_seqacc", "val_seqacc")


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    train_seqacc: float
    val_seqacc: float = math.nan


@dataclass
class TrainLog:
    records: list[EpochRecord] = field(default_factory=list)

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LOG_FIELDS)
            for r in self.records:
                w.writerow([
                    r.epoch,
                    f"{r.lr:.10g}",
                    f"{r.train_loss:.10g}",
                    f"{r.train_seqacc:.10g}",
                    "" if math.isnan(r.val_seqacc) else f"{r.val_seqacc:.10g}",
                ])
        return path


def _arrays(data) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(data, "images") and hasattr(data, "targets"):
        return np.asarray(data.images), np.asarray(data.targets)
    images, targets = data
    return np.asarray(images), np.asarray(targets)


def _check_heads(model: Model, data) -> None:
    fmt = getattr(data, "format", None)
    if fmt is not None and model.config.format is not fmt:
        raise FormatMismatch(
            f"dataset is {fmt.value} but the model heads are {[h.name for h in model.heads]}"
        )


def augment_batch(images: np.ndarray, cfg: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    out = np.empty_like(images)
    for i, img in enumerate(images):
        if cfg.affine_jitter:
            img = affine_jitter(img, rng)
        out[i] = random_erase(img, cfg.random_erase_prob, rng)
    return out


def seq_accuracy(tokens: np.ndarray, targets: np.ndarray) -> float:
    if len(targets) == 0:
        return math.nan
    return float(np.mean(np.all(tokens == targets, axis=1)))


def train(
    model: Model,
    dataset,
    cfg: TrainConfig,
    val=None,
    log_path=None,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> tuple[Model, TrainLog]:
    """Train ``model`` in place and return it with the per-epoch log.

    ``dataset`` (and ``val``) is either a corpus ``Dataset`` or an
    ``(images, targets)`` pair with images ``(N, H, W)`` and integer targets
    ``(N, T)``.  Every head uses ``cfg.label_smoothing``.  Shuffling,
    augmentation and dropout draw from generators seeded by ``cfg.seed``.
    """
    _check_heads(model, dataset)
    if val is not None:
        _check_heads(model, val)
    images, targets = _arrays(dataset)
    if targets.ndim != 2 or targets.shape[1] != len(model.heads):
        raise FormatMismatch(f"targets must be (N, {len(model.heads)}), got {targets.shape}")
    specs = [h.with_smoothing(cfg.label_smoothing) for h in model.heads]
    shuffle_seq, aug_seq, drop_seq = np.random.SeedSequence(cfg.seed).spawn(3)
    shuffle_rng = np.random.default_rng(shuffle_seq)
    aug_rng = np.random.default_rng(aug_seq)
    drop_rng = np.random.default_rng(drop_seq)
    dtype = model.config.dtype

    history = TrainLog()
    n = len(images)
    for epoch in range(cfg.epochs):
        lr = lr_schedule(cfg, epoch)
        order = shuffle_rng.permutation(n)
        loss_sum, correct = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb = augment_batch(images[idx].astype(dtype), cfg, aug_rng)
            yb = targets[idx]
            logits, cache = forward_cached(model, xb, train_mode=True, rng=drop_rng)
            losses, dlogits = batch_loss_and_grad(logits, yb, specs)
            grads = backward(model, cache, [g / len(idx) for g in dlogits])
            sgd_step(model, grads, lr, cfg)
            loss_sum += float(losses.sum())
            tokens = np.stack([z.argmax(axis=1) for z in logits], axis=1)
            correct += int(np.all(tokens == yb, axis=1).sum())
        rec = EpochRecord(epoch, lr, loss_sum / max(n, 1), correct / max(n, 1))
        if val is not None:
            vimages, vtargets = _arrays(val)
            rec.val_seqacc = seq_accuracy(predict_batch(model, vimages).tokens, vtargets)
        history.records.append(rec)
        log.info(
            "epoch %d lr %.4g loss %.4f train_seqacc %.4f val_seqacc %.4f",
            epoch, lr, rec.train_loss, rec.train_seqacc, rec.val_seqacc,
        )
        if on_epoch is not None:
            on_epoch(rec)
    if log_path is not None:
        history.write_csv(log_path)
    return model, history


def sample_loss(model: Model, image: np.ndarray, target, smoothing: float = 0.0) -> float:
    """Eval-mode loss of a single sample (used by tests and diagnostics)."""
    specs = [h.with_smoothing(smoothing) for h in model.heads]
    logits, _ = forward_cached(model, image[None], train_mode=False)
    losses, _ = batch_loss_and_grad(logits, np.asarray(target)[None], specs)
    return float(losses[0])


def eval_loss_grad(model: Model, images: np.ndarray, targets: np.ndarray, smoothing: float = 0.0):
    """Mean eval-mode loss over a batch and its parameter gradients."""
    specs = [h.with_smoothing(smoothing) for h in model.heads]
    logits, cache = forward_cached(model, images, train_mode=False)
    losses, dlogits = batch_loss_and_grad(logits, targets, specs)
    grads = backward(model, cache, [g / len(images) for g in dlogits])
    return float(losses.mean()), grads

