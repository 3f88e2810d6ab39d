"""Label-smoothed multi-head sequence loss.

For heads ``t = 1..T`` with ``C_t`` classes, smoothing ``a_t`` and one-hot
target ``y_t`` the per-head smoothed target is::

    s_t = (1 - a_t) * y_t + a_t / C_t

and the loss is the length-normalised smoothed negative log-likelihood::

    L = (1/T) * sum_t  -sum_j s_tj * log(p_tj)

Its gradient with respect to head logits is ``(p_t - s_t) / T``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dates import HeadSpec, TokenLabel
from .errors import NonFinite, ShapeMismatch, ZeroProbability

PROB_EPS = 1e-12


@dataclass(frozen=True)
class LossValue:
    total: float
    per_head: tuple[float, ...]


def softmax(logits) -> np.ndarray:
    """Softmax over the last axis with max subtraction."""
    z = np.asarray(logits)
    if z.dtype.kind != "f":
        z = z.astype(np.float64)
    if not np.all(np.isfinite(z)):
        raise NonFinite("softmax input contains NaN or Inf")
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def smoothed_target(index: int, spec: HeadSpec) -> np.ndarray:
    s = np.full(spec.class_count, spec.smoothing_alpha / spec.class_count)
    s[index] += 1.0 - spec.smoothing_alpha
    return s


def _tokens(label) -> tuple[int, ...]:
    return label.tokens if isinstance(label, TokenLabel) else tuple(int(t) for t in label)


def _check_shapes(arrays, tokens, specs):
    if not (len(arrays) == len(tokens) == len(specs)):
        raise ShapeMismatch(
            f"{len(arrays)} heads of scores, {len(tokens)} tokens, {len(specs)} head specs"
        )
    for a, spec in zip(arrays, specs):
        if np.shape(a)[-1] != spec.class_count:
            raise ShapeMismatch(
                f"head {spec.name} expects {spec.class_count} classes, got {np.shape(a)[-1]}"
            )


def sequence_loss(
    dists: Sequence, label, specs: Sequence[HeadSpec], strict: bool = False
) -> LossValue:
    """Loss of one sample from per-head probability vectors.

    Probabilities are clamped below at ``PROB_EPS`` before the log.  With
    ``strict=True`` an exact zero that carries target weight raises
    :class:`ZeroProbability` instead.
    """
    tokens = _tokens(label)
    _check_shapes(dists, tokens, specs)
    per_head = []
    for p, tok, spec in zip(dists, tokens, specs):
        p = np.asarray(p, dtype=np.float64)
        if not np.all(np.isfinite(p)):
            raise NonFinite(f"head {spec.name} has non-finite probabilities")
        s = smoothed_target(tok, spec)
        used = s > 0
        if strict and np.any(p[used] == 0.0):
            raise ZeroProbability(f"head {spec.name} assigns zero probability to a target class")
        per_head.append(float(-np.sum(s[used] * np.log(np.maximum(p[used], PROB_EPS)))))
    return LossValue(total=float(np.mean(per_head)), per_head=tuple(per_head))


def sequence_loss_grad(logits: Sequence, label, specs: Sequence[HeadSpec]) -> list[np.ndarray]:
    """Gradient of :func:`sequence_loss` (on ``softmax(logits)``) w.r.t. the logits."""
    tokens = _tokens(label)
    _check_shapes(logits, tokens, specs)
    T = len(specs)
    return [
        (softmax(np.asarray(z, dtype=np.float64)) - smoothed_target(tok, spec)) / T
        for z, tok, spec in zip(logits, tokens, specs)
    ]


def batch_loss_and_grad(
    logits: Sequence[np.ndarray], targets: np.ndarray, specs: Sequence[HeadSpec]
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Vectorised loss and logit gradients for a batch.

    ``logits[t]`` has shape ``(B, C_t)`` and ``targets`` shape ``(B, T)``.
    Returns the per-sample losses ``(B,)`` and, per head, the gradient of
    each sample's own loss (callers average over the batch themselves).
    """
    targets = np.asarray(targets)
    B = targets.shape[0]
    _check_shapes(logits, range(targets.shape[1]), specs)
    T = len(specs)
    losses = np.zeros(B, dtype=np.float64)
    grads = []
    rows = np.arange(B)
    for t, (z, spec) in enumerate(zip(logits, specs)):
        if not np.all(np.isfinite(z)):
            raise NonFinite(f"head {spec.name} logits are not finite")
        logp = log_softmax(z)
        a, C = spec.smoothing_alpha, spec.class_count
        s = np.full(z.shape, a / C, dtype=z.dtype)
        s[rows, targets[:, t]] += 1.0 - a
        losses += -np.sum(s * logp, axis=1) / T
        grads.append((np.exp(logp) - s) / T)
    return losses, grads
