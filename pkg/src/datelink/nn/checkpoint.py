"""Versioned binary checkpoints.

Layout::

    b"DAREv1"                      magic + version
    uint32 LE                      length of the config block
    config block                   UTF-8 JSON of ModelConfig.to_dict()
    float32 LE tensors             in ModelConfig.param_shapes() order
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import BadMagic, CheckpointError, ConfigMismatch, Truncated, VersionMismatch
from .model import Model, ModelConfig

MAGIC_PREFIX = b"DAREv"
VERSION = 1
MAGIC = MAGIC_PREFIX + str(VERSION).encode()


def checkpoint_bytes(model: Model) -> bytes:
    cfg = json.dumps(model.config.to_dict(), sort_keys=True).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", len(cfg)), cfg]
    for name in model.config.param_shapes():
        chunks.append(np.ascontiguousarray(model.params[name], dtype="<f4").tobytes())
    return b"".join(chunks)


def save_checkpoint(model: Model, path) -> Path:
    path = Path(path)
    path.write_bytes(checkpoint_bytes(model))
    return path


def _check_compatible(found: ModelConfig, expected: ModelConfig) -> None:
    problems = []
    if [(h.name, h.alphabet) for h in found.heads] != [(h.name, h.alphabet) for h in expected.heads]:
        problems.append(f"heads {[h.name for h in found.heads]} != {[h.name for h in expected.heads]}")
    if found.param_shapes() != expected.param_shapes():
        problems.append("parameter shapes differ")
    if problems:
        raise ConfigMismatch("checkpoint does not fit the requested config: " + "; ".join(problems))


def load_checkpoint(path, expected: ModelConfig | None = None) -> Model:
    """Read a checkpoint; when ``expected`` is given the architectures must agree."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC):
        raise Truncated("file shorter than the magic header")
    head = data[: len(MAGIC)]
    if not head.startswith(MAGIC_PREFIX):
        raise BadMagic(f"not a datelink checkpoint (magic {head!r})")
    if head != MAGIC:
        raise VersionMismatch(f"checkpoint version {head[len(MAGIC_PREFIX):]!r}, expected {VERSION}")
    pos = len(MAGIC)
    if len(data) < pos + 4:
        raise Truncated("missing config length")
    (n,) = struct.unpack_from("<I", data, pos)
    pos += 4
    if len(data) < pos + n:
        raise Truncated("config block cut short")
    config = ModelConfig.from_dict(json.loads(data[pos : pos + n].decode("utf-8")))
    pos += n
    if expected is not None:
        _check_compatible(config, expected)
    params = {}
    for name, shape in config.param_shapes().items():
        size = int(np.prod(shape)) * 4
        if len(data) < pos + size:
            raise Truncated(f"tensor {name} cut short")
        params[name] = np.frombuffer(data, dtype="<f4", count=size // 4, offset=pos).reshape(shape)
        pos += size
    if pos != len(data):
        raise CheckpointError(f"{len(data) - pos} unexpected trailing bytes")
    cfg = config if config.dtype == "float32" else ModelConfig.from_dict({**config.to_dict(), "dtype": "float32"})
    return Model(cfg, {k: v.astype(np.float32) for k, v in params.items()})
