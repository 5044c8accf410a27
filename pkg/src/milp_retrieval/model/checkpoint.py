"""Model checkpoint files.

Layout: the 8-byte magic ``MILPEMB1``, a little-endian uint32 length and
that many bytes of UTF-8 JSON holding the config, then every tensor of
``param_shapes(cfg)`` in order as little-endian float64, followed by the
SHA-256 of everything before it.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CorruptCheckpoint
from .config import ModelConfig
from .params import ModelParams, param_shapes

MAGIC = b"MILPEMB1"


def checkpoint_bytes(params: ModelParams) -> bytes:
    header = json.dumps(params.cfg.to_dict(), sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", len(header)), header]
    for name, shape in param_shapes(params.cfg):
        t = params.tensors[name]
        if t.shape != shape:
            raise CorruptCheckpoint(f"tensor {name} has shape {t.shape}, expected {shape}")
        parts.append(np.ascontiguousarray(t, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def save_checkpoint(params: ModelParams, path: str | Path) -> str:
    data = checkpoint_bytes(params)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def load_checkpoint(path: str | Path) -> ModelParams:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CorruptCheckpoint(f"cannot read checkpoint {path}: {exc}") from None
    return checkpoint_from_bytes(data)


def checkpoint_from_bytes(data: bytes) -> ModelParams:
    if len(data) < len(MAGIC) + 4 + 32 or data[: len(MAGIC)] != MAGIC:
        raise CorruptCheckpoint("not a model checkpoint (bad magic)")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptCheckpoint("checkpoint checksum mismatch")
    (hlen,) = struct.unpack_from("<I", body, len(MAGIC))
    pos = len(MAGIC) + 4
    try:
        cfg = ModelConfig.from_dict(json.loads(body[pos : pos + hlen].decode("utf-8")))
    except (ValueError, TypeError) as exc:
        raise CorruptCheckpoint(f"bad config block: {exc}") from None
    pos += hlen
    tensors = {}
    for name, shape in param_shapes(cfg):
        size = int(np.prod(shape))
        end = pos + 8 * size
        if end > len(body):
            raise CorruptCheckpoint(f"checkpoint truncated at tensor {name}")
        tensors[name] = np.frombuffer(body[pos:end], dtype="<f8").astype(np.float64).reshape(shape)
        pos = end
    if pos != len(body):
        raise CorruptCheckpoint("trailing bytes after last tensor")
    return ModelParams(cfg, tensors)


def checkpoint_id(params: ModelParams) -> str:
    return hashlib.sha256(checkpoint_bytes(params)).hexdigest()
