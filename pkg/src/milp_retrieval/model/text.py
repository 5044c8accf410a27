"""Frozen feature-hashing text embedder.

Tokens are ``re.findall('[a-z0-9]+', text.lower())``.  Each token is hashed
with 8-byte BLAKE2b (little-endian integer ``h``): bucket ``h mod D`` and
sign ``-1`` when the top bit of ``h`` is set, ``+1`` otherwise.  Counts are
accumulated and the vector L2-normalised.

A number followed by a word (``"300 variables"``) additionally emits
magnitude tokens ``variables~k`` for the ``window`` log-grid cells nearest
``log(number) / log(ratio)``, so quantities of similar size share tokens
and descriptions of same-class instances differ smoothly with size.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import EmptyText, MilpRetrievalError

_TOKEN = re.compile(r"[a-z0-9]+")


def _hash64(token: str) -> int:
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class TextEmbedder:
    out_dim: int = 256
    magnitude_ratio: float = 1.1
    magnitude_window: int = 6

    def tokens(self, text: str) -> list[str]:
        words = tokenize(text)
        out = list(words)
        if self.magnitude_window <= 0:
            return out
        step = math.log(self.magnitude_ratio)
        half = self.magnitude_window / 2.0
        for num, word in zip(words, words[1:]):
            if not num.isdigit() or word.isdigit():
                continue
            pos = math.log(int(num) + 1) / step
            lo = math.floor(pos - half + 0.5)
            out.extend(f"{word}~{k}" for k in range(lo, lo + self.magnitude_window))
        return out

    def encode(self, text: str) -> np.ndarray:
        toks = self.tokens(text)
        if not toks:
            raise EmptyText("text has no alphanumeric tokens")
        v = np.zeros(self.out_dim)
        for tok in toks:
            h = _hash64(tok)
            v[h % self.out_dim] += -1.0 if h >> 63 else 1.0
        norm = np.linalg.norm(v)
        if norm == 0:
            # every token cancelled; fall back to unsigned counts
            for tok in toks:
                v[_hash64(tok) % self.out_dim] += 1.0
            norm = np.linalg.norm(v)
        return v / norm


def encode_text(embedder: TextEmbedder, text: str) -> np.ndarray:
    return embedder.encode(text)


def load_text_vectors(path: str | Path, dim: int | None = None) -> dict[str, np.ndarray]:
    """Read externally computed text vectors: one ``id,f1,f2,...`` per line.

    Vectors are L2-normalised on load; all must share one dimension.
    """
    out: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        key, *vals = line.split(",")
        try:
            v = np.array([float(x) for x in vals])
        except ValueError:
            raise MilpRetrievalError(f"{path}:{lineno}: non-numeric entry") from None
        if dim is None:
            dim = v.size
        if v.size != dim or dim == 0:
            raise MilpRetrievalError(f"{path}:{lineno}: expected {dim} values, got {v.size}")
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm == 0:
            raise MilpRetrievalError(f"{path}:{lineno}: zero or non-finite vector")
        out[key.strip()] = v / norm
    return out
