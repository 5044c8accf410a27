"""Contrastive training loop and k-way retrieval accuracy."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from ..errors import InvalidK
from ..rng import Rng, mix_seed
from .config import ModelConfig
from .encoder import GraphOps, backward, encode_many, forward, prepare
from .loss import contrastive_loss_grad
from .params import ModelParams

log = logging.getLogger(__name__)

EVAL_SEED = 0
KWAY_TRIALS = 200
_SHUFFLE_STREAM = 0x5EED5
_SAMPLE_STREAM = 0x7A3B1E
_SPLIT_STREAM = 0x5B117


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_4way_milp_to_text: float
    val_4way_text_to_milp: float
    val_10way_milp_to_text: float
    val_10way_text_to_milp: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def row(self) -> list:
        return [getattr(self, c) for c in self.columns()]


class Adam:
    def __init__(self, params: ModelParams, lr: float, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = params.zeros_like()
        self.v = params.zeros_like()
        self.t = 0

    def step(self, params: ModelParams, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for name in params.names():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            params.tensors[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def epoch_lr(cfg: ModelConfig, epoch: int) -> float:
    """Learning rate for a 1-based epoch; cosine decays towards 0 at the last."""
    if cfg.lr_schedule == "constant" or cfg.epochs <= 1:
        return cfg.lr
    return 0.5 * cfg.lr * (1.0 + math.cos(math.pi * (epoch - 1) / cfg.epochs))


def split_indices(n: int, ratio: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random split; at least one item on each side when ``n >= 2``."""
    perm = Rng(mix_seed(seed, _SPLIT_STREAM)).permutation(n)
    n_train = min(max(int(round(n * ratio)), 1), n - 1) if n >= 2 else n
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def kway_from_embeddings(
    P: np.ndarray, T: np.ndarray, k: int, trials: int = KWAY_TRIALS, seed: int = 0
) -> tuple[float, float]:
    """Mean k-way accuracy in both directions; ties count as failures."""
    N = P.shape[0]
    if k < 1 or k > N:
        raise InvalidK(f"k={k} must lie in [1, {N}]")
    S = P @ T.T
    rng = Rng(seed)
    hit_mt = hit_tm = 0
    for _ in range(trials):
        idx = rng.sample(N, k)
        sub = S[np.ix_(idx, idx)]
        diag = np.diag(sub)
        off = sub - np.diag(np.full(k, np.inf))  # mask the diagonal
        hit_mt += int(np.sum(diag > off.max(axis=1))) if k > 1 else k
        hit_tm += int(np.sum(diag > off.max(axis=0))) if k > 1 else k
    total = trials * k
    return hit_mt / total, hit_tm / total


def kway_accuracy(params, embedder, pairs, k: int, trials: int = KWAY_TRIALS, seed: int = 0):
    """k-way accuracy for ``pairs`` of (graph, text)."""
    P = encode_many(params, [g for g, _ in pairs], EVAL_SEED)
    T = np.array([embedder.encode(t) if isinstance(t, str) else t for _, t in pairs])
    return kway_from_embeddings(P, T, k, trials, seed)


def batch_gradient(
    params: ModelParams,
    graphs: Sequence[GraphOps],
    T: np.ndarray,
    sample_seeds: Sequence[int | None],
    temperature: float,
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and parameter gradients for one batch.

    Embeddings are computed first without caches; each graph is then re-run
    with caches and back-propagated one at a time, which bounds memory by a
    single graph's activations.
    """
    P = np.array([forward(params, g, s)[0] for g, s in zip(graphs, sample_seeds)])
    loss, dP, _ = contrastive_loss_grad(P, T, temperature)
    grads = params.zeros_like()
    for g, s, d in zip(graphs, sample_seeds, dP):
        _, cache = forward(params, g, s, keep_cache=True)
        backward(params, cache, d, grads)
    return loss, grads


def _val_metrics(params, graphs, T, temperature, seed):
    n = len(graphs)
    if n < 2:
        return math.nan, math.nan, math.nan, math.nan, math.nan
    P = encode_many(params, graphs, EVAL_SEED)
    loss = contrastive_loss_grad(P, T, temperature)[0]
    k4 = kway_from_embeddings(P, T, 4, KWAY_TRIALS, seed) if n >= 4 else (math.nan, math.nan)
    k10 = kway_from_embeddings(P, T, 10, KWAY_TRIALS, seed) if n >= 10 else (math.nan, math.nan)
    return loss, *k4, *k10


def train(
    params: ModelParams,
    graphs: Sequence,
    texts: np.ndarray,
    cfg: ModelConfig | None = None,
    val_graphs: Sequence = (),
    val_texts: np.ndarray | None = None,
    progress=None,
) -> tuple[ModelParams, list[EpochRecord]]:
    """Train ``params`` (a copy is returned) on paired graphs and text vectors."""
    cfg = cfg or params.cfg
    params = params.copy()
    g_train = [g if isinstance(g, GraphOps) else prepare(g) for g in graphs]
    g_val = [g if isinstance(g, GraphOps) else prepare(g) for g in val_graphs]
    T_train = np.asarray(texts, dtype=np.float64)
    T_val = None if val_texts is None else np.asarray(val_texts, dtype=np.float64)
    n = len(g_train)
    batch = min(cfg.batch_size, max(2, n // 2))
    opt = Adam(params, cfg.lr)
    history: list[EpochRecord] = []
    for epoch in range(1, cfg.epochs + 1):
        opt.lr = epoch_lr(cfg, epoch)
        order = Rng(mix_seed(cfg.seed, _SHUFFLE_STREAM, epoch)).permutation(n)
        total, seen = 0.0, 0
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            if idx.size < 2:
                continue
            seeds = [mix_seed(cfg.seed, _SAMPLE_STREAM, epoch, int(i)) for i in idx]
            loss, grads = batch_gradient(
                params, [g_train[i] for i in idx], T_train[idx], seeds, cfg.temperature
            )
            opt.step(params, grads)
            total += loss * idx.size
            seen += idx.size
        train_loss = total / max(seen, 1)
        val = _val_metrics(params, g_val, T_val, cfg.temperature, mix_seed(cfg.seed, epoch))
        rec = EpochRecord(epoch, train_loss, *val)
        history.append(rec)
        log.info("epoch %d loss %.4f val4 %.3f/%.3f val10 %.3f/%.3f", epoch, train_loss, *val[1:])
        if progress is not None:
            progress(rec)
    return params, history
