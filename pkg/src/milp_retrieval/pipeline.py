"""End-to-end training run: generate paired data, split 9:1, train."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import Sample, build_samples, text_matrix
from .model.config import ModelConfig
from .model.encoder import prepare
from .model.params import ModelParams, init_model
from .model.text import TextEmbedder
from .model.train import EpochRecord, split_indices, train

DATA_SEED = 1


@dataclass
class TrainRun:
    params: ModelParams
    history: list[EpochRecord]
    samples: list[Sample]
    train_idx: np.ndarray
    val_idx: np.ndarray


def train_on_samples(
    samples: Sequence[Sample],
    cfg: ModelConfig,
    progress: Callable[[EpochRecord], None] | None = None,
) -> TrainRun:
    embedder = TextEmbedder(cfg.out_dim)
    T = text_matrix(embedder, samples)
    tr, va = split_indices(len(samples), cfg.split_ratio, cfg.seed)
    graphs = [prepare(s.graph) for s in samples]
    params, history = train(
        init_model(cfg),
        [graphs[i] for i in tr],
        T[tr],
        cfg,
        [graphs[i] for i in va],
        T[va],
        progress=progress,
    )
    return TrainRun(params, history, list(samples), tr, va)


def run_training(
    class_ids: Sequence[str],
    per_class: int,
    cfg: ModelConfig,
    data_seed: int = DATA_SEED,
    featurize_nodes: int = 200,
    progress: Callable[[EpochRecord], None] | None = None,
) -> TrainRun:
    samples = build_samples(class_ids, per_class, data_seed, featurize_nodes)
    return train_on_samples(samples, cfg, progress)
