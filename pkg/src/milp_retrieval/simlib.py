"""Embedding similarity between instances and the structural JS baseline."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateGroup
from .features import featurize
from .milp import MilpInstance, StructStats, instance_stats
from .model.encoder import encode_milp
from .model.params import ModelParams

JS_BINS = 10
JS_SMOOTHING = 1.0


def embed_instance(
    params: ModelParams, inst: MilpInstance, sample_seed: int | None = 0, featurize_nodes: int = 200
) -> np.ndarray:
    """Featurise (LP + short search) and encode one instance."""
    graph = featurize(inst, max_nodes=featurize_nodes)[0]
    return encode_milp(params, graph, sample_seed)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors, clipped to [-1, 1]."""
    return float(np.clip(a @ b, -1.0, 1.0))


def embed_sim(params: ModelParams, P: MilpInstance, Q: MilpInstance, sample_seed: int | None = 0) -> float:
    return cosine(embed_instance(params, P, sample_seed), embed_instance(params, Q, sample_seed))


@dataclass
class SimMatrix:
    labels: list[str]
    values: np.ndarray

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["", *self.labels])
        for lab, row in zip(self.labels, self.values):
            w.writerow([lab, *(f"{v:.6f}" for v in row)])
        return out.getvalue()


def sim_matrix_from_embeddings(X: np.ndarray, labels: Sequence[str]) -> SimMatrix:
    k = X.shape[0]
    vals = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            vals[i, j] = vals[j, i] = cosine(X[i], X[j])
    return SimMatrix(list(labels), vals)


def sim_matrix(
    params: ModelParams,
    instances: Sequence[MilpInstance],
    labels: Sequence[str] | None = None,
    sample_seed: int | None = 0,
) -> SimMatrix:
    """Pairwise similarity; every instance is embedded once with the shared seed."""
    X = np.array([embed_instance(params, inst, sample_seed) for inst in instances])
    if labels is None:
        labels = [inst.name if inst.name else f"i{k}" for k, inst in enumerate(instances)]
    return sim_matrix_from_embeddings(X, labels)


def _js_base2(p: np.ndarray, q: np.ndarray) -> float:
    m = (p + q) / 2.0

    def kl(a):
        nz = a > 0
        return float(np.sum(a[nz] * np.log2(a[nz] / m[nz])))

    return 0.5 * kl(p) + 0.5 * kl(q)


def js_structural_divergence(
    A: Sequence[MilpInstance] | np.ndarray,
    B: Sequence[MilpInstance] | np.ndarray,
    bins: int = JS_BINS,
    smoothing: float = JS_SMOOTHING,
) -> float:
    """Mean over the 11 structural statistics of the base-2 JS divergence
    between the two groups' histograms.

    Histograms share ``bins`` equal bins over the pooled min-max range and
    add ``smoothing`` to every bin count.  A statistic that is constant
    across both groups contributes 0.  Groups may also be given directly as
    ``(k, 11)`` statistic arrays.
    """
    SA = _stat_array(A)
    SB = _stat_array(B)
    if SA.shape[0] < 2 or SB.shape[0] < 2:
        raise DegenerateGroup("each group needs at least 2 instances")
    total = 0.0
    for f in range(SA.shape[1]):
        a, b = SA[:, f], SB[:, f]
        lo = min(a.min(), b.min())
        hi = max(a.max(), b.max())
        if hi <= lo:
            continue
        ha = np.histogram(a, bins=bins, range=(lo, hi))[0] + smoothing
        hb = np.histogram(b, bins=bins, range=(lo, hi))[0] + smoothing
        total += _js_base2(ha / ha.sum(), hb / hb.sum())
    return total / SA.shape[1]


def _stat_array(group) -> np.ndarray:
    if isinstance(group, np.ndarray):
        if group.ndim != 2 or group.shape[1] != len(StructStats.field_names()):
            raise DegenerateGroup("statistic array must have 11 columns")
        return group
    return np.array([instance_stats(inst).as_array() for inst in group])
