"""Symmetric contrastive loss between MILP and text embeddings."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateBatch


def _log_softmax(S: np.ndarray, axis: int) -> np.ndarray:
    mx = S.max(axis=axis, keepdims=True)
    return S - mx - np.log(np.exp(S - mx).sum(axis=axis, keepdims=True))


def contrastive_loss(P: np.ndarray, T: np.ndarray, temperature: float = 1.0) -> float:
    """``(1/2N) sum_i [-log softmax_row(S)_ii - log softmax_col(S)_ii]`` with ``S = P T^T / tau``."""
    return contrastive_loss_grad(P, T, temperature)[0]


def contrastive_loss_grad(P: np.ndarray, T: np.ndarray, temperature: float = 1.0):
    """Loss and its gradients with respect to ``P`` and ``T``."""
    P = np.asarray(P, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    N = P.shape[0]
    if N < 2:
        raise DegenerateBatch(f"contrastive loss needs at least 2 pairs, got {N}")
    if T.shape != P.shape:
        raise DegenerateBatch(f"P{P.shape} and T{T.shape} differ in shape")
    S = P @ T.T / temperature
    lr = _log_softmax(S, axis=1)
    lc = _log_softmax(S, axis=0)
    diag = np.arange(N)
    loss = -(lr[diag, diag].sum() + lc[diag, diag].sum()) / (2 * N)
    eye = np.eye(N)
    dS = ((np.exp(lr) - eye) + (np.exp(lc) - eye)) / (2 * N)
    dP = dS @ T / temperature
    dT = dS.T @ P / temperature
    return float(loss), dP, dT
