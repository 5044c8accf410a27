"""MILP graph encoder with hand-written reverse pass.

Pipeline for one graph (E = emb_size):

1. ``Xv = relu(relu(V w1 + b1) w2 + b2)``, same for constraints; summary
   vector ``s`` starts at the learned ``s0``.
2. Each conv layer, with P the 0/1 incidence matrix (rows = constraints)
   and edge projection ``e * w_e + b_e`` summed over incident edges::

       agg_c = P Xv + rowsum(e) w_e + deg_c b_e
       Xc   += relu(agg_c row_w + s row_u + row_b)
       s    += relu(mean(Xv) s1_w + s1_b)
       agg_v = P^T Xc + colsum(e) w_e + deg_v b_e
       Xv   += relu(agg_v col_w + s col_u + col_b)
       s    += relu(mean(Xc) s2_w + s2_b)

3. Tokens: ``sampled_nodes`` rows drawn from [Xv; Xc] (without replacement,
   or with replacement when the graph is smaller; all nodes in order when
   ``sample_seed`` is None), then mean(Xv), mean(Xc) and s.
4. Pre-norm encoder layers: ``X += MHA(LN1(X))``, ``X += FFN(LN2(X))``.
   Keys carry no bias since a shared shift of all scores leaves softmax
   unchanged.
5. Final LayerNorm, mean over tokens, linear map to D, L2 normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import ShapeMismatch
from ..features import N_CONS_FEATS, N_VAR_FEATS, BipartiteGraph
from ..rng import Rng
from .params import ModelParams

LN_EPS = 1e-5


@dataclass
class GraphOps:
    """Per-graph arrays reused by every forward pass."""

    V: np.ndarray
    C: np.ndarray
    P: sparse.csr_matrix
    PT: sparse.csr_matrix
    rowsum_e: np.ndarray
    colsum_e: np.ndarray
    deg_c: np.ndarray
    deg_v: np.ndarray

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[0]


def prepare(g: BipartiteGraph) -> GraphOps:
    if g.var_feats.shape[1] != N_VAR_FEATS or g.cons_feats.shape[1] != N_CONS_FEATS:
        raise ShapeMismatch("graph feature widths do not match the model inputs")
    n, m = g.n, g.m
    if n < 1 or m < 1:
        raise ShapeMismatch("graph needs at least one variable and one constraint")
    k = g.edge_feats.shape[0]
    P = sparse.csr_matrix((np.ones(k), (g.edge_cons, g.edge_var)), shape=(m, n))
    return GraphOps(
        V=np.asarray(g.var_feats, dtype=np.float64),
        C=np.asarray(g.cons_feats, dtype=np.float64),
        P=P,
        PT=P.T.tocsr(),
        rowsum_e=np.bincount(g.edge_cons, weights=g.edge_feats, minlength=m),
        colsum_e=np.bincount(g.edge_var, weights=g.edge_feats, minlength=n),
        deg_c=np.bincount(g.edge_cons, minlength=m).astype(np.float64),
        deg_v=np.bincount(g.edge_var, minlength=n).astype(np.float64),
    )


def _ops(graph) -> GraphOps:
    return graph if isinstance(graph, GraphOps) else prepare(graph)


def sample_indices(total: int, k: int, sample_seed: int | None) -> np.ndarray:
    if sample_seed is None:
        return np.arange(total)
    rng = Rng(sample_seed)
    if total >= k:
        return rng.sample(total, k)
    return rng.integers(0, total, k)


# ------------------------------------------------------------------ blocks
def _relu(x):
    return np.maximum(x, 0.0)


def _mlp_fwd(X, w1, b1, w2, b2):
    h1 = X @ w1 + b1
    a1 = _relu(h1)
    h2 = a1 @ w2 + b2
    return _relu(h2), (X, h1, a1, h2)


def _mlp_bwd(dout, cache, w1, w2, grads, prefix):
    X, h1, a1, h2 = cache
    dh2 = dout * (h2 > 0)
    grads[prefix + "w2"] += a1.T @ dh2
    grads[prefix + "b2"] += dh2.sum(axis=0)
    dh1 = (dh2 @ w2.T) * (h1 > 0)
    grads[prefix + "w1"] += X.T @ dh1
    grads[prefix + "b1"] += dh1.sum(axis=0)


def _ln_fwd(X, g, b):
    mu = X.mean(axis=-1, keepdims=True)
    xc = X - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv)


def _ln_bwd(dy, cache, g, grads, gname, bname):
    xhat, inv = cache
    grads[gname] += (dy * xhat).sum(axis=0)
    grads[bname] += dy.sum(axis=0)
    dxhat = dy * g
    E = xhat.shape[-1]
    return inv / E * (
        E * dxhat - dxhat.sum(axis=-1, keepdims=True) - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
    )


def _conv_fwd(p, k, ops: GraphOps, Xv, Xc, s, w_e, b_e):
    t = lambda name: p[f"conv{k}.{name}"]  # noqa: E731
    agg_c = ops.P @ Xv + np.outer(ops.rowsum_e, w_e) + np.outer(ops.deg_c, b_e)
    pre_c = agg_c @ t("row_w") + s @ t("row_u") + t("row_b")
    Xc1 = Xc + _relu(pre_c)
    mv = Xv.mean(axis=0)
    pre_s1 = mv @ t("s1_w") + t("s1_b")
    s1 = s + _relu(pre_s1)
    agg_v = ops.PT @ Xc1 + np.outer(ops.colsum_e, w_e) + np.outer(ops.deg_v, b_e)
    pre_v = agg_v @ t("col_w") + s1 @ t("col_u") + t("col_b")
    Xv1 = Xv + _relu(pre_v)
    mc = Xc1.mean(axis=0)
    pre_s2 = mc @ t("s2_w") + t("s2_b")
    s2 = s1 + _relu(pre_s2)
    cache = (s, agg_c, pre_c, mv, pre_s1, s1, agg_v, pre_v, mc, pre_s2)
    return Xv1, Xc1, s2, cache


def _conv_bwd(p, k, ops: GraphOps, dXv1, dXc1, ds2, cache, grads):
    s0, agg_c, pre_c, mv, pre_s1, s1, agg_v, pre_v, mc, pre_s2 = cache
    t = lambda name: p[f"conv{k}.{name}"]  # noqa: E731
    g = lambda name: grads[f"conv{k}.{name}"]  # noqa: E731
    n, m = ops.n, ops.m
    dXc1 = dXc1.copy()
    # s2 = s1 + relu(mc s2_w + s2_b)
    dpre = ds2 * (pre_s2 > 0)
    g("s2_w")[...] += np.outer(mc, dpre)
    g("s2_b")[...] += dpre
    dXc1 += (t("s2_w") @ dpre) / m
    ds1 = ds2.copy()
    # Xv1 = Xv + relu(agg_v col_w + s1 col_u + col_b)
    dpre_v = dXv1 * (pre_v > 0)
    col_sum = dpre_v.sum(axis=0)
    g("col_w")[...] += agg_v.T @ dpre_v
    g("col_b")[...] += col_sum
    g("col_u")[...] += np.outer(s1, col_sum)
    ds1 += t("col_u") @ col_sum
    dagg_v = dpre_v @ t("col_w").T
    dXc1 += ops.P @ dagg_v
    grads["edge.w"] += ops.colsum_e @ dagg_v
    grads["edge.b"] += ops.deg_v @ dagg_v
    dXv = dXv1.copy()
    # s1 = s + relu(mv s1_w + s1_b)
    dpre = ds1 * (pre_s1 > 0)
    g("s1_w")[...] += np.outer(mv, dpre)
    g("s1_b")[...] += dpre
    dXv += (t("s1_w") @ dpre) / n
    ds = ds1.copy()
    # Xc1 = Xc + relu(agg_c row_w + s row_u + row_b)
    dpre_c = dXc1 * (pre_c > 0)
    row_sum = dpre_c.sum(axis=0)
    g("row_w")[...] += agg_c.T @ dpre_c
    g("row_b")[...] += row_sum
    g("row_u")[...] += np.outer(s0, row_sum)
    ds += t("row_u") @ row_sum
    dagg_c = dpre_c @ t("row_w").T
    dXv += ops.PT @ dagg_c
    grads["edge.w"] += ops.rowsum_e @ dagg_c
    grads["edge.b"] += ops.deg_c @ dagg_c
    return dXv, dXc1, ds


def _attn_fwd(p, k, X, H):
    t = lambda name: p[f"attn{k}.{name}"]  # noqa: E731
    L, E = X.shape
    dh = E // H
    h, ln1 = _ln_fwd(X, t("ln1_g"), t("ln1_b"))
    Q = (h @ t("wq") + t("bq")).reshape(L, H, dh).transpose(1, 0, 2)
    K = (h @ t("wk")).reshape(L, H, dh).transpose(1, 0, 2)
    Vv = (h @ t("wv") + t("bv")).reshape(L, H, dh).transpose(1, 0, 2)
    scores = Q @ K.transpose(0, 2, 1) / np.sqrt(dh)
    scores -= scores.max(axis=-1, keepdims=True)
    A = np.exp(scores)
    A /= A.sum(axis=-1, keepdims=True)
    O = (A @ Vv).transpose(1, 0, 2).reshape(L, E)
    X1 = X + O @ t("wo") + t("bo")
    h2, ln2 = _ln_fwd(X1, t("ln2_g"), t("ln2_b"))
    f1 = h2 @ t("f_w1") + t("f_b1")
    a = _relu(f1)
    X2 = X1 + a @ t("f_w2") + t("f_b2")
    return X2, (h, ln1, Q, K, Vv, A, O, h2, ln2, f1, a)


def _attn_bwd(p, k, dX2, cache, H, grads):
    h, ln1, Q, K, Vv, A, O, h2, ln2, f1, a = cache
    t = lambda name: p[f"attn{k}.{name}"]  # noqa: E731
    g = lambda name: grads[f"attn{k}.{name}"]  # noqa: E731
    L, E = dX2.shape
    dh = E // H
    # feed-forward
    g("f_w2")[...] += a.T @ dX2
    g("f_b2")[...] += dX2.sum(axis=0)
    df1 = (dX2 @ t("f_w2").T) * (f1 > 0)
    g("f_w1")[...] += h2.T @ df1
    g("f_b1")[...] += df1.sum(axis=0)
    dX1 = dX2 + _ln_bwd(df1 @ t("f_w1").T, ln2, t("ln2_g"), grads, f"attn{k}.ln2_g", f"attn{k}.ln2_b")
    # attention
    g("wo")[...] += O.T @ dX1
    g("bo")[...] += dX1.sum(axis=0)
    dO = (dX1 @ t("wo").T).reshape(L, H, dh).transpose(1, 0, 2)
    dA = dO @ Vv.transpose(0, 2, 1)
    dV = A.transpose(0, 2, 1) @ dO
    ds = A * (dA - (dA * A).sum(axis=-1, keepdims=True)) / np.sqrt(dh)
    dQ = ds @ K
    dK = ds.transpose(0, 2, 1) @ Q
    merge = lambda T: T.transpose(1, 0, 2).reshape(L, E)  # noqa: E731
    dQ, dK, dV = merge(dQ), merge(dK), merge(dV)
    g("wq")[...] += h.T @ dQ
    g("bq")[...] += dQ.sum(axis=0)
    g("wk")[...] += h.T @ dK
    g("wv")[...] += h.T @ dV
    g("bv")[...] += dV.sum(axis=0)
    dh_ = dQ @ t("wq").T + dK @ t("wk").T + dV @ t("wv").T
    return dX1 + _ln_bwd(dh_, ln1, t("ln1_g"), grads, f"attn{k}.ln1_g", f"attn{k}.ln1_b")


# ----------------------------------------------------------------- encoder
def forward(params: ModelParams, graph, sample_seed: int | None = 0, keep_cache: bool = False):
    """Unit-norm embedding of one graph; returns ``(p, cache)``."""
    cfg = params.cfg
    p = params.tensors
    ops = _ops(graph)
    Xv, v_cache = _mlp_fwd(ops.V, p["var.w1"], p["var.b1"], p["var.w2"], p["var.b2"])
    Xc, c_cache = _mlp_fwd(ops.C, p["cons.w1"], p["cons.b1"], p["cons.w2"], p["cons.b2"])
    s = p["summary.s0"]
    conv_caches = []
    for k in range(cfg.gcn_layers):
        Xv, Xc, s, cc = _conv_fwd(p, k, ops, Xv, Xc, s, p["edge.w"], p["edge.b"])
        conv_caches.append(cc)
    nodes = np.vstack((Xv, Xc))
    idx = sample_indices(ops.n + ops.m, cfg.sampled_nodes, sample_seed)
    X = np.vstack((nodes[idx], Xv.mean(axis=0), Xc.mean(axis=0), s))
    attn_caches = []
    for k in range(cfg.attn_layers):
        X, ac = _attn_fwd(p, k, X, cfg.attn_heads)
        attn_caches.append(ac)
    Y, lnf = _ln_fwd(X, p["final.ln_g"], p["final.ln_b"])
    pooled = Y.mean(axis=0)
    z = pooled @ p["out.w"] + p["out.b"]
    norm = float(np.sqrt(z @ z))
    out = z / norm
    if not keep_cache:
        return out, None
    cache = (ops, v_cache, c_cache, conv_caches, idx, attn_caches, lnf, pooled, norm, out, Y.shape[0])
    return out, cache


def backward(params: ModelParams, cache, dout: np.ndarray, grads: dict[str, np.ndarray]) -> None:
    """Accumulate d(loss)/d(params) into ``grads`` given d(loss)/d(output)."""
    cfg = params.cfg
    p = params.tensors
    ops, v_cache, c_cache, conv_caches, idx, attn_caches, lnf, pooled, norm, out, L = cache
    dz = (dout - out * (out @ dout)) / norm
    grads["out.w"] += np.outer(pooled, dz)
    grads["out.b"] += dz
    dY = np.broadcast_to(p["out.w"] @ dz / L, (L, cfg.emb_size))
    dX = _ln_bwd(dY, lnf, p["final.ln_g"], grads, "final.ln_g", "final.ln_b")
    for k in reversed(range(cfg.attn_layers)):
        dX = _attn_bwd(p, k, dX, attn_caches[k], cfg.attn_heads, grads)
    n, m = ops.n, ops.m
    S = idx.shape[0]
    dnodes = np.zeros((n + m, cfg.emb_size))
    np.add.at(dnodes, idx, dX[:S])
    dXv = dnodes[:n] + dX[S] / n
    dXc = dnodes[n:] + dX[S + 1] / m
    ds = dX[S + 2].copy()
    for k in reversed(range(cfg.gcn_layers)):
        dXv, dXc, ds = _conv_bwd(p, k, ops, dXv, dXc, ds, conv_caches[k], grads)
    grads["summary.s0"] += ds
    _mlp_bwd(dXv, v_cache, p["var.w1"], p["var.w2"], grads, "var.")
    _mlp_bwd(dXc, c_cache, p["cons.w1"], p["cons.w2"], grads, "cons.")


def encode_milp(params: ModelParams, graph, sample_seed: int | None = 0) -> np.ndarray:
    return forward(params, graph, sample_seed)[0]


def encode_many(params: ModelParams, graphs, sample_seed: int | None = 0) -> np.ndarray:
    return np.array([encode_milp(params, g, sample_seed) for g in graphs])
