"""Independent reference computations used by the tests.

None of these import the code under test beyond plain data containers.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from milp_retrieval.milp import MilpInstance, RowSense


def lp_vertex_enumeration(inst: MilpInstance, tol: float = 1e-9):
    """Optimum of a bounded LP by enumerating every vertex.

    All variables must have finite bounds.  Returns ``(obj, x)`` in the
    instance's own sense, or ``None`` if no vertex is feasible.
    """
    A = inst.A.toarray()
    n = inst.n_vars
    assert np.all(np.isfinite(inst.lower)) and np.all(np.isfinite(inst.upper))
    # every constraint as a row g with "g @ x <= h"; equalities are always active
    G, h, eq = [], [], []
    for i in range(inst.n_cons):
        s = inst.senses[i]
        if s == RowSense.LE:
            G.append(A[i])
            h.append(inst.b[i])
        elif s == RowSense.GE:
            G.append(-A[i])
            h.append(-inst.b[i])
        else:
            eq.append(i)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        G.append(e)
        h.append(inst.upper[j])
        G.append(-e)
        h.append(-inst.lower[j])
    G = np.array(G)
    h = np.array(h)
    E = A[eq]
    f = inst.b[eq]
    need = n - len(eq)
    best = None
    sign = float(inst.sense)
    if need < 0:
        return _check_equality_only(inst, E, f, G, h, tol)
    for active in itertools.combinations(range(len(G)), need):
        M = np.vstack([E, G[list(active)]])
        r = np.concatenate([f, h[list(active)]])
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, r)
        if np.any(G @ x > h + 1e-7) or np.any(np.abs(E @ x - f) > 1e-7):
            continue
        val = sign * float(inst.c @ x)
        if best is None or val < best[0] - tol:
            best = (val, x)
    if best is None:
        return None
    return sign * best[0], best[1]


def _check_equality_only(inst, E, f, G, h, tol):
    # more equalities than variables: least squares then verify
    x, *_ = np.linalg.lstsq(E, f, rcond=None)
    if np.all(np.abs(E @ x - f) <= 1e-7) and np.all(G @ x <= h + 1e-7):
        return float(inst.c @ x), x
    return None


def weak_duality_bound(inst: MilpInstance, y: np.ndarray, tol: float = 1e-7) -> float:
    """Lagrangian dual bound for ``y`` after checking its sign pattern.

    ``y`` is in the instance's own objective sense.  The returned bound is in
    that sense too: a lower bound for minimisation, an upper bound for
    maximisation.
    """
    s = float(inst.sense)
    ym = s * y  # minimisation form
    le = inst.senses == RowSense.LE
    ge = inst.senses == RowSense.GE
    assert np.all(ym[le] <= tol), "LE duals must be <= 0 in minimisation form"
    assert np.all(ym[ge] >= -tol), "GE duals must be >= 0 in minimisation form"
    rc = s * inst.c - inst.A.T @ ym
    bound = float(inst.b @ ym)
    for j, r in enumerate(rc):
        if abs(r) <= tol:
            continue
        edge = inst.lower[j] if r > 0 else inst.upper[j]
        assert math.isfinite(edge), "dual infeasible on an unbounded side"
        bound += r * edge
    return s * bound


def central_difference(f, x: np.ndarray, h: float) -> np.ndarray:
    """Central finite-difference gradient of scalar ``f`` at array ``x`` (in place probe)."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def clip_loss_reference(P: np.ndarray, T: np.ndarray, temperature: float) -> float:
    """Symmetric cross-entropy written as explicit double sums."""
    N = P.shape[0]
    S = [[float(P[i] @ T[j]) / temperature for j in range(N)] for i in range(N)]
    total = 0.0
    for i in range(N):
        row = sum(math.exp(S[i][j]) for j in range(N))
        col = sum(math.exp(S[j][i]) for j in range(N))
        total += -math.log(math.exp(S[i][i]) / row) - math.log(math.exp(S[i][i]) / col)
    return total / (2 * N)


def js_reference(a: np.ndarray, b: np.ndarray, bins: int, smoothing: float) -> float:
    """Base-2 JS divergence of two samples over shared equal bins."""
    lo, hi = min(a.min(), b.min()), max(a.max(), b.max())
    if hi <= lo:
        return 0.0
    edges = np.linspace(lo, hi, bins + 1)
    ca = np.zeros(bins)
    cb = np.zeros(bins)
    for v, c in ((a, ca), (b, cb)):
        for x in v:
            k = min(int(np.searchsorted(edges, x, side="right")) - 1, bins - 1)
            c[k] += 1
    p = (ca + smoothing) / (ca + smoothing).sum()
    q = (cb + smoothing) / (cb + smoothing).sum()
    m = 0.5 * (p + q)
    out = 0.0
    for x, y in ((p, m), (q, m)):
        for u, w in zip(x, y):
            if u > 0:
                out += 0.5 * u * math.log2(u / w)
    return out


def random_bounded_lp(rng: np.random.Generator, sense=None) -> MilpInstance:
    """Random LP with n, m <= 6, integer data and finite bounds."""
    from milp_retrieval.milp import ObjSense

    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    A = rng.integers(-5, 6, (m, n)).astype(float)
    for i in range(m):
        if not A[i].any():
            A[i, rng.integers(n)] = 1.0
    b = rng.integers(-5, 10, m).astype(float)
    senses = rng.integers(0, 3, m)
    c = rng.integers(-5, 6, n).astype(float)
    lo = rng.integers(-3, 2, n).astype(float)
    up = lo + rng.integers(0, 5, n)
    if sense is None:
        sense = ObjSense.MAXIMIZE if rng.random() < 0.5 else ObjSense.MINIMIZE
    return MilpInstance.build(c, A, senses, b, lo, up, sense=sense)
