"""Bipartite graph representation with solution-dependent node features.

Variable features (16 columns):

    0      norm_coef       c_j / ||c||_2 (0 when c = 0)
    1..4   type one-hot    binary, integer, implied integer, continuous
    5      has_lb          l_j > -inf
    6      has_ub          u_j < +inf
    7      solval          x_j / max(1, ||x||_inf), clipped to [-clip, clip]
    8      solfrac         distance to nearest integer (integral types only)
    9      sol_is_at_lb    |x_j - l_j| <= eps
    10     sol_is_at_ub    |x_j - u_j| <= eps
    11..14 basestat        at lower, basic, at upper, zero
    15     constant 1.0

Constraint features (7 columns):

    0  rank            always 0 (no cut rows exist)
    1  norm_nnzrs      nnz(row) / n
    2  bias            b_i / ||A_i||_2
    3  row_is_at_lhs   GE/EQ rows whose activity equals b_i
    4  row_is_at_rhs   LE/EQ rows whose activity equals b_i
    5  dualsol         y_i / (||A_i||_2 * max(||c||_2, 1))
    6  norm_intcols    share of integral columns among the row's nonzeros

Edge feature: A_ij / ||A_i||_2.

``x`` is the MILP incumbent when one is supplied, otherwise the LP
relaxation; basis statuses and duals always come from the LP.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, MilpRetrievalError
from .lp import Limits, LpSolution, MilpSolution, solve_lp_relaxation, solve_milp
from .milp import INF, MilpInstance, RowSense

N_VAR_FEATS = 16
N_CONS_FEATS = 7
AT_BOUND_EPS = 1e-6
SOLVAL_CLIP = 10.0
FEATURIZE_NODES = 200


@dataclass
class BipartiteGraph:
    var_feats: np.ndarray  # (n, 16)
    cons_feats: np.ndarray  # (m, 7)
    edge_cons: np.ndarray  # (nnz,) constraint index per edge
    edge_var: np.ndarray  # (nnz,) variable index per edge
    edge_feats: np.ndarray  # (nnz,)

    def __post_init__(self) -> None:
        if self.var_feats.ndim != 2 or self.var_feats.shape[1] != N_VAR_FEATS:
            raise DimensionMismatch(f"var_feats must be (n, {N_VAR_FEATS})")
        if self.cons_feats.ndim != 2 or self.cons_feats.shape[1] != N_CONS_FEATS:
            raise DimensionMismatch(f"cons_feats must be (m, {N_CONS_FEATS})")
        k = self.edge_feats.shape[0]
        if self.edge_cons.shape != (k,) or self.edge_var.shape != (k,):
            raise DimensionMismatch("edge arrays differ in length")
        if k and (self.edge_cons.max() >= self.m or self.edge_var.max() >= self.n):
            raise DimensionMismatch("edge endpoint out of range")

    @property
    def n(self) -> int:
        return int(self.var_feats.shape[0])

    @property
    def m(self) -> int:
        return int(self.cons_feats.shape[0])

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.edge_cons.tolist(), self.edge_var.tolist(), self.edge_feats.tolist()))

    def permuted(self, cons_perm: np.ndarray, var_perm: np.ndarray) -> "BipartiteGraph":
        """Graph with new node i equal to old node ``perm[i]``."""
        inv_c = np.argsort(cons_perm)
        inv_v = np.argsort(var_perm)
        return BipartiteGraph(
            self.var_feats[var_perm],
            self.cons_feats[cons_perm],
            inv_c[self.edge_cons],
            inv_v[self.edge_var],
            self.edge_feats.copy(),
        )


def build_bipartite(
    inst: MilpInstance,
    sol: LpSolution,
    milp_sol: MilpSolution | None = None,
    solval_clip: float = SOLVAL_CLIP,
) -> BipartiteGraph:
    n, m = inst.n_vars, inst.n_cons
    if sol.x.shape != (n,) or sol.y.shape != (m,) or sol.basis.shape != (n,):
        raise DimensionMismatch(
            f"solution shapes x{sol.x.shape} y{sol.y.shape} do not match instance ({n} vars, {m} rows)"
        )
    x = sol.x
    if milp_sol is not None and milp_sol.x_int is not None:
        if milp_sol.x_int.shape != (n,):
            raise DimensionMismatch("incumbent length differs from n_vars")
        x = milp_sol.x_int
    A = inst.A
    c_norm = float(np.linalg.norm(inst.c))
    integral = inst.integral_mask()

    V = np.zeros((n, N_VAR_FEATS))
    V[:, 0] = inst.c / c_norm if c_norm > 0 else 0.0
    V[np.arange(n), 1 + inst.vtypes.astype(np.int64)] = 1.0
    V[:, 5] = inst.lower > -INF
    V[:, 6] = inst.upper < INF
    scale = max(1.0, float(np.abs(x).max()))
    V[:, 7] = np.clip(x / scale, -solval_clip, solval_clip)
    frac = np.minimum(x - np.floor(x), np.ceil(x) - x)
    V[:, 8] = np.where(integral, frac, 0.0)
    V[:, 9] = np.abs(x - inst.lower) <= AT_BOUND_EPS
    V[:, 10] = np.abs(x - inst.upper) <= AT_BOUND_EPS
    V[np.arange(n), 11 + sol.basis.astype(np.int64)] = 1.0
    V[:, 15] = 1.0

    row_nnz = np.diff(A.indptr)
    row_norm = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
    activity = A @ x
    tight = np.abs(activity - inst.b) <= AT_BOUND_EPS
    int_per_row = np.asarray(A.astype(bool).astype(np.float64) @ integral.astype(np.float64)).ravel()
    C = np.zeros((m, N_CONS_FEATS))
    C[:, 1] = row_nnz / n
    C[:, 2] = inst.b / row_norm
    C[:, 3] = tight & (inst.senses != RowSense.LE)
    C[:, 4] = tight & (inst.senses != RowSense.GE)
    C[:, 5] = sol.y / (row_norm * max(c_norm, 1.0))
    C[:, 6] = int_per_row / row_nnz

    edge_cons = np.repeat(np.arange(m, dtype=np.int64), row_nnz)
    edge_var = A.indices.astype(np.int64)
    edge_feats = A.data / row_norm[edge_cons]
    return BipartiteGraph(V, C, edge_cons, edge_var, edge_feats)


def featurize(
    inst: MilpInstance,
    max_nodes: int = FEATURIZE_NODES,
    max_seconds: float = 10.0,
) -> tuple[BipartiteGraph, LpSolution, MilpSolution]:
    """LP relaxation plus the first incumbent of a short depth-first search.

    When the search finds no incumbent within its budget the solution
    features fall back to the LP relaxation values.
    """
    sol = solve_lp_relaxation(inst)
    milp_sol = solve_milp(inst, Limits(max_nodes=max_nodes, max_seconds=max_seconds),
                          first_incumbent=True)
    return build_bipartite(inst, sol, milp_sol), sol, milp_sol


# ---------------------------------------------------------------- text dump
def dump_graph(g: BipartiteGraph) -> str:
    """Plain-text graph: header, VARS rows, CONS rows, EDGES triples."""
    out = io.StringIO()
    out.write(f"BIPARTITE 1\nN {g.n} M {g.m} E {g.edge_feats.shape[0]}\nVARS\n")
    for row in g.var_feats:
        out.write(" ".join(format(float(v), ".17g") for v in row) + "\n")
    out.write("CONS\n")
    for row in g.cons_feats:
        out.write(" ".join(format(float(v), ".17g") for v in row) + "\n")
    out.write("EDGES\n")
    for i, j, v in g.edges():
        out.write(f"{i} {j} {format(v, '.17g')}\n")
    out.write("END\n")
    return out.getvalue()


def _expect(line: str, tag: str) -> None:
    if line != tag:
        raise ValueError(f"expected {tag}, found {line[:20]!r}")


def load_graph(text: str) -> BipartiteGraph:
    lines = text.splitlines()
    try:
        if lines[0].split() != ["BIPARTITE", "1"]:
            raise ValueError("bad header")
        hdr = lines[1].split()
        n, m, k = int(hdr[1]), int(hdr[3]), int(hdr[5])
        pos = 2
        _expect(lines[pos], "VARS")
        V = np.array([[float(t) for t in ln.split()] for ln in lines[pos + 1 : pos + 1 + n]]).reshape(n, N_VAR_FEATS)
        pos += 1 + n
        _expect(lines[pos], "CONS")
        C = np.array([[float(t) for t in ln.split()] for ln in lines[pos + 1 : pos + 1 + m]]).reshape(m, N_CONS_FEATS)
        pos += 1 + m
        _expect(lines[pos], "EDGES")
        trip = [ln.split() for ln in lines[pos + 1 : pos + 1 + k]]
        _expect(lines[pos + 1 + k], "END")
    except (IndexError, ValueError) as exc:
        raise MilpRetrievalError(f"malformed graph dump: {exc}") from None
    ec = np.array([int(t[0]) for t in trip], dtype=np.int64)
    ev = np.array([int(t[1]) for t in trip], dtype=np.int64)
    ef = np.array([float(t[2]) for t in trip])
    return BipartiteGraph(V, C, ec, ev, ef)
