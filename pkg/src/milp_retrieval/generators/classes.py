"""Native generator classes.

Sampling schemes (all draws from :class:`~milp_retrieval.rng.Rng`, in the
order listed):

SC   Set cover, a line-by-line port of the reference generator: ``nnzrs =
     int(n_rows*n_cols*density)`` column draws, first ``2*n_cols`` forced to
     two per column, first ``n_rows`` overwritten by a row permutation, then
     columns topped up with distinct rows; costs uniform in [1, max_coef].
IS   Max-weight independent set on G(n, p): pair (i<j) in lexicographic order
     kept when its uniform draw < p; weights uniform in [1, max_weight];
     one edge constraint per kept pair.
CA   Combinatorial auction: item values U[1,100]; per bid a bundle size in
     [1, max_bundle], a distinct item sample and price
     ``floor(sum(values) * U[1, 1.5]) + 1``; one packing row per covered item.
KS   Multiple knapsack: weights in [10,100], profits weight + [-10,10]
     clipped to >= 1, capacity ``floor(U[0.4,0.6] * sum(w) / K)`` per sack.
CFL  Capacitated facility location (Cornuejols-style): unit-square sites,
     demands [5,35], capacities [10,160] rescaled to ``ratio * sum(d)``,
     fixed cost ``U[100,110]*sqrt(s) + U[0,90]``, transport ``10*dist*d``.
FCNF Fixed-charge flow on a random DAG: chain arcs i->i+1 with full
     capacity plus forward arcs kept with probability
     ``(avg_degree-1)/((n-1)/2)``; source 0 ships to ``n_sinks`` sinks.
TSP  Miller-Tucker-Zemlin model on unit-square cities, costs
     ``round(100*dist)``.
GA   Generalized assignment, Cattrysse type C capacities raised to the load
     of a random assignment so every instance is feasible.
SAT  Weighted max-3-SAT with clause indicators.
GIS  Generalized independent set: G(n, avg_degree/(n-1)) with removable
     edges carrying a removal cost.
NF   Multicommodity fixed-charge network design on a bidirected ring plus
     random arcs; ring arcs can carry every commodity.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from ..errors import InvalidParams
from ..milp import MilpInstance, ObjSense, RowSense, VarType
from ..rng import Rng
from .base import GeneratorClass, ParamSpec, register

B, C = VarType.BINARY, VarType.CONTINUOUS
LE, GE, EQ = RowSense.LE, RowSense.GE, RowSense.EQ


class _Rows:
    """Accumulates sparse rows in order."""

    def __init__(self) -> None:
        self.indptr = [0]
        self.indices: list[int] = []
        self.data: list[float] = []
        self.senses: list[int] = []
        self.rhs: list[float] = []

    def add(self, cols, vals, sense: RowSense, rhs: float) -> None:
        self.indices.extend(int(j) for j in cols)
        self.data.extend(float(v) for v in vals)
        self.indptr.append(len(self.indices))
        self.senses.append(sense)
        self.rhs.append(float(rhs))

    def instance(self, name, c, lower, upper, vtypes, sense) -> MilpInstance:
        A = sparse.csr_matrix(
            (self.data, self.indices, self.indptr), shape=(len(self.senses), len(c))
        )
        return MilpInstance.build(
            c, A, self.senses, self.rhs, lower, upper, vtypes, name=name, sense=sense
        )


def _pairs(rng: Rng, n: int, prob: float) -> list[tuple[int, int]]:
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < prob
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


# ---------------------------------------------------------------- set cover
def _sc_check(p: dict) -> str | None:
    nnzrs = int(p["n_rows"] * p["n_cols"] * p["density"])
    if nnzrs < 2 * p["n_cols"]:
        return "density * n_rows < 2: cannot force two rows per column"
    if nnzrs < p["n_rows"]:
        return "density * n_cols < 1: cannot force one column per row"
    return None


def set_cover(p: dict, rng: Rng) -> MilpInstance:
    n_rows, n_cols = p["n_rows"], p["n_cols"]
    nnzrs = int(n_rows * n_cols * p["density"])

    indices = rng.integers(0, n_cols, nnzrs)
    indices[: 2 * n_cols] = np.repeat(np.arange(n_cols), 2)
    col_nrows = np.bincount(indices, minlength=n_cols)
    if col_nrows.max() > n_rows:
        raise InvalidParams("SC: a column drew more entries than there are rows")

    indices[:n_rows] = rng.permutation(n_rows)
    i = 0
    indptr = [0]
    for n in col_nrows:
        if i >= n_rows:
            indices[i : i + n] = rng.sample(n_rows, n)
        elif i + n > n_rows:
            remaining = np.setdiff1d(np.arange(n_rows), indices[i:n_rows], assume_unique=True)
            indices[n_rows : i + n] = rng.sample(remaining, i + n - n_rows)
        i += n
        indptr.append(i)

    c = rng.integers(0, p["max_coef"], n_cols) + 1
    A = sparse.csc_matrix(
        (np.ones(len(indices)), indices, indptr), shape=(n_rows, n_cols)
    ).tocsr()
    return MilpInstance.build(
        c.astype(float),
        A,
        np.full(n_rows, GE),
        np.ones(n_rows),
        vtypes=np.full(n_cols, B),
        name="SetCover",
    )


register(
    GeneratorClass(
        "SC",
        "Set Cover",
        (
            ParamSpec("n_rows", int, 150, 2, 100_000, size=True),
            ParamSpec("n_cols", int, 300, 1, 200_000, size=True),
            ParamSpec("density", float, 0.05, 1e-6, 1.0),
            ParamSpec("max_coef", int, 100, 1, 1_000_000),
        ),
        set_cover,
        "A set cover problem: choose a minimum cost subset of columns so that every "
        "row is covered by at least one selected column. Binary decision variables "
        "select columns, each covering constraint is an inequality requiring coverage "
        "of its row, and the objective minimizes the total column cost.",
        check=_sc_check,
    )
)


# ---------------------------------------------------------- independent set
def independent_set(p: dict, rng: Rng) -> MilpInstance:
    n = p["n_nodes"]
    edges = _pairs(rng, n, p["edge_prob"])
    if not edges:
        edges = [(0, 1)]
    w = rng.integers(1, p["max_weight"] + 1, n).astype(float)
    rows = _Rows()
    for i, j in edges:
        rows.add((i, j), (1.0, 1.0), LE, 1.0)
    return rows.instance(
        "IndependentSet", w, np.zeros(n), np.ones(n), np.full(n, B), ObjSense.MAXIMIZE
    )


register(
    GeneratorClass(
        "IS",
        "Maximum Independent Set",
        (
            ParamSpec("n_nodes", int, 120, 2, 20_000, size=True),
            ParamSpec("edge_prob", float, 0.05, 1e-6, 1.0),
            ParamSpec("max_weight", int, 100, 1, 1_000_000),
        ),
        independent_set,
        "A maximum weight independent set problem on a random graph: select a set "
        "of nodes with no two adjacent nodes selected. Each binary variable marks a "
        "chosen node, each edge gives a packing inequality allowing at most one of "
        "its endpoints, and the objective maximizes the total weight of chosen nodes.",
    )
)


# ------------------------------------------------------ combinatorial auction
def combinatorial_auction(p: dict, rng: Rng) -> MilpInstance:
    n_items, n_bids = p["n_items"], p["n_bids"]
    values = rng.uniform(1.0, 100.0, n_items)
    max_bundle = min(p["max_bundle"], n_items)
    bids: list[np.ndarray] = []
    prices = np.empty(n_bids)
    for k in range(n_bids):
        size = rng.integer(1, max_bundle + 1)
        bundle = np.sort(rng.sample(n_items, size))
        bids.append(bundle)
        prices[k] = np.floor(values[bundle].sum() * rng.uniform(1.0, 1.5, 1)[0]) + 1.0
    holders: list[list[int]] = [[] for _ in range(n_items)]
    for k, bundle in enumerate(bids):
        for item in bundle:
            holders[item].append(k)
    rows = _Rows()
    for item in range(n_items):
        if holders[item]:
            rows.add(holders[item], np.ones(len(holders[item])), LE, 1.0)
    return rows.instance(
        "CombinatorialAuction",
        prices,
        np.zeros(n_bids),
        np.ones(n_bids),
        np.full(n_bids, B),
        ObjSense.MAXIMIZE,
    )


register(
    GeneratorClass(
        "CA",
        "Combinatorial Auction",
        (
            ParamSpec("n_items", int, 60, 1, 20_000, size=True),
            ParamSpec("n_bids", int, 200, 1, 100_000, size=True),
            ParamSpec("max_bundle", int, 5, 1, 1000),
        ),
        combinatorial_auction,
        "A combinatorial auction winner determination problem: bidders place bids on "
        "bundles of items and the auctioneer accepts a set of bids so that no item is "
        "sold twice. Binary variables accept bids, each item yields a packing "
        "inequality over the bids containing it, and the objective maximizes revenue.",
    )
)


# ---------------------------------------------------------- multiple knapsack
def multiple_knapsack(p: dict, rng: Rng) -> MilpInstance:
    n, k = p["n_items"], p["n_knapsacks"]
    w = rng.integers(10, 101, n).astype(float)
    profit = np.maximum(w + rng.integers(-10, 11, n), 1).astype(float)
    cap = np.floor(rng.uniform(0.4, 0.6, k) * w.sum() / k)
    var = lambda i, s: i * k + s  # noqa: E731
    rows = _Rows()
    for i in range(n):
        rows.add([var(i, s) for s in range(k)], np.ones(k), LE, 1.0)
    for s in range(k):
        rows.add([var(i, s) for i in range(n)], w, LE, cap[s])
    c = np.repeat(profit, k)
    nv = n * k
    return rows.instance(
        "MultipleKnapsack", c, np.zeros(nv), np.ones(nv), np.full(nv, B), ObjSense.MAXIMIZE
    )


register(
    GeneratorClass(
        "KS",
        "Multiple Knapsack",
        (
            ParamSpec("n_items", int, 80, 1, 100_000, size=True),
            ParamSpec("n_knapsacks", int, 4, 1, 1000),
        ),
        multiple_knapsack,
        "A multiple knapsack problem: items with weights and profits are packed into "
        "several knapsacks of limited capacity. Binary variables assign an item to a "
        "knapsack, each item may be packed at most once, each knapsack has a capacity "
        "inequality, and the objective maximizes total packed profit.",
    )
)


# ---------------------------------------------- capacitated facility location
def facility_location(p: dict, rng: Rng) -> MilpInstance:
    nc, nf = p["n_customers"], p["n_facilities"]
    cust = rng.random(2 * nc).reshape(nc, 2)
    fac = rng.random(2 * nf).reshape(nf, 2)
    demand = rng.integers(5, 36, nc).astype(float)
    cap = rng.integers(10, 161, nf).astype(float)
    cap = np.floor(cap * p["ratio"] * demand.sum() / cap.sum())
    cap = np.maximum(cap, 1.0)
    fixed = np.floor(rng.uniform(100.0, 110.0, nf) * np.sqrt(cap) + rng.uniform(0.0, 90.0, nf))
    dist = np.sqrt(((cust[:, None, :] - fac[None, :, :]) ** 2).sum(axis=2))
    trans = np.round(10.0 * dist * demand[:, None], 2)
    # variables: y_f (open) then x_cf customer-major
    x = lambda ci, f: nf + ci * nf + f  # noqa: E731
    nv = nf + nc * nf
    rows = _Rows()
    for ci in range(nc):
        rows.add([x(ci, f) for f in range(nf)], np.ones(nf), EQ, 1.0)
    for f in range(nf):
        cols = [f] + [x(ci, f) for ci in range(nc)]
        rows.add(cols, np.concatenate(([-cap[f]], demand)), LE, 0.0)
    total = demand.sum()
    if cap.sum() < total:
        cap = cap * (total / cap.sum()) + 1.0
    rows.add(range(nf), cap, GE, total)
    c = np.concatenate((fixed, trans.reshape(-1)))
    vt = np.concatenate((np.full(nf, B), np.full(nc * nf, C)))
    return rows.instance("FacilityLocation", c, np.zeros(nv), np.ones(nv), vt, ObjSense.MINIMIZE)


register(
    GeneratorClass(
        "CFL",
        "Capacitated Facility Location",
        (
            ParamSpec("n_customers", int, 40, 1, 20_000, size=True),
            ParamSpec("n_facilities", int, 10, 1, 2000),
            ParamSpec("ratio", float, 5.0, 1.5, 100.0),
        ),
        facility_location,
        "A capacitated facility location problem: open facilities with fixed costs and "
        "limited capacity and serve every customer demand from open facilities. Binary "
        "variables open facilities, continuous variables give the fraction of a "
        "customer served by a facility, equality constraints satisfy each demand, "
        "capacity inequalities link service to opening, and the objective minimizes "
        "fixed plus transportation cost.",
    )
)


# ------------------------------------------------ fixed-charge network flow
def fixed_charge_flow(p: dict, rng: Rng) -> MilpInstance:
    n = p["n_nodes"]
    n_sinks = min(p["n_sinks"], n - 1)
    q = min(1.0, max(p["avg_degree"] - 1.0, 0.0) / max((n - 1) / 2.0, 1.0))
    arcs = [(i, i + 1) for i in range(n - 1)]
    extra = [(i, j) for i, j in _pairs(rng, n, q) if j > i + 1]
    arcs += extra
    sinks = rng.sample(np.arange(1, n), n_sinks)
    demand = rng.integers(10, 51, n_sinks).astype(float)
    total = demand.sum()
    n_chain = n - 1
    cap = np.concatenate((np.full(n_chain, total), rng.integers(int(total // 4) + 1, int(total) + 1, len(extra))))
    cap = cap.astype(float)
    unit = rng.integers(1, 11, len(arcs)).astype(float)
    fixed = rng.integers(50, 201, len(arcs)).astype(float)
    supply = np.zeros(n)
    supply[0] = total
    supply[sinks] -= demand
    # variables: per arc (x_a, y_a)
    na = len(arcs)
    out_arcs: list[list[int]] = [[] for _ in range(n)]
    in_arcs: list[list[int]] = [[] for _ in range(n)]
    for a, (i, j) in enumerate(arcs):
        out_arcs[i].append(a)
        in_arcs[j].append(a)
    rows = _Rows()
    for v in range(n):
        entries = sorted([(2 * a, 1.0) for a in out_arcs[v]] + [(2 * a, -1.0) for a in in_arcs[v]])
        rows.add([e[0] for e in entries], [e[1] for e in entries], EQ, supply[v])
    for a in range(na):
        rows.add((2 * a, 2 * a + 1), (1.0, -cap[a]), LE, 0.0)
    c = np.empty(2 * na)
    c[0::2], c[1::2] = unit, fixed
    upper = np.empty(2 * na)
    upper[0::2], upper[1::2] = cap, 1.0
    vt = np.empty(2 * na, dtype=np.int8)
    vt[0::2], vt[1::2] = C, B
    return rows.instance("FixedChargeFlow", c, np.zeros(2 * na), upper, vt, ObjSense.MINIMIZE)


register(
    GeneratorClass(
        "FCNF",
        "Fixed-Charge Network Flow",
        (
            ParamSpec("n_nodes", int, 30, 3, 5000, size=True),
            ParamSpec("avg_degree", float, 3.0, 1.0, 50.0),
            ParamSpec("n_sinks", int, 5, 1, 1000),
        ),
        fixed_charge_flow,
        "A fixed-charge network flow problem on a directed acyclic network: ship flow "
        "from a source to demand nodes paying a per unit cost on each arc and a fixed "
        "charge for every arc used. Continuous variables carry arc flow, binary "
        "variables activate arcs, flow conservation equalities hold at every node, "
        "big-M inequalities link flow to activation, and the objective minimizes total "
        "cost.",
    )
)


# ------------------------------------------------------------------- TSP MTZ
def tsp(p: dict, rng: Rng) -> MilpInstance:
    n = p["n_cities"]
    pts = rng.random(2 * n).reshape(n, 2)
    dist = np.round(100.0 * np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)))
    arcs = [(i, j) for i in range(n) for j in range(n) if i != j]
    idx = {a: k for k, a in enumerate(arcs)}
    nx_ = len(arcs)
    u = lambda i: nx_ + i - 1  # noqa: E731  (u_1 .. u_{n-1})
    nv = nx_ + n - 1
    rows = _Rows()
    for i in range(n):
        rows.add([idx[(i, j)] for j in range(n) if j != i], np.ones(n - 1), EQ, 1.0)
    for j in range(n):
        rows.add(sorted(idx[(i, j)] for i in range(n) if i != j), np.ones(n - 1), EQ, 1.0)
    for i in range(1, n):
        for j in range(1, n):
            if i == j:
                continue
            entries = sorted([(idx[(i, j)], float(n - 1)), (u(i), 1.0), (u(j), -1.0)])
            rows.add([e[0] for e in entries], [e[1] for e in entries], LE, n - 2)
    c = np.concatenate(([dist[i, j] for i, j in arcs], np.zeros(n - 1)))
    lower = np.concatenate((np.zeros(nx_), np.ones(n - 1)))
    upper = np.concatenate((np.ones(nx_), np.full(n - 1, n - 1.0)))
    vt = np.concatenate((np.full(nx_, B), np.full(n - 1, C)))
    return rows.instance("TravelingSalesman", c, lower, upper, vt, ObjSense.MINIMIZE)


register(
    GeneratorClass(
        "TSP",
        "Traveling Salesman Problem",
        (ParamSpec("n_cities", int, 12, 3, 300, size=True),),
        tsp,
        "A traveling salesman problem with Miller Tucker Zemlin subtour elimination: "
        "find a shortest tour visiting every city exactly once. Binary variables "
        "select directed arcs, degree equalities enter and leave every city once, "
        "continuous order variables with ordering inequalities forbid subtours, and "
        "the objective minimizes tour length.",
        size_exponent=2,
    )
)


# ------------------------------------------------------ generalized assignment
def generalized_assignment(p: dict, rng: Rng) -> MilpInstance:
    na, nt = p["n_agents"], p["n_tasks"]
    w = rng.integers(5, 26, na * nt).reshape(na, nt).astype(float)
    cost = rng.integers(10, 51, na * nt).reshape(na, nt).astype(float)
    cap = np.floor(0.8 * w.sum(axis=1) / na)
    pick = rng.integers(0, na, nt)
    load = np.zeros(na)
    np.add.at(load, pick, w[pick, np.arange(nt)])
    cap = np.maximum(cap, load)
    var = lambda a, t: a * nt + t  # noqa: E731
    rows = _Rows()
    for t in range(nt):
        rows.add([var(a, t) for a in range(na)], np.ones(na), EQ, 1.0)
    for a in range(na):
        rows.add([var(a, t) for t in range(nt)], w[a], LE, cap[a])
    nv = na * nt
    return rows.instance(
        "GeneralizedAssignment", cost.reshape(-1), np.zeros(nv), np.ones(nv), np.full(nv, B),
        ObjSense.MINIMIZE,
    )


register(
    GeneratorClass(
        "GA",
        "Generalized Assignment",
        (
            ParamSpec("n_agents", int, 8, 1, 1000, size=True),
            ParamSpec("n_tasks", int, 40, 1, 20_000, size=True),
        ),
        generalized_assignment,
        "A generalized assignment problem: assign every task to exactly one agent "
        "while respecting agent capacities. Binary variables assign tasks to agents, "
        "equality constraints assign each task once, knapsack inequalities bound each "
        "agent load, and the objective minimizes total assignment cost.",
        size_exponent=2,
    )
)


# ------------------------------------------------------------------ max-SAT
def max_sat(p: dict, rng: Rng) -> MilpInstance:
    nv, nc, k = p["n_vars"], p["n_clauses"], min(p["clause_len"], p["n_vars"])
    weights = np.empty(nc)
    rows = _Rows()
    for ci in range(nc):
        lits = rng.sample(nv, k)
        neg = rng.random(k) < 0.5
        weights[ci] = rng.integer(1, p["max_weight"] + 1)
        entries = sorted([(int(v), 1.0 if g else -1.0) for v, g in zip(lits, neg)] + [(nv + ci, 1.0)])
        rows.add([e[0] for e in entries], [e[1] for e in entries], LE, float(neg.sum()))
    c = np.concatenate((np.zeros(nv), weights))
    total = nv + nc
    return rows.instance(
        "MaxSat", c, np.zeros(total), np.ones(total), np.full(total, B), ObjSense.MAXIMIZE
    )


register(
    GeneratorClass(
        "SAT",
        "Max Satisfiability",
        (
            ParamSpec("n_vars", int, 60, 1, 50_000, size=True),
            ParamSpec("n_clauses", int, 180, 1, 200_000, size=True),
            ParamSpec("clause_len", int, 3, 1, 50),
            ParamSpec("max_weight", int, 10, 1, 1_000_000),
        ),
        max_sat,
        "A weighted maximum satisfiability problem: a boolean formula in conjunctive "
        "normal form whose clauses carry weights. Binary variables give truth values "
        "and binary clause indicators may be set only when a literal of the clause is "
        "true, and the objective maximizes the total weight of satisfied clauses.",
    )
)


# ---------------------------------------------- generalized independent set
def generalized_independent_set(p: dict, rng: Rng) -> MilpInstance:
    n = p["n_nodes"]
    edges = _pairs(rng, n, min(1.0, p["avg_degree"] / max(n - 1, 1)))
    if not edges:
        edges = [(0, 1)]
    removable = rng.random(len(edges)) < p["removable_frac"]
    w = rng.integers(1, p["max_weight"] + 1, n).astype(float)
    n_rem = int(removable.sum())
    rem_cost = rng.integers(1, p["max_removal_cost"] + 1, n_rem).astype(float)
    rows = _Rows()
    r = 0
    for (i, j), rem in zip(edges, removable):
        if rem:
            rows.add((i, j, n + r), (1.0, 1.0, -1.0), LE, 1.0)
            r += 1
        else:
            rows.add((i, j), (1.0, 1.0), LE, 1.0)
    c = np.concatenate((w, -rem_cost))
    total = n + n_rem
    return rows.instance(
        "GeneralizedIndependentSet", c, np.zeros(total), np.ones(total), np.full(total, B),
        ObjSense.MAXIMIZE,
    )


register(
    GeneratorClass(
        "GIS",
        "Generalized Independent Set",
        (
            ParamSpec("n_nodes", int, 80, 2, 20_000, size=True),
            ParamSpec("avg_degree", float, 4.0, 0.01, 1000.0),
            ParamSpec("removable_frac", float, 0.3, 0.0, 1.0),
            ParamSpec("max_weight", int, 100, 1, 1_000_000),
            ParamSpec("max_removal_cost", int, 20, 1, 1_000_000),
        ),
        generalized_independent_set,
        "A generalized independent set problem: select nodes of a graph to maximize "
        "node revenue where some edges may be removed at a cost. Binary variables pick "
        "nodes and removed edges, mandatory edges forbid selecting both endpoints, "
        "removable edges allow it only when the edge is paid for, and the objective "
        "maximizes revenue minus removal cost.",
    )
)


# ---------------------------------------------- multicommodity network flow
def multicommodity_flow(p: dict, rng: Rng) -> MilpInstance:
    n, k = p["n_nodes"], p["n_commodities"]
    arcs = [(i, (i + 1) % n) for i in range(n)] + [((i + 1) % n, i) for i in range(n)]
    if n == 2:
        arcs = [(0, 1), (1, 0)]
    present = set(arcs)
    q = min(1.0, max(p["avg_degree"] - 2.0, 0.0) / max(n - 1, 1))
    for i, j in _pairs(rng, n, q):
        if (i, j) not in present:
            arcs.append((i, j))
            present.add((i, j))
    origin = np.empty(k, dtype=np.int64)
    dest = np.empty(k, dtype=np.int64)
    for h in range(k):
        o, d = rng.sample(n, 2)
        origin[h], dest[h] = o, d
    demand = rng.integers(5, 21, k).astype(float)
    na = len(arcs)
    n_ring = 2 * n if n > 2 else 2
    cap = np.concatenate((np.full(n_ring, demand.sum()), rng.integers(10, 61, na - n_ring).astype(float)))
    unit = rng.integers(1, 11, na).astype(float)
    fixed = rng.integers(20, 101, na).astype(float)
    # variables: per arc [x_a0 .. x_a(k-1), y_a]
    stride = k + 1
    xv = lambda a, h: a * stride + h  # noqa: E731
    yv = lambda a: a * stride + k  # noqa: E731
    out_arcs: list[list[int]] = [[] for _ in range(n)]
    in_arcs: list[list[int]] = [[] for _ in range(n)]
    for a, (i, j) in enumerate(arcs):
        out_arcs[i].append(a)
        in_arcs[j].append(a)
    rows = _Rows()
    for h in range(k):
        for v in range(n):
            rhs = demand[h] if v == origin[h] else (-demand[h] if v == dest[h] else 0.0)
            entries = sorted([(xv(a, h), 1.0) for a in out_arcs[v]] + [(xv(a, h), -1.0) for a in in_arcs[v]])
            rows.add([e[0] for e in entries], [e[1] for e in entries], EQ, rhs)
    for a in range(na):
        rows.add([xv(a, h) for h in range(k)] + [yv(a)], [1.0] * k + [-cap[a]], LE, 0.0)
    nv = na * stride
    c = np.empty(nv)
    upper = np.empty(nv)
    vt = np.empty(nv, dtype=np.int8)
    for a in range(na):
        for h in range(k):
            c[xv(a, h)] = unit[a]
            upper[xv(a, h)] = min(cap[a], demand[h])
            vt[xv(a, h)] = C
        c[yv(a)], upper[yv(a)], vt[yv(a)] = fixed[a], 1.0, B
    return rows.instance("MulticommodityFlow", c, np.zeros(nv), upper, vt, ObjSense.MINIMIZE)


register(
    GeneratorClass(
        "NF",
        "Multicommodity Network Flow",
        (
            ParamSpec("n_nodes", int, 15, 2, 2000, size=True),
            ParamSpec("avg_degree", float, 3.0, 2.0, 100.0),
            ParamSpec("n_commodities", int, 4, 1, 500),
        ),
        multicommodity_flow,
        "A multicommodity fixed-charge network design problem: route several "
        "commodities from their origins to destinations over a directed network whose "
        "arcs must be opened at a fixed cost. Continuous variables carry commodity flow "
        "on arcs, binary variables open arcs, conservation equalities hold for every "
        "commodity and node, shared capacity inequalities bound total arc flow, and the "
        "objective minimizes routing plus design cost.",
    )
)

MANDATORY = ("SC", "IS", "CA", "KS", "CFL", "FCNF", "TSP", "GA")
TRAIN_SEEDS = ("IS", "SC", "CA", "CFL", "KS", "GIS", "NF", "SAT")
