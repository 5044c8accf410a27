import dataclasses

import numpy as np
import pytest

from milp_retrieval.errors import DimensionMismatch, MilpRetrievalError
from milp_retrieval.features import BipartiteGraph, build_bipartite, dump_graph, featurize, load_graph
from milp_retrieval.generators import GeneratorSpec, generate_instance
from milp_retrieval.lp import solve_lp_relaxation
from milp_retrieval.milp import MilpInstance, RowSense, VarType


def test_hand_single_variable():
    inst = MilpInstance.build([1.0], [[1.0]], [RowSense.LE], [1.0], [0.0], [1.0])
    g, sol, _ = featurize(inst)
    v = g.var_feats[0]
    assert sol.x[0] == 0.0
    assert v[0] == 1.0
    assert v[3 + 1] == 1.0  # continuous
    assert (v[5], v[6], v[9], v[10]) == (1, 1, 1, 0)
    assert v[11:15].tolist() == [1, 0, 0, 0]
    assert v[15] == 1.0


def test_hand_constraint_features():
    inst = MilpInstance.build([-1, -1], [[1, 1]], [RowSense.LE], [1], vtypes=[VarType.BINARY] * 2)
    g = featurize(inst)[0]
    c = g.cons_feats[0]
    assert c[0] == 0.0
    assert c[1] == 1.0
    assert c[2] == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert c[6] == 1.0
    assert c[3] == 0.0  # LE rows never report the lhs indicator


def test_set_cover_bias():
    inst = generate_instance(GeneratorSpec("SC", {"n_rows": 20, "n_cols": 40, "density": 0.2}, 0))
    g = featurize(inst)[0]
    nnz = np.diff(inst.A.indptr)
    assert np.allclose(g.cons_feats[:, 2], 1 / np.sqrt(nnz), rtol=0, atol=1e-15)


def test_structure_is_lossless():
    inst = generate_instance(GeneratorSpec("CFL", {"n_customers": 8, "n_facilities": 4}, 1))
    g = featurize(inst)[0]
    pattern = np.zeros((g.m, g.n), dtype=bool)
    pattern[g.edge_cons, g.edge_var] = True
    assert np.array_equal(pattern, inst.A.toarray() != 0)


def test_indicators_binary_and_onehots():
    inst = generate_instance(GeneratorSpec("FCNF", {"n_nodes": 10}, 2))
    g = featurize(inst)[0]
    for col in (1, 2, 3, 4, 5, 6, 9, 10, 11, 12, 13, 14):
        assert set(np.unique(g.var_feats[:, col])) <= {0.0, 1.0}
    assert np.all(g.var_feats[:, 1:5].sum(axis=1) == 1)
    assert np.all(g.var_feats[:, 11:15].sum(axis=1) == 1)
    for col in (3, 4):
        assert set(np.unique(g.cons_feats[:, col])) <= {0.0, 1.0}


def test_permutation_equivariance():
    inst = generate_instance(GeneratorSpec("KS", {"n_items": 10, "n_knapsacks": 2}, 3))
    sol = solve_lp_relaxation(inst)
    g = build_bipartite(inst, sol)
    rng = np.random.default_rng(1)
    rp, cp = rng.permutation(inst.n_cons), rng.permutation(inst.n_vars)
    inst_p = inst.permuted(rp, cp)
    sol_p = dataclasses.replace(sol, x=sol.x[cp], y=sol.y[rp], basis=sol.basis[cp])
    gp = build_bipartite(inst_p, sol_p)
    ref = g.permuted(rp, cp)
    assert np.array_equal(gp.var_feats, ref.var_feats)
    assert np.array_equal(gp.cons_feats, ref.cons_feats)
    assert sorted(gp.edges()) == sorted(ref.edges())


def test_shape_mismatch():
    inst = MilpInstance.build([1.0, 2.0], [[1.0, 1.0]], [RowSense.GE], [1.0])
    sol = solve_lp_relaxation(inst)
    with pytest.raises(DimensionMismatch):
        build_bipartite(inst, dataclasses.replace(sol, x=np.zeros(3)))
    with pytest.raises(DimensionMismatch):
        BipartiteGraph(np.zeros((2, 15)), np.zeros((1, 7)), np.zeros(0, int), np.zeros(0, int), np.zeros(0))


def test_dump_load_roundtrip():
    inst = generate_instance(GeneratorSpec("GA", {"n_agents": 3, "n_tasks": 8}, 0))
    g = featurize(inst)[0]
    back = load_graph(dump_graph(g))
    assert np.array_equal(back.var_feats, g.var_feats)
    assert np.array_equal(back.cons_feats, g.cons_feats)
    assert back.edges() == g.edges()
    with pytest.raises(MilpRetrievalError):
        load_graph(dump_graph(g).replace("END", ""))
