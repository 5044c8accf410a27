import numpy as np
import pytest

from milp_retrieval.errors import DegenerateGroup
from milp_retrieval.generators import GeneratorSpec, generate_instance
from milp_retrieval.milp import instance_stats
from milp_retrieval.simlib import (
    embed_instance,
    embed_sim,
    js_structural_divergence,
    sim_matrix,
    sim_matrix_from_embeddings,
)

from oracles import js_reference

SMALL = {
    "KS": {"n_items": 10, "n_knapsacks": 2},
    "SC": {"n_rows": 12, "n_cols": 20, "density": 0.2},
    "CA": {"n_items": 10, "n_bids": 20},
}


def _insts(cid, seeds):
    return [generate_instance(GeneratorSpec(cid, SMALL[cid], s)) for s in seeds]


def test_self_similarity_and_symmetry(tiny_model):
    a, b = _insts("KS", [0]) + _insts("SC", [0])
    assert embed_sim(tiny_model, a, a) == pytest.approx(1.0, abs=1e-12)
    assert embed_sim(tiny_model, a, b) == embed_sim(tiny_model, b, a)


def test_matrix(tiny_model):
    insts = _insts("KS", [0, 1]) + _insts("CA", [0])
    mat = sim_matrix(tiny_model, insts, ["a", "b", "c"])
    assert np.array_equal(mat.values, mat.values.T)
    assert np.all(np.abs(np.diag(mat.values) - 1) < 1e-12)
    lines = mat.to_csv().splitlines()
    assert lines[0] == ",a,b,c" and len(lines) == 4
    one = sim_matrix_from_embeddings(np.array([[1.0, 0.0]]), ["x"])
    assert one.values.tolist() == [[1.0]]


def test_values_clipped():
    X = np.array([[1.0 + 1e-15, 0.0], [1.0, 0.0]])
    assert sim_matrix_from_embeddings(X, ["a", "b"]).values.max() <= 1.0


def test_js_identical_is_zero():
    A = _insts("SC", range(4))
    assert js_structural_divergence(A, A) == 0.0


def test_js_matches_reference():
    A = _insts("SC", range(5))
    B = _insts("KS", range(6))
    SA = np.array([instance_stats(i).as_array() for i in A])
    SB = np.array([instance_stats(i).as_array() for i in B])
    ref = np.mean([js_reference(SA[:, f], SB[:, f], 10, 1.0) for f in range(SA.shape[1])])
    assert js_structural_divergence(A, B) == pytest.approx(ref, abs=1e-12)
    assert js_structural_divergence(A, B) == js_structural_divergence(B, A)


def test_js_disjoint_support_unsmoothed_is_one():
    SA = np.zeros((3, 11))
    SB = np.ones((3, 11))
    assert js_structural_divergence(SA, SB, smoothing=0.0) == pytest.approx(1.0, abs=1e-12)
    # add-one smoothing keeps every bin positive, so the value stays below 1
    assert js_structural_divergence(SA, SB) < 1.0


def test_js_degenerate():
    with pytest.raises(DegenerateGroup):
        js_structural_divergence(_insts("SC", [0]), _insts("SC", [1, 2]))
    with pytest.raises(DegenerateGroup):
        js_structural_divergence(np.zeros((3, 4)), np.zeros((3, 4)))


def test_embed_instance_unit(tiny_model):
    v = embed_instance(tiny_model, _insts("CA", [3])[0])
    assert abs(np.linalg.norm(v) - 1) < 1e-9
