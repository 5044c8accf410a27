import dataclasses
import json

import numpy as np
import pytest

from milp_retrieval.errors import CorruptLibrary, DimensionMismatch, EmptyLibrary, VersionMismatch
from milp_retrieval.generators import GeneratorSpec, generate_instance
from milp_retrieval.library import (
    Library,
    build_library,
    load_library,
    retrieve,
    retrieve_and_generate,
    retrieve_embedding,
    save_library,
)
from milp_retrieval.lp import Limits
from milp_retrieval.milp import RowSense
from milp_retrieval.simlib import embed_instance

SPECS = [
    GeneratorSpec("CA", {"n_items": 10, "n_bids": 20}, 1),
    GeneratorSpec("KS", {"n_items": 10, "n_knapsacks": 2}, 2),
    GeneratorSpec("SC", {"n_rows": 12, "n_cols": 20, "density": 0.2}, 3),
]


@pytest.fixture(scope="module")
def lib(tiny_model):
    return build_library(SPECS, 3, tiny_model, Limits(max_nodes=2000, max_seconds=10))


def test_build(lib):
    assert lib.class_ids() == ["CA", "KS", "SC"]
    for e in lib.entries:
        assert len(e.instance_files) == e.embeddings.shape[0] == 3
        assert np.allclose(np.linalg.norm(e.embeddings, axis=1), 1.0, atol=1e-12)
        assert all(e.feasible_flags)


def test_per_class_one(tiny_model):
    one = build_library(SPECS[:2], 1, tiny_model)
    assert [e.embeddings.shape[0] for e in one.entries] == [1, 1]


def test_zero_budget_is_empty(tiny_model):
    with pytest.raises(EmptyLibrary):
        build_library(SPECS, 2, tiny_model, Limits(max_nodes=0))


def test_save_load_roundtrip(lib, tmp_path):
    save_library(lib, tmp_path / "lib")
    back = load_library(tmp_path / "lib")
    assert back.model_ref == lib.model_ref and back.class_ids() == lib.class_ids()
    for a, b in zip(lib.entries, back.entries):
        assert a.generator == b.generator and a.instance_files == b.instance_files
        assert a.instance_specs == b.instance_specs
        assert np.array_equal(b.embeddings, a.embeddings.astype(np.float32).astype(np.float64))
        assert back.load_instance(a.class_id, 0).equals(a.instances[0])
    # saving the loaded copy reproduces the bytes
    save_library(back, tmp_path / "lib2")
    for rel in ("manifest.json", "embeddings/KS.emb", "instances/SC/SC_2.mps"):
        assert (tmp_path / "lib" / rel).read_bytes() == (tmp_path / "lib2" / rel).read_bytes()


def test_corruption(lib, tmp_path):
    root = save_library(lib, tmp_path / "lib")
    emb = root / "embeddings" / "CA.emb"
    emb.write_bytes(emb.read_bytes()[:-7])
    with pytest.raises(CorruptLibrary):
        load_library(root)
    root = save_library(lib, tmp_path / "lib")
    man = json.loads((root / "manifest.json").read_text())
    man["format_version"] = 99
    (root / "manifest.json").write_text(json.dumps(man))
    with pytest.raises(VersionMismatch):
        load_library(root)
    with pytest.raises(CorruptLibrary):
        load_library(tmp_path / "missing")


def test_stored_instance_scores_one(lib, tiny_model):
    inst = lib.entries[1].instances[2]
    hit = retrieve(lib, tiny_model, inst)
    assert hit.class_id == "KS"
    assert hit.score == pytest.approx(1.0, abs=1e-6)


def test_single_entry(lib, tiny_model):
    single = Library([lib.entries[0]], lib.model_ref)
    target = generate_instance(GeneratorSpec("KS", SPECS[1].params, 99))
    x = embed_instance(tiny_model, target)
    hit = retrieve(single, tiny_model, target)
    assert hit.class_id == "CA"
    assert hit.score == pytest.approx(float(np.max(lib.entries[0].embeddings @ x)), abs=1e-15)


def test_determinism_scaling_and_growth(lib, tiny_model):
    target = generate_instance(GeneratorSpec("SC", SPECS[2].params, 77))
    a = retrieve(lib, tiny_model, target)
    b = retrieve(lib, tiny_model, target)
    assert (a.class_id, a.score) == (b.class_id, b.score)
    x = embed_instance(tiny_model, target)
    halved = Library([dataclasses.replace(e, embeddings=0.5 * e.embeddings) for e in lib.entries], lib.model_ref)
    assert retrieve_embedding(halved, x).class_id == a.class_id
    partial = Library(lib.entries[:1], lib.model_ref)
    assert retrieve_embedding(partial, x).score <= retrieve_embedding(lib, x).score


def test_tie_breaks_to_lowest_id(lib):
    e = lib.entries[0]
    twin = dataclasses.replace(e, class_id="AAA")
    tied = Library([e, twin], lib.model_ref)
    assert retrieve_embedding(tied, e.embeddings[0]).class_id == "AAA"


def test_dimension_mismatch(lib):
    with pytest.raises(DimensionMismatch):
        retrieve_embedding(lib, np.ones(5) / np.sqrt(5))


def test_retrieve_and_generate(lib, tiny_model):
    sc_only = Library([lib.entries[2]], lib.model_ref)
    target = generate_instance(GeneratorSpec("SC", SPECS[2].params, 5))
    hit, insts = retrieve_and_generate(sc_only, tiny_model, target, 4, seed=1)
    assert len(insts) == 4 and hit.class_id == "SC"
    assert all(np.all(i.senses == RowSense.GE) for i in insts)
    _, again = retrieve_and_generate(sc_only, tiny_model, target, 4, seed=1)
    assert all(a.equals(b) for a, b in zip(insts, again))


@pytest.mark.parametrize("spec,big", [
    (GeneratorSpec("SC", {"n_rows": 12, "n_cols": 20, "density": 0.2}, 0), {"n_rows": 24, "n_cols": 40, "density": 0.2}),
    (GeneratorSpec("TSP", {"n_cities": 8}, 0), {"n_cities": 11}),
])
def test_scale_to_target(tiny_model, spec, big):
    one = build_library([spec], 2, tiny_model)
    target = generate_instance(spec.with_params(big).with_seed(42))
    base = generate_instance(spec)
    assert target.n_vars >= 1.8 * base.n_vars
    hit, insts = retrieve_and_generate(one, tiny_model, target, 5, scale_to_target=True)
    median = float(np.median([i.n_vars for i in insts]))
    assert abs(median - target.n_vars) <= 0.3 * target.n_vars
    assert hit.generator.params != spec.params
