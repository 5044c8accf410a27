import math

import numpy as np
import pytest

from milp_retrieval.errors import CorruptCheckpoint, DegenerateBatch, EmptyText, InvalidConfig, InvalidK
from milp_retrieval.features import BipartiteGraph, featurize
from milp_retrieval.generators import GeneratorSpec, generate_instance
from milp_retrieval.model import (
    ModelConfig,
    TextEmbedder,
    closed_form_count,
    contrastive_loss,
    contrastive_loss_grad,
    encode_milp,
    init_model,
    kway_from_embeddings,
    load_text_vectors,
    param_shapes,
    prepare,
    split_indices,
    train,
)
from milp_retrieval.model.checkpoint import checkpoint_bytes, checkpoint_from_bytes, checkpoint_id
from milp_retrieval.model.encoder import forward
from milp_retrieval.model.train import batch_gradient, epoch_lr

from oracles import clip_loss_reference


def _random_graph(rng, n, m, k):
    ec = rng.integers(0, m, k)
    ev = rng.integers(0, n, k)
    return BipartiteGraph(rng.standard_normal((n, 16)), rng.standard_normal((m, 7)), ec, ev, rng.standard_normal(k))


@pytest.fixture(scope="module")
def graphs():
    out = []
    for cid, p in [("KS", {"n_items": 10, "n_knapsacks": 2}), ("SC", {"n_rows": 12, "n_cols": 20, "density": 0.2}),
                   ("IS", {"n_nodes": 15, "edge_prob": 0.2}), ("GA", {"n_agents": 3, "n_tasks": 6})]:
        for seed in range(3):
            out.append(featurize(generate_instance(GeneratorSpec(cid, p, seed)))[0])
    return out


class TestConfig:
    def test_defaults_and_toy(self):
        cfg = ModelConfig()
        assert (cfg.emb_size, cfg.out_dim, cfg.ffn_dim, cfg.temperature) == (64, 4096, 256, 1.0)
        toy = ModelConfig.toy()
        assert (toy.sampled_nodes, toy.out_dim) == (128, 256)

    def test_invalid(self):
        with pytest.raises(InvalidConfig):
            ModelConfig(emb_size=10, attn_heads=4)
        with pytest.raises(InvalidConfig):
            ModelConfig(temperature=0)
        with pytest.raises(InvalidConfig):
            ModelConfig.from_dict({"nope": 1})

    def test_dict_roundtrip(self):
        cfg = ModelConfig.toy(seed=5)
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg


class TestParams:
    def test_count_matches_closed_form(self, tiny_cfg):
        for cfg in (tiny_cfg, ModelConfig.toy(), ModelConfig()):
            assert sum(int(np.prod(s)) for _, s in param_shapes(cfg)) == closed_form_count(cfg)
        assert init_model(ModelConfig.toy()).count() == closed_form_count(ModelConfig.toy())

    def test_toy_count_frozen(self):
        # hand total for E=64, F=256, D=256, 2 conv layers, 6 attention layers
        # 5248 + 4672 + 192 + 2*24832 + 6*49920 + 128 + 16640
        assert closed_form_count(ModelConfig.toy()) == 376_064

    def test_same_seed_same_params(self, tiny_cfg):
        assert init_model(tiny_cfg).equals(init_model(tiny_cfg))
        assert not init_model(tiny_cfg).equals(init_model(tiny_cfg.with_(seed=1)))


class TestEncoder:
    def test_unit_norm_and_determinism(self, tiny_model, graphs):
        for g in graphs:
            a = encode_milp(tiny_model, g, 3)
            assert abs(np.linalg.norm(a) - 1.0) < 1e-9
            assert np.array_equal(a, encode_milp(tiny_model, g, 3))

    def test_permutation_invariance_all_nodes(self, tiny_model, graphs):
        g = graphs[0]
        rng = np.random.default_rng(0)
        gp = g.permuted(rng.permutation(g.m), rng.permutation(g.n))
        a = encode_milp(tiny_model, g, None)
        b = encode_milp(tiny_model, gp, None)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_sampling_changes_tokens(self, tiny_model, graphs):
        g = graphs[3]
        assert g.n + g.m > tiny_model.cfg.sampled_nodes
        a = encode_milp(tiny_model, g, 1)
        b = encode_milp(tiny_model, g, 2)
        assert not np.array_equal(a, b)


class TestLoss:
    def test_two_orthonormal_pairs(self):
        P = np.eye(2)
        assert contrastive_loss(P, P) == pytest.approx(-math.log(math.e / (math.e + 1)), abs=1e-12)

    def test_matches_double_sum(self):
        rng = np.random.default_rng(3)
        for N in (2, 3, 7):
            P = rng.standard_normal((N, 5))
            T = rng.standard_normal((N, 5))
            for tau in (1.0, 0.1):
                assert contrastive_loss(P, T, tau) == pytest.approx(clip_loss_reference(P, T, tau), rel=1e-12)

    def test_low_temperature_limit(self):
        P = np.eye(4)
        assert contrastive_loss(P, P, 1e-3) < 1e-12

    def test_joint_permutation(self):
        rng = np.random.default_rng(4)
        P, T = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))
        perm = rng.permutation(5)
        assert contrastive_loss(P[perm], T[perm]) == pytest.approx(contrastive_loss(P, T), rel=1e-14)

    def test_gradient_against_differences(self):
        rng = np.random.default_rng(5)
        P, T = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
        _, dP, dT = contrastive_loss_grad(P, T, 0.5)
        h = 1e-6
        for X, dX in ((P, dP), (T, dT)):
            num = np.zeros_like(X)
            for idx in np.ndindex(X.shape):
                old = X[idx]
                X[idx] = old + h
                fp = contrastive_loss(P, T, 0.5)
                X[idx] = old - h
                fm = contrastive_loss(P, T, 0.5)
                X[idx] = old
                num[idx] = (fp - fm) / (2 * h)
            assert np.allclose(dX, num, atol=1e-8)

    def test_degenerate(self):
        with pytest.raises(DegenerateBatch):
            contrastive_loss(np.ones((1, 3)), np.ones((1, 3)))


class TestText:
    def test_whitespace_and_case(self):
        e = TextEmbedder(64)
        assert np.array_equal(e.encode("set cover"), e.encode("  Set   COVER "))

    def test_disjoint_vocabulary(self):
        e = TextEmbedder(4096, magnitude_window=0)
        assert abs(e.encode("alpha beta") @ e.encode("gamma delta")) < 1e-12

    def test_magnitude_tokens_share_cells(self):
        e = TextEmbedder(256)
        near = e.encode("300 variables") @ e.encode("310 variables")
        far = e.encode("300 variables") @ e.encode("900 variables")
        assert near > far

    def test_empty(self):
        with pytest.raises(EmptyText):
            TextEmbedder().encode(" ,.; ")

    def test_load_vectors(self, tmp_path):
        f = tmp_path / "v.csv"
        f.write_text("a,3,4\nb,0,2\n")
        v = load_text_vectors(f)
        assert np.allclose(v["a"], [0.6, 0.8]) and np.allclose(v["b"], [0, 1])


class TestCheckpoint:
    def test_roundtrip(self, tiny_model, tmp_path):
        data = checkpoint_bytes(tiny_model)
        assert checkpoint_from_bytes(data).equals(tiny_model)
        assert checkpoint_id(tiny_model) == checkpoint_id(checkpoint_from_bytes(data))

    def test_corruption(self, tiny_model):
        data = bytearray(checkpoint_bytes(tiny_model))
        with pytest.raises(CorruptCheckpoint):
            checkpoint_from_bytes(bytes(data[:-10]))
        data[40] ^= 1
        with pytest.raises(CorruptCheckpoint):
            checkpoint_from_bytes(bytes(data))
        with pytest.raises(CorruptCheckpoint):
            checkpoint_from_bytes(b"nonsense" * 10)


class TestTraining:
    def test_kway(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((12, 8))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        assert kway_from_embeddings(X, X, 1) == (1.0, 1.0)
        assert kway_from_embeddings(X, X, 4) == (1.0, 1.0)
        with pytest.raises(InvalidK):
            kway_from_embeddings(X, X, 13)

    def test_kway_ties_fail(self):
        P = np.ones((4, 2)) / np.sqrt(2)
        assert kway_from_embeddings(P, P, 2) == (0.0, 0.0)

    def test_kway_untrained_near_chance(self, graphs):
        model = init_model(ModelConfig(emb_size=8, gcn_layers=1, attn_layers=1, attn_heads=2, out_dim=16))
        P = np.array([encode_milp(model, g) for g in graphs])
        rng = np.random.default_rng(9)
        T = rng.standard_normal(P.shape)
        T /= np.linalg.norm(T, axis=1, keepdims=True)
        acc = kway_from_embeddings(P, T, 4, trials=500, seed=1)
        assert 0.15 <= acc[0] <= 0.35 and 0.15 <= acc[1] <= 0.35

    def test_split(self):
        tr, va = split_indices(160, 0.9, 0)
        assert (tr.size, va.size) == (144, 16)
        assert set(tr) | set(va) == set(range(160)) and not set(tr) & set(va)

    def test_cosine_schedule(self):
        cfg = ModelConfig.toy(epochs=4)
        lrs = [epoch_lr(cfg, e) for e in range(1, 5)]
        assert lrs[0] == cfg.lr and all(a > b for a, b in zip(lrs, lrs[1:]))
        assert epoch_lr(cfg.with_(lr_schedule="constant"), 3) == cfg.lr

    def test_zero_lr_leaves_params(self, tiny_model, graphs):
        cfg = tiny_model.cfg.with_(lr=0.0, epochs=1, batch_size=4)
        T = np.eye(len(graphs), 16)
        out, hist = train(tiny_model, graphs, T, cfg)
        assert out.equals(tiny_model) and len(hist) == 1

    def test_training_is_deterministic_and_descends(self, tiny_model, graphs):
        cfg = tiny_model.cfg.with_(epochs=3, batch_size=6, lr=3e-3, temperature=0.2)
        T = np.eye(len(graphs), 16)
        a, ha = train(tiny_model, graphs, T, cfg)
        b, hb = train(tiny_model, graphs, T, cfg)
        assert a.equals(b)
        assert [r.train_loss for r in ha] == [r.train_loss for r in hb]

    def test_fixed_batch_loss_decreases(self, tiny_model, graphs):
        from milp_retrieval.model.train import Adam

        params = tiny_model.copy()
        ops = [prepare(g) for g in graphs[:6]]
        T = np.eye(6, 16)
        seeds = [None] * 6
        opt = Adam(params, 3e-3)
        losses = []
        for _ in range(20):
            loss, grads = batch_gradient(params, ops, T, seeds, 0.5)
            assert math.isfinite(loss)
            losses.append(loss)
            opt.step(params, grads)
        assert losses[-1] < losses[0]

    def test_random_graph_forward_backward_shapes(self, tiny_model):
        rng = np.random.default_rng(0)
        g = _random_graph(rng, 2, 1, 2)
        out, cache = forward(tiny_model, g, None, keep_cache=True)
        assert out.shape == (16,)
