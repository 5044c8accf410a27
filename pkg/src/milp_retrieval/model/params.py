"""Parameter layout, initialisation and closed-form size."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import Rng, mix_seed
from .config import ModelConfig

N_VAR_IN = 16
N_CONS_IN = 7


def param_shapes(cfg: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Tensor names and shapes in canonical (checkpoint) order."""
    E, F, D = cfg.emb_size, cfg.ffn_dim, cfg.out_dim
    shapes: list[tuple[str, tuple[int, ...]]] = [
        ("var.w1", (N_VAR_IN, E)), ("var.b1", (E,)), ("var.w2", (E, E)), ("var.b2", (E,)),
        ("cons.w1", (N_CONS_IN, E)), ("cons.b1", (E,)), ("cons.w2", (E, E)), ("cons.b2", (E,)),
        ("edge.w", (E,)), ("edge.b", (E,)),
        ("summary.s0", (E,)),
    ]
    for k in range(cfg.gcn_layers):
        p = f"conv{k}."
        shapes += [
            (p + "row_w", (E, E)), (p + "row_u", (E, E)), (p + "row_b", (E,)),
            (p + "s1_w", (E, E)), (p + "s1_b", (E,)),
            (p + "col_w", (E, E)), (p + "col_u", (E, E)), (p + "col_b", (E,)),
            (p + "s2_w", (E, E)), (p + "s2_b", (E,)),
        ]
    for k in range(cfg.attn_layers):
        p = f"attn{k}."
        shapes += [
            (p + "ln1_g", (E,)), (p + "ln1_b", (E,)),
            (p + "wq", (E, E)), (p + "bq", (E,)),
            (p + "wk", (E, E)),
            (p + "wv", (E, E)), (p + "bv", (E,)),
            (p + "wo", (E, E)), (p + "bo", (E,)),
            (p + "ln2_g", (E,)), (p + "ln2_b", (E,)),
            (p + "f_w1", (E, F)), (p + "f_b1", (F,)),
            (p + "f_w2", (F, E)), (p + "f_b2", (E,)),
        ]
    shapes += [("final.ln_g", (E,)), ("final.ln_b", (E,)), ("out.w", (E, D)), ("out.b", (D,))]
    return shapes


def closed_form_count(cfg: ModelConfig) -> int:
    """Parameter count from the layer widths (no key bias: softmax ignores it)."""
    E, F, D = cfg.emb_size, cfg.ffn_dim, cfg.out_dim
    var_mlp = N_VAR_IN * E + E + E * E + E
    cons_mlp = N_CONS_IN * E + E + E * E + E
    conv = 6 * E * E + 4 * E
    attn = 4 * E * E + 2 * E * F + F + 8 * E
    return var_mlp + cons_mlp + 2 * E + E + cfg.gcn_layers * conv + cfg.attn_layers * attn + 2 * E + E * D + D


def _fan_in(name: str, shape: tuple[int, ...], cfg: ModelConfig) -> int:
    """Input width of the layer a tensor belongs to."""
    if len(shape) == 2:
        return shape[0]
    special = {"var.b1": N_VAR_IN, "cons.b1": N_CONS_IN, "edge.w": 1, "edge.b": 1}
    if name in special:
        return special[name]
    if name.endswith("f_b2"):
        return cfg.ffn_dim
    return cfg.emb_size


@dataclass
class ModelParams:
    cfg: ModelConfig
    tensors: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def names(self) -> list[str]:
        return [n for n, _ in param_shapes(self.cfg)]

    def count(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def copy(self) -> "ModelParams":
        return ModelParams(self.cfg, {k: v.copy() for k, v in self.tensors.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {k: np.zeros_like(v) for k, v in self.tensors.items()}

    def equals(self, other: "ModelParams") -> bool:
        return self.cfg == other.cfg and all(
            np.array_equal(self.tensors[k], other.tensors[k]) for k in self.names()
        )


def init_model(cfg: ModelConfig) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights; LayerNorm gain 1, bias 0.

    Each tensor draws from its own stream keyed by (seed, tensor index) so
    adding layers leaves earlier tensors unchanged.
    """
    cfg.validate()
    tensors: dict[str, np.ndarray] = {}
    for idx, (name, shape) in enumerate(param_shapes(cfg)):
        if "ln" in name.split(".")[-1]:
            tensors[name] = np.ones(shape) if name.endswith("_g") else np.zeros(shape)
            continue
        bound = 1.0 / np.sqrt(_fan_in(name, shape, cfg))
        size = int(np.prod(shape))
        tensors[name] = Rng(mix_seed(cfg.seed, idx)).uniform(-bound, bound, size).reshape(shape)
    return ModelParams(cfg, tensors)
