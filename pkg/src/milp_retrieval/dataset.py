"""Paired (instance, generator, description) data for training and libraries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import BipartiteGraph, featurize
from .generators import GeneratorSpec, describe_instance, generate_instance, get_class, jitter_params
from .milp import MilpInstance
from .model.text import TextEmbedder
from .rng import mix_seed

_INSTANCE_STREAM = 0x1257A
_JITTER_STREAM = 0x317


@dataclass
class Sample:
    spec: GeneratorSpec
    instance: MilpInstance
    graph: BipartiteGraph
    description: str


def class_specs(class_id: str, count: int, seed: int, params: dict | None = None) -> list[GeneratorSpec]:
    """``count`` specs of one class with jittered sizes and distinct seeds."""
    base = dict(params or get_class(class_id).defaults())
    out = []
    for i in range(count):
        jseed = mix_seed(seed, _JITTER_STREAM, i)
        p = jitter_params(class_id, base, jseed)
        out.append(GeneratorSpec(class_id, p, mix_seed(seed, _INSTANCE_STREAM, i)))
    return out


def class_seed(seed: int, class_id: str) -> int:
    return mix_seed(seed, *class_id.encode("ascii"))


def make_sample(spec: GeneratorSpec, featurize_nodes: int = 200) -> Sample:
    inst = generate_instance(spec)
    graph = featurize(inst, max_nodes=featurize_nodes)[0]
    return Sample(spec, inst, graph, describe_instance(spec.class_id, inst))


def build_samples(
    class_ids, per_class: int, seed: int, featurize_nodes: int = 200
) -> list[Sample]:
    out = []
    for cid in class_ids:
        for spec in class_specs(cid, per_class, class_seed(seed, cid)):
            out.append(make_sample(spec, featurize_nodes))
    return out


def text_matrix(embedder: TextEmbedder, samples) -> np.ndarray:
    return np.array([embedder.encode(s.description) for s in samples])
