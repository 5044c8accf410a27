"""Generator registry, parameter schemas and the spec type.

A generator class is a seeded procedure ``(params, rng) -> MilpInstance``.
Each class declares its parameters with valid ranges and marks which of them
control instance size; ``scale_params`` and ``jitter_params`` only touch
those.  ``size_exponent`` records how the variable count grows with the size
factor (1: linear, 2: quadratic) so callers can invert a target size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from ..errors import InvalidParams, UnknownClass
from ..milp import MilpInstance, VarType
from ..rng import Rng, mix_seed

_JITTER_STREAM = 0x4A177E55


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: type  # int or float
    default: float
    low: float
    high: float
    size: bool = False

    def coerce(self, value) -> int | float:
        if self.kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise InvalidParams(f"{self.name} must be an integer, got {value}")
            return int(value)
        return float(value)


@dataclass(frozen=True)
class GeneratorClass:
    class_id: str
    title: str
    params: tuple[ParamSpec, ...]
    build: Callable[[dict, Rng], MilpInstance]
    description: str
    size_exponent: int = 1
    check: Callable[[dict], str | None] | None = None

    def schema(self) -> dict[str, ParamSpec]:
        return {p.name: p for p in self.params}

    def defaults(self) -> dict[str, int | float]:
        return {p.name: p.coerce(p.default) for p in self.params}

    def size_params(self) -> list[str]:
        return [p.name for p in self.params if p.size]


@dataclass(frozen=True)
class GeneratorSpec:
    """The retrievable "code": a class, its parameters and a seed."""

    class_id: str
    params: Mapping[str, int | float] = field(default_factory=dict)
    seed: int = 0
    description: str = ""

    def __post_init__(self) -> None:
        gen = get_class(self.class_id)
        object.__setattr__(self, "params", validate_params(self.class_id, self.params))
        object.__setattr__(self, "seed", int(self.seed) & ((1 << 64) - 1))
        if not self.description:
            object.__setattr__(self, "description", gen.description)

    def with_params(self, params: Mapping[str, int | float]) -> "GeneratorSpec":
        return GeneratorSpec(self.class_id, params, self.seed, self.description)

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(self.class_id, self.params, seed, self.description)

    def to_dict(self) -> dict:
        return {
            "class_id": self.class_id,
            "params": dict(self.params),
            "seed": self.seed,
            "description": self.description,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GeneratorSpec":
        return cls(d["class_id"], d.get("params", {}), d.get("seed", 0), d.get("description", ""))


_REGISTRY: dict[str, GeneratorClass] = {}


def register(gen: GeneratorClass) -> GeneratorClass:
    if gen.class_id in _REGISTRY:
        raise ValueError(f"duplicate generator class {gen.class_id}")
    _REGISTRY[gen.class_id] = gen
    return gen


def get_class(class_id: str) -> GeneratorClass:
    try:
        return _REGISTRY[class_id]
    except KeyError:
        valid = ", ".join(sorted(_REGISTRY))
        raise UnknownClass(f"unknown generator class {class_id!r}; valid classes: {valid}") from None


def lookup_class(class_id: str) -> GeneratorClass | None:
    return _REGISTRY.get(class_id)


def list_classes() -> list[GeneratorClass]:
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]


def validate_params(class_id: str, params: Mapping[str, int | float]) -> dict[str, int | float]:
    """Fill defaults, coerce types, and range-check; returns a new dict in schema order."""
    gen = get_class(class_id)
    schema = gen.schema()
    unknown = set(params) - set(schema)
    if unknown:
        raise InvalidParams(f"{class_id}: unknown parameters {sorted(unknown)}")
    out: dict[str, int | float] = {}
    for p in gen.params:
        v = p.coerce(params.get(p.name, p.default))
        if not (p.low <= v <= p.high) or (isinstance(v, float) and not math.isfinite(v)):
            raise InvalidParams(f"{class_id}: {p.name}={v} outside [{p.low}, {p.high}]")
        out[p.name] = v
    if gen.check is not None:
        problem = gen.check(out)
        if problem:
            raise InvalidParams(f"{class_id}: {problem}")
    return out


def generate_instance(spec: GeneratorSpec) -> MilpInstance:
    gen = get_class(spec.class_id)
    return gen.build(dict(spec.params), Rng(spec.seed))


def scale_params(class_id: str, params: Mapping[str, int | float], factor: float) -> dict:
    """Multiply size parameters by ``factor`` (rounded); others unchanged."""
    if not factor > 0:
        raise InvalidParams(f"scale factor must be positive, got {factor}")
    gen = get_class(class_id)
    base = validate_params(class_id, params)
    if factor == 1.0:
        return base
    out = dict(base)
    for name in gen.size_params():
        out[name] = int(round(base[name] * factor))
    return validate_params(class_id, out)


def jitter_params(
    class_id: str,
    params: Mapping[str, int | float],
    seed: int,
    low: float = 0.8,
    high: float = 1.25,
) -> dict:
    """Multiply each size parameter by its own uniform factor in ``[low, high]``.

    Results are rounded and clamped into the declared range; if the jittered
    set fails a cross-parameter check the input parameters are returned.
    """
    gen = get_class(class_id)
    base = validate_params(class_id, params)
    names = gen.size_params()
    factors = Rng(mix_seed(seed, _JITTER_STREAM)).uniform(low, high, len(names))
    schema = gen.schema()
    out = dict(base)
    for name, f in zip(names, factors):
        p = schema[name]
        out[name] = int(min(max(round(base[name] * f), p.low), p.high))
    try:
        return validate_params(class_id, out)
    except InvalidParams:
        return base


def describe_instance(class_id: str, inst: MilpInstance) -> str:
    """Class description followed by instance-specific counts."""
    gen = get_class(class_id)
    n_bin = int((inst.vtypes == VarType.BINARY).sum())
    n_int = int((inst.vtypes != VarType.CONTINUOUS).sum()) - n_bin
    n_cont = inst.n_vars - n_bin - n_int
    parts = [
        gen.description,
        f"This instance has {inst.n_vars} variables and {inst.n_cons} constraints "
        f"with {inst.nnz} nonzeros.",
    ]
    kinds = []
    if n_bin:
        kinds.append(f"{n_bin} binary")
    if n_int:
        kinds.append(f"{n_int} general integer")
    if n_cont:
        kinds.append(f"{n_cont} continuous")
    parts.append("Variable types: " + ", ".join(kinds) + ".")
    return " ".join(parts)
