"""Seeded MILP instance generators."""

from .base import (
    GeneratorClass,
    GeneratorSpec,
    ParamSpec,
    describe_instance,
    generate_instance,
    get_class,
    jitter_params,
    list_classes,
    lookup_class,
    register,
    scale_params,
    validate_params,
)
from .classes import MANDATORY, TRAIN_SEEDS

__all__ = [
    "GeneratorClass",
    "GeneratorSpec",
    "ParamSpec",
    "MANDATORY",
    "TRAIN_SEEDS",
    "describe_instance",
    "generate_instance",
    "get_class",
    "jitter_params",
    "list_classes",
    "lookup_class",
    "register",
    "scale_params",
    "validate_params",
]
