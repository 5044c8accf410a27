"""MILP embedding model, frozen text embedder and contrastive training."""

from .checkpoint import checkpoint_id, load_checkpoint, save_checkpoint
from .config import ModelConfig
from .encoder import encode_many, encode_milp, prepare
from .loss import contrastive_loss, contrastive_loss_grad
from .params import ModelParams, closed_form_count, init_model, param_shapes
from .text import TextEmbedder, encode_text, load_text_vectors
from .train import EpochRecord, kway_accuracy, kway_from_embeddings, split_indices, train

__all__ = [
    "EpochRecord",
    "ModelConfig",
    "ModelParams",
    "TextEmbedder",
    "checkpoint_id",
    "closed_form_count",
    "contrastive_loss",
    "contrastive_loss_grad",
    "encode_many",
    "encode_milp",
    "encode_text",
    "init_model",
    "kway_accuracy",
    "kway_from_embeddings",
    "load_checkpoint",
    "load_text_vectors",
    "param_shapes",
    "prepare",
    "save_checkpoint",
    "split_indices",
    "train",
]
