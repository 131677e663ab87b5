"""Embedding training on generalized local knowledge graphs."""

from kgqc.training.attention import attention_edge, attention_vertex, attention_weights
from kgqc.training.objective import (
    EdgeContext,
    VertexContext,
    compile_context,
    f1,
    f2,
    log_likelihood,
    log_prob,
    log_prob_and_grad,
)
from kgqc.training.sampler import NegativeSampler
from kgqc.training.trainer import Trainer, train

__all__ = [
    "attention_vertex",
    "attention_edge",
    "attention_weights",
    "VertexContext",
    "EdgeContext",
    "compile_context",
    "f1",
    "f2",
    "log_likelihood",
    "log_prob",
    "log_prob_and_grad",
    "NegativeSampler",
    "Trainer",
    "train",
]
