"""Paraphrase-aware retrofitting of contextual embedders.

Learns an orthogonal map of an encoder's input space so that a word shared by
two paraphrases gets nearby contextual vectors, while the same word in
unrelated contexts stays apart.
"""

from parfit.embedding import (
    InputEmbedder,
    ParseError,
    TransformMatrix,
    apply_transform,
    load_embedding_table,
    load_transform,
    ortho_residual,
    save_transform,
)
from parfit.encoders import ContextualEncoding, EncoderModel, encode, encode_grad
from parfit.corpus import (
    ParaphrasePair,
    Sentence,
    SharedWordIndex,
    build_shared_index,
    load_corpus,
    save_corpus,
    split,
    tokenize,
)
from parfit.objective import (
    TripletInstance,
    batch_loss,
    context_distance,
    grad_objective,
    hinge_term,
    sample_negative,
)
from parfit.train import TrainConfig, TrainReport, grid_search, train
from parfit.paraid import MlpModel, featurize, mlp_train, paraid_accuracy, sentence_embedding
from parfit.metrics import DistanceReport, ReferencePairStat, cosine_distance, distance_report, reference_exceedance

__all__ = [
    "ContextualEncoding",
    "DistanceReport",
    "EncoderModel",
    "InputEmbedder",
    "MlpModel",
    "ParaphrasePair",
    "ParseError",
    "ReferencePairStat",
    "Sentence",
    "SharedWordIndex",
    "TrainConfig",
    "TrainReport",
    "TransformMatrix",
    "TripletInstance",
    "apply_transform",
    "batch_loss",
    "build_shared_index",
    "context_distance",
    "cosine_distance",
    "distance_report",
    "encode",
    "encode_grad",
    "featurize",
    "grad_objective",
    "grid_search",
    "hinge_term",
    "load_corpus",
    "load_embedding_table",
    "load_transform",
    "mlp_train",
    "ortho_residual",
    "paraid_accuracy",
    "reference_exceedance",
    "sample_negative",
    "save_corpus",
    "save_transform",
    "sentence_embedding",
    "split",
    "tokenize",
    "train",
]
