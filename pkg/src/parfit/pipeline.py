"""Batched embed -> transform -> encode over many sentences at once."""

from __future__ import annotations

import numpy as np

from parfit.embedding import TransformMatrix

TRANSFORM_SCOPES = ("all", "word")


def matrix_of(m):
    if m is None:
        return None
    return m.matrix if isinstance(m, TransformMatrix) else np.asarray(m, dtype=np.float64)


def pack(token_seqs, embedder):
    """Right-padded raw input array (B, T, k) and lengths for token sequences."""
    lengths = np.array([len(s) for s in token_seqs])
    if lengths.size == 0 or lengths.min() == 0:
        raise ValueError("cannot encode an empty sentence")
    x = np.zeros((len(token_seqs), int(lengths.max()), embedder.dim))
    for b, toks in enumerate(token_seqs):
        x[b, :len(toks)] = embedder.embed_tokens(toks)
    return x, lengths


def check_dims(enc, mat, embedder):
    if embedder.dim != enc.input_dim:
        raise ValueError(f"embedder dim {embedder.dim} does not match encoder input_dim {enc.input_dim}")
    if mat is not None and mat.shape != (enc.input_dim, enc.input_dim):
        raise ValueError(f"transform is {mat.shape[0]}x{mat.shape[1]} but encoder input_dim is {enc.input_dim}")


def transform_inputs(x, mat, mask=None):
    """Apply ``mat`` to each input row; with ``mask`` only where mask is 1."""
    if mat is None:
        return x
    z = x @ mat.T
    if mask is None:
        return z
    m = mask[..., None]
    return z * m + x * (1.0 - m)


def encode_many(sentences, enc, m, embedder):
    """Contextual vectors for each sentence, as a list of (l_i, m) arrays."""
    mat = matrix_of(m)
    check_dims(enc, mat, embedder)
    seqs = [s.tokens for s in sentences]
    x, lengths = pack(seqs, embedder)
    out, _ = enc.forward_batch(transform_inputs(x, mat), lengths)
    return [out[b, :n] for b, n in enumerate(lengths)]
