"""Contextual distance, margin loss with negative sampling, and its exact gradient.

A training instance compares a shared word across a paraphrase pair with the
same word across a corrupted pair in which one side was swapped for another
corpus sentence containing the word:

    hinge = max(d_pos + gamma - d_neg, 0)

and the objective over a batch is ``agg(hinge) + lambda * ||I - M^T M||_F``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from parfit.embedding import ortho_residual
from parfit.pipeline import TRANSFORM_SCOPES, check_dims, matrix_of, pack, transform_inputs

RESIDUAL_EPS = 1e-12
AGGREGATIONS = ("mean", "sum")


@dataclass(frozen=True)
class TripletInstance:
    word: str
    pair_id: int
    s1: object
    s2: object
    n1: object
    n2: object
    p1: int
    p2: int
    q1: int
    q2: int
    replaced_side: int  # 0: s1 was substituted, 1: s2 was substituted
    replacement_id: int = -1

    def sentences(self):
        return (self.s1, self.s2, self.n1, self.n2)

    def positions(self):
        return (self.p1, self.p2, self.q1, self.q2)


def hinge_term(d_pos, d_neg, gamma):
    return max(d_pos + gamma - d_neg, 0.0)


def sample_negative(pair, word, index, rng, pair_id=None, positions=None):
    """Corrupt one side of ``pair`` with a random pool sentence that contains ``word``.

    Returns None (the skip signal) when no sentence other than the pair's own
    two is available.
    """
    if not pair.is_paraphrase:
        raise ValueError("negatives are drawn for paraphrase pairs only")
    if pair_id is None:
        pair_id = next((i for i, p in enumerate(index.pairs) if p is pair), None)
        if pair_id is None:
            raise ValueError("pair is not part of the index")
    if positions is None:
        p1, p2 = pair.s1.first(word), pair.s2.first(word)
    else:
        p1, p2 = positions
    if p1 is None or p2 is None or pair.s1.tokens[p1] != word or pair.s2.tokens[p2] != word:
        raise ValueError(f"word {word!r} is not shared at the given positions")
    own = (2 * pair_id, 2 * pair_id + 1)
    replace_first = bool(rng.random() < 0.5)
    eligible = [sid for sid in index.pool.get(word, ()) if sid not in own]
    if not eligible:
        return None
    sid = eligible[int(rng.integers(len(eligible)))]
    repl = index.sentence(sid)
    q = repl.first(word)
    if replace_first:
        return TripletInstance(word, pair_id, pair.s1, pair.s2, repl, pair.s2, p1, p2, q, p2, 0, sid)
    return TripletInstance(word, pair_id, pair.s1, pair.s2, pair.s1, repl, p1, p2, p1, q, 1, sid)


def _cfg(cfg, name, default):
    return getattr(cfg, name, default)


def _evaluate(batch, enc, m, embedder, cfg, need_grad):
    if not batch:
        raise ValueError("empty batch")
    mat = matrix_of(m)
    check_dims(enc, mat, embedder)
    gamma = float(cfg.gamma)
    agg = _cfg(cfg, "hinge_aggregation", "mean")
    scope = _cfg(cfg, "transform_scope", "all")
    if agg not in AGGREGATIONS:
        raise ValueError(f"hinge_aggregation must be one of {AGGREGATIONS}")
    if scope not in TRANSFORM_SCOPES:
        raise ValueError(f"transform_scope must be one of {TRANSFORM_SCOPES}")

    seqs = [s.tokens for t in batch for s in t.sentences()]
    pos = np.array([p for t in batch for p in t.positions()])
    for s, p, t in zip(seqs, pos, (t for t in batch for _ in range(4))):
        if not 0 <= p < len(s) or s[p] != t.word:
            raise ValueError(f"word {t.word!r} absent at position {p}")
    x, lengths = pack(seqs, embedder)
    rows = np.arange(len(seqs))
    mask = None
    if scope == "word":
        mask = np.zeros(x.shape[:2])
        mask[rows, pos] = 1.0
    z = transform_inputs(x, mat, mask)
    out, cache = enc.forward_batch(z, lengths)
    vec = out[rows, pos]
    diff_pos = vec[0::4] - vec[1::4]
    diff_neg = vec[2::4] - vec[3::4]
    d_pos = np.linalg.norm(diff_pos, axis=1)
    d_neg = np.linalg.norm(diff_neg, axis=1)
    margin = d_pos + gamma - d_neg
    hinge = np.maximum(margin, 0.0)
    n = len(batch)
    scale = 1.0 / n if agg == "mean" else 1.0
    loss = float(hinge.sum() * scale)
    if not need_grad:
        return loss, hinge, d_pos, d_neg, None

    # kink at margin == 0 gets the zero subgradient, as does a zero distance
    active = margin > 0.0
    g_pos = np.where((active & (d_pos > 0))[:, None], diff_pos / np.where(d_pos > 0, d_pos, 1.0)[:, None], 0.0)
    g_neg = np.where((active & (d_neg > 0))[:, None], diff_neg / np.where(d_neg > 0, d_neg, 1.0)[:, None], 0.0)
    up_vec = np.empty_like(vec)
    up_vec[0::4] = g_pos * scale
    up_vec[1::4] = -g_pos * scale
    up_vec[2::4] = -g_neg * scale
    up_vec[3::4] = g_neg * scale
    upstream = np.zeros_like(out)
    upstream[rows, pos] = up_vec
    dz = enc.backward_batch(cache, lengths, upstream)
    if mask is not None:
        dz = dz * mask[..., None]
    grad = np.einsum("btk,btj->kj", dz, x)
    return loss, hinge, d_pos, d_neg, grad


def ortho_grad(mat):
    """Gradient of ``||I - M^T M||_F``; zero within RESIDUAL_EPS of the orthogonal set."""
    r = np.eye(mat.shape[0]) - mat.T @ mat
    norm = np.linalg.norm(r, "fro")
    if norm <= RESIDUAL_EPS:
        return np.zeros_like(mat)
    return -2.0 * mat @ r / norm


def batch_loss(batch, enc, m, embedder, cfg):
    """(aggregated hinge loss, orthogonality residual); objective = first + lambda * second."""
    loss, *_ = _evaluate(batch, enc, m, embedder, cfg, need_grad=False)
    return loss, ortho_residual(matrix_of(m))


def objective_value(batch, enc, m, embedder, cfg):
    hinge, resid = batch_loss(batch, enc, m, embedder, cfg)
    return hinge + float(getattr(cfg, "lambda_")) * resid


def grad_objective(batch, enc, m, embedder, cfg):
    _, _, _, _, grad = _evaluate(batch, enc, m, embedder, cfg, need_grad=True)
    return grad + float(cfg.lambda_) * ortho_grad(matrix_of(m))


def loss_and_grad(batch, enc, m, embedder, cfg):
    """One pass: (per-instance hinge terms, gradient of the batch objective)."""
    _, hinge, _, _, grad = _evaluate(batch, enc, m, embedder, cfg, need_grad=True)
    return hinge, grad + float(cfg.lambda_) * ortho_grad(matrix_of(m))


def context_distance(positions, s1, s2, enc, m, embedder, transform_scope="all"):
    """L2 distance between the contextual vectors at ``positions`` of two sentences."""
    i, j = positions
    for s, p in ((s1, i), (s2, j)):
        if not 0 <= p < len(s.tokens):
            raise ValueError(f"position {p} out of range")
    if s1.tokens[i] != s2.tokens[j]:
        raise ValueError(f"positions hold different words ({s1.tokens[i]!r} vs {s2.tokens[j]!r})")
    mat = matrix_of(m)
    check_dims(enc, mat, embedder)
    x, lengths = pack([s1.tokens, s2.tokens], embedder)
    mask = None
    if transform_scope == "word":
        mask = np.zeros(x.shape[:2])
        mask[0, i] = mask[1, j] = 1.0
    out, _ = enc.forward_batch(transform_inputs(x, mat, mask), lengths)
    return float(np.linalg.norm(out[0, i] - out[1, j]))
