"""Central finite-difference checks for encoder input gradients and the objective gradient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from parfit.corpus import build_shared_index
from parfit.encoders import encode, encode_grad
from parfit.objective import _evaluate, grad_objective, objective_value, sample_negative
from parfit.train import TrainConfig

TOLERANCE = 1e-4
STEP = 1e-5


def relative_error(analytic, numeric):
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = max(np.linalg.norm(a), np.linalg.norm(n), 1e-12)
    return float(np.linalg.norm(a - n) / denom)


def fd_matrix_grad(f, mat, h=STEP):
    g = np.zeros_like(mat)
    for idx in np.ndindex(mat.shape):
        up, dn = mat.copy(), mat.copy()
        up[idx] += h
        dn[idx] -= h
        g[idx] = (f(up) - f(dn)) / (2 * h)
    return g


def fd_input_grad(enc, inputs, position, upstream, h=STEP):
    x = np.asarray(inputs, dtype=np.float64)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        up, dn = x.copy(), x.copy()
        up[idx] += h
        dn[idx] -= h
        g[idx] = (upstream @ encode(enc, up)[position] - upstream @ encode(enc, dn)[position]) / (2 * h)
    return g


def check_encoder(enc, trials, seed=0):
    """Max relative error of ``encode_grad`` over random sentences, positions and upstreams."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 7))
        x = rng.uniform(-1.0, 1.0, size=(n, enc.input_dim))
        pos = int(rng.integers(n))
        up = rng.standard_normal(enc.output_dim)
        worst = max(worst, relative_error(encode_grad(enc, x, pos, up), fd_input_grad(enc, x, pos, up)))
    return worst


def _trial_batch(index, instances, rng, size):
    batch = []
    for i in rng.permutation(len(instances)):
        pid, w, p1, p2 = instances[i]
        t = sample_negative(index.pairs[pid], w, index, rng, pair_id=pid, positions=(p1, p2))
        if t is not None:
            batch.append(t)
        if len(batch) == size:
            break
    return batch


def check_objective(enc, embedder, pairs, trials, seed=0, perturb=0.0):
    """Max relative error of ``grad_objective`` against finite differences of the objective.

    Each trial draws a perturbed non-orthogonal M, a small batch, an
    aggregation mode, and a margin placed so that roughly half the hinge
    terms are active and none sits within reach of the kink.
    """
    index = build_shared_index(pairs)
    instances = index.instances()
    if not instances:
        raise ValueError("gradient check corpus has no shared words")
    rng = np.random.default_rng(seed)
    k = enc.input_dim
    worst = 0.0
    for _ in range(trials):
        mat = np.eye(k) + 0.3 * rng.standard_normal((k, k)) / np.sqrt(k)
        batch = _trial_batch(index, instances, rng, int(rng.integers(1, 5)))
        agg = "sum" if rng.random() < 0.5 else "mean"
        probe = TrainConfig(gamma=1.0, hinge_aggregation=agg)
        _, _, d_pos, d_neg, _ = _evaluate(batch, enc, mat, embedder, probe, need_grad=False)
        gap = d_neg - d_pos
        scale = max(float(np.max(np.abs(gap))), 1e-3)
        gamma = float(np.median(gap)) + scale * rng.uniform(0.05, 0.3)
        for _ in range(20):
            if gamma > 0 and np.min(np.abs(d_pos + gamma - d_neg)) > 1e-3 * scale:
                break
            gamma = abs(gamma) + 0.1 * scale
        cfg = TrainConfig(gamma=gamma, lambda_=float(rng.choice([0.1, 0.5, 1.0, 2.0])), hinge_aggregation=agg)
        analytic = grad_objective(batch, enc, mat, embedder, cfg)
        if perturb:
            analytic = analytic.copy()
            analytic[0, 0] += perturb
        numeric = fd_matrix_grad(lambda mm: objective_value(batch, enc, mm, embedder, cfg), mat)
        worst = max(worst, relative_error(analytic, numeric))
    return worst


@dataclass(frozen=True)
class GradcheckResult:
    encoder_error: float
    objective_error: float
    trials: int

    @property
    def max_error(self):
        return max(self.encoder_error, self.objective_error)

    @property
    def passed(self):
        return self.max_error <= TOLERANCE


def run_suite(enc, embedder, pairs, trials, seed=0, perturb=0.0):
    return GradcheckResult(
        check_encoder(enc, trials, seed),
        check_objective(enc, embedder, pairs, trials, seed + 1, perturb),
        trials,
    )
