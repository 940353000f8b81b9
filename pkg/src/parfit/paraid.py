"""Sentence-pair paraphrase identification with a one-hidden-layer MLP.

Sentences are the mean of their contextual vectors; a pair is featurized as
``[|u - v| ; u * v]`` so the prediction does not depend on pair order. The
classifier is trained with Adam on binary cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from parfit.pipeline import encode_many


def sentence_embedding(sentence, enc, m, embedder):
    return encode_many([sentence], enc, m, embedder)[0].mean(axis=0)


def sentence_embeddings(sentences, enc, m, embedder):
    return np.stack([v.mean(axis=0) for v in encode_many(sentences, enc, m, embedder)])


def featurize(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return np.concatenate([np.abs(u - v), u * v], axis=-1)


def pair_features(pairs, enc, m, embedder):
    """(features (n, 2m), labels (n,)) for a list of pairs."""
    sents = [s for p in pairs for s in (p.s1, p.s2)]
    emb = sentence_embeddings(sents, enc, m, embedder)
    return featurize(emb[0::2], emb[1::2]), np.array([p.label for p in pairs], dtype=np.float64)


def _sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


@dataclass
class MlpModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    shift: np.ndarray = None
    scale: np.ndarray = None
    seed: int = 0

    @property
    def input_dim(self):
        return self.w1.shape[1]

    @property
    def hidden_dim(self):
        return self.w1.shape[0]

    def _standardize(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.shift is not None:
            x = (x - self.shift) / self.scale
        return x

    def _hidden(self, xs):
        return np.maximum(xs @ self.w1.T + self.b1, 0.0)

    def predict_proba(self, x):
        xs = self._standardize(np.atleast_2d(x))
        return _sigmoid(self._hidden(xs) @ self.w2 + self.b2)

    def predict(self, x):
        return (self.predict_proba(x) >= 0.5).astype(int)

    def accuracy(self, x, y):
        return float(np.mean(self.predict(x) == np.asarray(y).astype(int)))

    def dump(self, path):
        """Text dump for inspection: dims line, then row-major weights."""
        lines = [f"{self.input_dim} {self.hidden_dim}"]
        for arr in (self.w1, self.b1, self.w2, np.atleast_1d(self.b2)):
            lines.append(" ".join(format(v, ".17g") for v in np.ravel(arr)))
        if self.shift is not None:
            lines.append(" ".join(format(v, ".17g") for v in self.shift))
            lines.append(" ".join(format(v, ".17g") for v in self.scale))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def init_mlp(input_dim, hidden=50, seed=0):
    rng = np.random.default_rng(seed)
    a1 = np.sqrt(6.0 / (input_dim + hidden))
    a2 = np.sqrt(6.0 / (hidden + 1))
    return MlpModel(
        w1=rng.uniform(-a1, a1, size=(hidden, input_dim)),
        b1=np.zeros(hidden),
        w2=rng.uniform(-a2, a2, size=hidden),
        b2=0.0,
        seed=seed,
    )


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def step(self, params, grads):
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        out = []
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            out.append(p - self.lr * (self.m[i] / c1) / (np.sqrt(self.v[i] / c2) + self.eps))
        return out


def bce_and_grads(params, x, y):
    """Mean binary cross-entropy of the MLP on (x, y) and its parameter gradients."""
    w1, b1, w2, b2 = params
    pre = x @ w1.T + b1
    hid = np.maximum(pre, 0.0)
    logit = hid @ w2 + b2
    # log(1 + e^a) - y a, written to stay finite for large |a|
    loss = float(np.mean(np.logaddexp(0.0, logit) - y * logit))
    dlogit = (_sigmoid(logit) - y) / len(y)
    dhid = np.outer(dlogit, w2) * (pre > 0)
    return loss, [dhid.T @ x, dhid.sum(axis=0), hid.T @ dlogit, np.array(dlogit.sum())]


def mlp_train(features, labels, hidden=50, batch=64, epochs=100, seed=0, lr=1e-3, standardize=True):
    """Fit the classifier; deterministic for a given seed."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("features must be (n, d) with one label per row")
    if x.shape[0] < 2 or len(np.unique(y)) < 2:
        raise ValueError("training the classifier needs at least two examples from both classes")
    model = init_mlp(x.shape[1], hidden, seed)
    if standardize:
        model.shift = x.mean(axis=0)
        sd = x.std(axis=0)
        model.scale = np.where(sd > 1e-12, sd, 1.0)
    xs = model._standardize(x)
    rng = np.random.default_rng([seed, 1])
    opt = AdamState(lr=lr)
    params = [model.w1, model.b1, model.w2, np.array(model.b2)]
    n = xs.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            xb, yb = xs[idx], y[idx]
            _, grads = bce_and_grads(params, xb, yb)
            params = opt.step(params, grads)
    model.w1, model.b1, model.w2 = params[0], params[1], params[2]
    model.b2 = float(params[3])
    return model


def paraid_accuracy(pairs, enc, m, embedder, mlp):
    if not pairs:
        raise ValueError("no pairs to score")
    x, y = pair_features(pairs, enc, m, embedder)
    return mlp.accuracy(x, y)


@dataclass
class MlpConfig:
    hidden: int = 50
    batch: int = 64
    epochs: int = 100
    lr: float = 1e-3
    seed: int = 0


def heldout_accuracy(train_pairs, held_pairs, enc, m, embedder, mlp_cfg=None):
    """Train a fresh classifier on ``train_pairs`` under ``m`` and score ``held_pairs``."""
    cfg = mlp_cfg or MlpConfig()
    x, y = pair_features(train_pairs, enc, m, embedder)
    mlp = mlp_train(x, y, hidden=cfg.hidden, batch=cfg.batch, epochs=cfg.epochs, seed=cfg.seed, lr=cfg.lr)
    return paraid_accuracy(held_pairs, enc, m, embedder, mlp)
