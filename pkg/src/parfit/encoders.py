"""Frozen contextual encoders with exact input gradients.

Two kinds are provided. ``window-mean`` averages the inputs in a clipped
window around each position; it is linear, so its Jacobian is known in closed
form. ``birnn`` stacks bidirectional tanh recurrences and stands in for a
pretrained language-model encoder.

The batched functions work on right-padded arrays of shape (B, T, d) with a
``lengths`` vector. Padded inputs must be zero and padded upstream gradients
zero; right padding keeps padded steps from ever reaching valid ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("window-mean", "birnn")
LAYER_MODES = ("all-layers-mean", "top-layer")


@dataclass(frozen=True)
class ContextualEncoding:
    vectors: np.ndarray  # (l, m)

    @property
    def sentence_len(self):
        return self.vectors.shape[0]

    def __getitem__(self, i):
        return self.vectors[i]


@dataclass
class _Direction:
    wx: np.ndarray
    wh: np.ndarray
    b: np.ndarray


@dataclass
class EncoderModel:
    kind: str = "birnn"
    input_dim: int = 16
    output_dim: int | None = None
    window_radius: int = 1
    layer_count: int = 3
    hidden_dim: int = 4
    weight_seed: int = 0
    layer_mode: str = "all-layers-mean"
    output_scale: float = 1.0
    _layers: list = field(default_factory=list, init=False, repr=False, compare=False)
    _proj: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown encoder kind {self.kind!r}; expected one of {KINDS}")
        if self.layer_mode not in LAYER_MODES:
            raise ValueError(f"unknown layer_mode {self.layer_mode!r}; expected one of {LAYER_MODES}")
        if self.input_dim <= 0:
            raise ValueError("input_dim must be positive")
        if self.output_dim is None:
            self.output_dim = self.input_dim
        if self.kind == "window-mean":
            if self.window_radius < 0:
                raise ValueError("window_radius must be >= 0")
            if self.output_dim != self.input_dim:
                raise ValueError("window-mean encoder requires output_dim == input_dim")
            return
        if self.layer_count < 1 or self.hidden_dim < 1:
            raise ValueError("birnn needs layer_count >= 1 and hidden_dim >= 1")
        rng = np.random.default_rng(self.weight_seed)
        h = self.hidden_dim
        bound = 0.5 / math.sqrt(h)
        d_in = self.input_dim
        for _ in range(self.layer_count):
            dirs = []
            for _ in range(2):
                dirs.append(_Direction(
                    wx=rng.uniform(-bound, bound, size=(h, d_in)),
                    wh=rng.uniform(-bound, bound, size=(h, h)),
                    b=rng.uniform(-bound, bound, size=h),
                ))
            self._layers.append(dirs)
            d_in = 2 * h
        if self.output_dim != 2 * h:
            pb = 1.0 / math.sqrt(2 * h)
            self._proj = [rng.uniform(-pb, pb, size=(self.output_dim, 2 * h)) for _ in range(self.layer_count)]

    # -- batched core ------------------------------------------------------

    def forward_batch(self, z, lengths):
        """Encode padded inputs ``z`` (B, T, k). Returns (outputs (B, T, m), cache)."""
        if self.kind == "window-mean":
            return _window_forward(z, lengths, self.window_radius), None
        rev = _reverse_index(lengths, z.shape[1])
        rows = np.arange(z.shape[0])[:, None]
        x = z
        caches = []
        outs = []
        for fwd, bwd in self._layers:
            hf = _rnn_forward(x, fwd)
            hb_r = _rnn_forward(x[rows, rev], bwd)
            hb = hb_r[rows, rev]
            y = np.concatenate([hf, hb], axis=-1)
            caches.append((hf, hb_r))
            outs.append(y)
            x = y
        layer_outs = [o @ p.T for o, p in zip(outs, self._proj)] if self._proj else outs
        if self.layer_mode == "top-layer":
            out = layer_outs[-1]
        else:
            out = sum(layer_outs) / len(layer_outs)
        return out * self.output_scale, (z, rev, caches, outs)

    def backward_batch(self, cache, lengths, upstream):
        """Vector-Jacobian product: gradient of ``sum(upstream * outputs)`` w.r.t. the inputs."""
        if self.kind == "window-mean":
            return _window_backward(upstream, lengths, self.window_radius)
        z, rev, caches, outs = cache
        rows = np.arange(z.shape[0])[:, None]
        n_layers = len(self._layers)
        upstream = upstream * self.output_scale
        if self.layer_mode == "top-layer":
            d_layer = [None] * (n_layers - 1) + [upstream]
        else:
            d_layer = [upstream / n_layers] * n_layers
        h = self.hidden_dim
        carry = None
        for li in range(n_layers - 1, -1, -1):
            fwd, bwd = self._layers[li]
            hf, hb_r = caches[li]
            layer_in = z if li == 0 else outs[li - 1]
            dy = None
            if d_layer[li] is not None:
                dy = d_layer[li] @ self._proj[li] if self._proj else d_layer[li]
            if carry is not None:
                dy = carry if dy is None else dy + carry
            if dy is None:
                carry = None
                continue
            dx_f = _rnn_backward(layer_in, hf, dy[..., :h], fwd)
            dx_br = _rnn_backward(layer_in[rows, rev], hb_r, dy[..., h:][rows, rev], bwd)
            carry = dx_f + dx_br[rows, rev]
        return carry


def _reverse_index(lengths, t_max):
    t = np.arange(t_max)[None, :]
    lens = np.asarray(lengths)[:, None]
    return np.where(t < lens, lens - 1 - t, t)


def _rnn_forward(x, d):
    b, t_max, _ = x.shape
    pre_in = x @ d.wx.T + d.b
    hs = np.empty((b, t_max, d.wh.shape[0]))
    h_prev = np.zeros((b, d.wh.shape[0]))
    for t in range(t_max):
        h_prev = np.tanh(pre_in[:, t] + h_prev @ d.wh.T)
        hs[:, t] = h_prev
    return hs


def _rnn_backward(x, hs, dh_out, d):
    b, t_max, _ = x.shape
    da_all = np.empty_like(hs)
    dh_next = np.zeros((b, hs.shape[2]))
    for t in range(t_max - 1, -1, -1):
        da = (dh_out[:, t] + dh_next) * (1.0 - hs[:, t] ** 2)
        da_all[:, t] = da
        dh_next = da @ d.wh
    return da_all @ d.wx


def _window_bounds(lengths, t_max, c):
    t = np.arange(t_max)[None, :]
    lens = np.asarray(lengths)[:, None]
    lo = np.maximum(t - c, 0)
    hi = np.minimum(t + c, lens - 1)
    count = np.maximum(hi - lo + 1, 1)
    return lo, hi, count


def _window_forward(z, lengths, c):
    b, t_max, _ = z.shape
    valid = np.arange(t_max)[None, :] < np.asarray(lengths)[:, None]
    if c == 0:
        return z * valid[..., None]
    lo, hi, count = _window_bounds(lengths, t_max, c)
    csum = np.concatenate([np.zeros((b, 1, z.shape[2])), np.cumsum(z, axis=1)], axis=1)
    rows = np.arange(b)[:, None]
    hi_idx = np.clip(hi + 1, 0, t_max)
    out = (csum[rows, hi_idx] - csum[rows, lo]) / count[..., None]
    return out * valid[..., None]


def _window_backward(g, lengths, c):
    b, t_max, _ = g.shape
    lo, hi, count = _window_bounds(lengths, t_max, c)
    valid = np.arange(t_max)[None, :] < np.asarray(lengths)[:, None]
    scaled = g * (valid / count)[..., None]
    dz = np.zeros_like(g)
    pos = np.arange(t_max)
    for off in range(-c, c + 1):
        # output i feeds input j = i + off whenever j lies inside i's clipped window
        keep = (pos + off >= 0) & (pos + off < t_max)
        i, j = pos[keep], pos[keep] + off
        inside = (j[None, :] >= lo[:, i]) & (j[None, :] <= hi[:, i])
        dz[:, j] += scaled[:, i] * inside[..., None]
    return dz * valid[..., None]


# -- single-sentence API -----------------------------------------------------

def _check_inputs(enc, inputs):
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("encoder needs a non-empty sequence of input vectors")
    if x.shape[1] != enc.input_dim:
        raise ValueError(f"dimension mismatch: encoder expects {enc.input_dim}, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input vectors have non-finite entries")
    return x


def encode(enc, inputs):
    """Contextual vectors for every position of one sentence."""
    x = _check_inputs(enc, inputs)
    out, _ = enc.forward_batch(x[None], np.array([x.shape[0]]))
    return ContextualEncoding(out[0])


def encode_grad(enc, inputs, position, upstream):
    """Gradient of ``upstream . E(inputs)[position]`` w.r.t. each input vector, shape (l, k)."""
    x = _check_inputs(enc, inputs)
    n = x.shape[0]
    if not 0 <= position < n:
        raise IndexError(f"position {position} out of range for sentence of length {n}")
    up = np.asarray(upstream, dtype=np.float64)
    if up.shape != (enc.output_dim,):
        raise ValueError(f"upstream must have shape ({enc.output_dim},), got {up.shape}")
    lengths = np.array([n])
    _, cache = enc.forward_batch(x[None], lengths)
    g = np.zeros((1, n, enc.output_dim))
    g[0, position] = up
    return enc.backward_batch(cache, lengths, g)[0]
