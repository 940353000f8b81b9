import os

# timings in the acceptance suite are stated for a single thread
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from parfit.corpus import ParaphrasePair, tokenize  # noqa: E402
from parfit.embedding import InputEmbedder  # noqa: E402
from parfit.encoders import EncoderModel  # noqa: E402

# (criterion, passed, detail) lines filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {crit}: {detail}")


def make_pair(a, b, label=1):
    return ParaphrasePair(tokenize(a), tokenize(b), label)


def birnn_oracle(enc, x):
    """Straight-line re-implementation of the stacked bidirectional recurrence."""
    n = len(x)
    layer_in = [np.asarray(v, dtype=float) for v in x]
    per_layer = []
    for li, (fwd, bwd) in enumerate(enc._layers):
        hf, hb = [None] * n, [None] * n
        h = np.zeros(enc.hidden_dim)
        for t in range(n):
            h = np.tanh(fwd.wx @ layer_in[t] + fwd.wh @ h + fwd.b)
            hf[t] = h
        h = np.zeros(enc.hidden_dim)
        for t in reversed(range(n)):
            h = np.tanh(bwd.wx @ layer_in[t] + bwd.wh @ h + bwd.b)
            hb[t] = h
        ys = [np.concatenate([hf[t], hb[t]]) for t in range(n)]
        if enc._proj:
            per_layer.append([enc._proj[li] @ y for y in ys])
        else:
            per_layer.append(ys)
        layer_in = ys
    if enc.layer_mode == "top-layer":
        out = per_layer[-1]
    else:
        out = [sum(layer[t] for layer in per_layer) / len(per_layer) for t in range(n)]
    return np.array(out) * enc.output_scale


@pytest.fixture
def small_corpus():
    return [
        make_pair("how do i make my arms bigger", "how can i make my arms bigger"),
        make_pair("the earth is flat", "a earth is flat"),
        make_pair("people make the window bigger", "the window is small", 0),
        make_pair("my arms are flat", "our arms are flat"),
        make_pair("the river is big", "a big river", 0),
        make_pair("i make music", "we make music"),
    ]


@pytest.fixture
def embedder16():
    return InputEmbedder(16, hash_seed=7)


@pytest.fixture
def birnn16():
    return EncoderModel(kind="birnn", input_dim=16, hidden_dim=4, layer_count=2, weight_seed=5)
