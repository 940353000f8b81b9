"""Seeded synthetic paraphrase corpus over a 50-word vocabulary.

Each template is a sentence of content words and function words. Function
words come in interchangeable pairs (``can``/``do``, ``the``/``a``, ...).

* paraphrase: swap at least one function word for its partner and, with some
  probability, exchange two adjacent content words;
* non-paraphrase: pair the template with a sibling template in which some
  content words were replaced (so they still share words), optionally with
  function-word noise applied to the sibling as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from parfit.corpus import NON_PARAPHRASE, PARAPHRASE, ParaphrasePair, Sentence
from parfit.embedding import InputEmbedder
from parfit.encoders import EncoderModel

FUNCTION_PAIRS = (
    ("the", "a"), ("can", "do"), ("is", "was"), ("in", "at"),
    ("my", "our"), ("some", "many"), ("to", "for"),
)
CONTENT_WORDS = (
    "make", "arms", "bigger", "earth", "flat", "people", "believe", "window",
    "small", "large", "suitcase", "good", "bad", "river", "city", "train",
    "music", "paint", "stone", "green", "quick", "letter", "garden", "teacher",
    "market", "winter", "bridge", "cloud", "doctor", "story", "bright", "silver",
    "forest", "engine", "coffee", "island",
)
VOCABULARY = tuple(w for pair in FUNCTION_PAIRS for w in pair) + CONTENT_WORDS
PARTNER = {a: b for a, b in FUNCTION_PAIRS} | {b: a for a, b in FUNCTION_PAIRS}

# F = function slot, C = content slot
PATTERNS = ("FCFCC", "CFCFC", "FCCFC", "FCFCFC", "CFCCFC")


@dataclass
class SyntheticConfig:
    n_paraphrase: int = 300
    n_nonparaphrase: int = 300
    content_substitutions: int = 2
    swap_prob: float = 0.5
    permute_prob: float = 0.3
    sibling_swap_prob: float = 0.3
    seed: int = 0


def _sentence(tokens):
    return Sentence(tuple(tokens), " ".join(tokens))


def _template(rng):
    pattern = PATTERNS[rng.integers(len(PATTERNS))]
    n_c = pattern.count("C")
    content = [str(w) for w in rng.choice(CONTENT_WORDS, size=n_c, replace=False)]
    toks = []
    for slot in pattern:
        if slot == "C":
            toks.append(content.pop())
        else:
            toks.append(FUNCTION_PAIRS[rng.integers(len(FUNCTION_PAIRS))][rng.integers(2)])
    return toks


def _function_noise(toks, rng, swap_prob, at_least_one):
    out = list(toks)
    fpos = [i for i, t in enumerate(out) if t in PARTNER]
    swapped = [i for i in fpos if rng.random() < swap_prob]
    if at_least_one and not swapped and fpos:
        swapped = [fpos[rng.integers(len(fpos))]]
    for i in swapped:
        out[i] = PARTNER[out[i]]
    return out


def _paraphrase(toks, rng, cfg):
    out = _function_noise(toks, rng, cfg.swap_prob, at_least_one=True)
    if rng.random() < cfg.permute_prob:
        cands = [i for i in range(len(out) - 1) if out[i] not in PARTNER and out[i + 1] not in PARTNER]
        if cands:
            i = cands[rng.integers(len(cands))]
            out[i], out[i + 1] = out[i + 1], out[i]
    return out


def _sibling(toks, rng, cfg):
    out = list(toks)
    cpos = [i for i, t in enumerate(out) if t not in PARTNER]
    n_sub = min(cfg.content_substitutions, len(cpos) - 1)
    chosen = rng.choice(cpos, size=n_sub, replace=False)
    unused = [w for w in CONTENT_WORDS if w not in out]
    for i, w in zip(chosen, rng.choice(unused, size=n_sub, replace=False)):
        out[int(i)] = str(w)
    return _function_noise(out, rng, cfg.sibling_swap_prob, at_least_one=False)


def synthetic_corpus(cfg=None, **overrides):
    """Paraphrase and non-paraphrase pairs, interleaved, deterministic for a seed."""
    cfg = cfg or SyntheticConfig(**overrides)
    rng = np.random.default_rng(cfg.seed)
    para, nonpara = [], []
    while len(para) < cfg.n_paraphrase:
        t = _template(rng)
        p = _paraphrase(t, rng, cfg)
        if len(set(t) & set(p) - set(PARTNER)) >= 2:
            para.append(ParaphrasePair(_sentence(t), _sentence(p), PARAPHRASE))
    while len(nonpara) < cfg.n_nonparaphrase:
        t = _template(rng)
        s = _sibling(t, rng, cfg)
        if set(t) & set(s):
            nonpara.append(ParaphrasePair(_sentence(t), _sentence(s), NON_PARAPHRASE))
    out = []
    for a, b in zip(para, nonpara):
        out += [a, b]
    longer = para if len(para) > len(nonpara) else nonpara
    out += longer[min(len(para), len(nonpara)):]
    return out


def synthetic_embedding_table(dim=16, style_dims=8, seed=0):
    """Word vectors in [-1, 1]^dim with the vocabulary split across two subspaces.

    Content words vary only in the last ``dim - style_dims`` coordinates.
    Function words share a content-space component with their partner and
    differ from it only in the first ``style_dims`` coordinates, so swapping
    a function word for its partner moves the input along the style subspace.
    """
    if not 0 < style_dims < dim:
        raise ValueError("style_dims must lie strictly between 0 and dim")
    rng = np.random.default_rng(seed)
    n_c = dim - style_dims
    table = {}
    for w in CONTENT_WORDS:
        v = np.zeros(dim)
        v[style_dims:] = rng.uniform(-1.0, 1.0, size=n_c)
        table[w] = v
    for a, b in FUNCTION_PAIRS:
        shared = rng.uniform(-0.5, 0.5, size=n_c)
        offset = rng.uniform(-1.0, 1.0, size=style_dims)
        for w, sign in ((a, 1.0), (b, -1.0)):
            v = np.zeros(dim)
            v[:style_dims] = sign * offset
            v[style_dims:] = shared
            table[w] = v
    return table


# Encoder settings for the benchmark: a narrow recurrent encoder whose first
# layer cannot see every input direction, scaled so distances are O(1).
BENCH_ENCODER = dict(kind="birnn", input_dim=16, layer_count=3, hidden_dim=4, output_scale=60.0)


def benchmark_fixture(seed=0, weight_seed=0):
    """(pairs, embedder, encoder) for the standard 300 + 300 synthetic benchmark."""
    pairs = synthetic_corpus(SyntheticConfig(seed=seed))
    embedder = InputEmbedder(16, table=synthetic_embedding_table(16, 8, seed=seed))
    return pairs, embedder, EncoderModel(weight_seed=weight_seed, **BENCH_ENCODER)
