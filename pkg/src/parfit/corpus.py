"""Paraphrase corpus loading, tokenization, shared-word indexing and splits."""

from __future__ import annotations

import string
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from parfit.embedding import ParseError

PARAPHRASE = 1
NON_PARAPHRASE = 0

OCCURRENCE_MODES = ("first", "all")

STOPWORDS = frozenset("""
a an the and or but if of at by for with about to from in on off over under
is are was were be been being am do does did have has had i me my we our you
your he him his she her it its they them their this that these those what
which who whom how why when where can could will would shall should may might
must not no so than too very s t just
""".split())

_PUNCT = string.punctuation


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    raw: str = ""

    def __post_init__(self):
        if not self.tokens or any(not t for t in self.tokens):
            raise ValueError("a sentence needs at least one non-empty token")

    def __len__(self):
        return len(self.tokens)

    def positions(self, word):
        return [i for i, t in enumerate(self.tokens) if t == word]

    def first(self, word):
        try:
            return self.tokens.index(word)
        except ValueError:
            return None


@dataclass(frozen=True)
class ParaphrasePair:
    s1: Sentence
    s2: Sentence
    label: int = PARAPHRASE

    @property
    def is_paraphrase(self):
        return self.label == PARAPHRASE


def tokenize(text):
    """Lowercase, split on whitespace, strip ASCII punctuation from each token's ends."""
    tokens = tuple(t for t in (w.strip(_PUNCT) for w in text.lower().split()) if t)
    if not tokens:
        raise ValueError(f"text {text!r} has no tokens")
    return Sentence(tokens, text.strip())


def load_corpus(path):
    """Read ``label<TAB>sentence1<TAB>sentence2`` lines.

    A file whose first line has two columns is read as paraphrase-only (every
    pair labelled 1). The first line fixes the column count for the file, so
    a two-column line inside a labelled file is an error at that line.
    """
    pairs = []
    width = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            cols = line.split("\t")
            if width is None and len(cols) in (2, 3):
                width = len(cols)
            if len(cols) != width:
                expect = width or 3
                raise ParseError(f"expected {expect} tab-separated columns, got {len(cols)}", path, lineno)
            if width == 3:
                label_txt, a, b = cols
                if label_txt.strip() not in ("0", "1"):
                    raise ParseError(f"unknown label {label_txt!r}, expected 0 or 1", path, lineno)
                label = int(label_txt)
            else:
                (a, b), label = cols, PARAPHRASE
            try:
                pairs.append(ParaphrasePair(tokenize(a), tokenize(b), label))
            except ValueError as e:
                raise ParseError(str(e), path, lineno) from None
    return pairs


def save_corpus(pairs, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for p in pairs:
            a = p.s1.raw or " ".join(p.s1.tokens)
            b = p.s2.raw or " ".join(p.s2.tokens)
            f.write(f"{p.label}\t{a}\t{b}\n")


def shared_positions(s1, s2, occurrence="first", stopword_filter=False):
    """(word, pos1, pos2) alignments for word types present in both sentences.

    Words are listed in order of first appearance in ``s1``.
    """
    if occurrence not in OCCURRENCE_MODES:
        raise ValueError(f"occurrence must be one of {OCCURRENCE_MODES}")
    common = set(s1.tokens) & set(s2.tokens)
    if stopword_filter:
        common -= STOPWORDS
    out = []
    seen = set()
    for w in s1.tokens:
        if w not in common or w in seen:
            continue
        seen.add(w)
        if occurrence == "first":
            out.append((w, s1.first(w), s2.first(w)))
        else:
            out.extend((w, i, j) for i in s1.positions(w) for j in s2.positions(w))
    return out


@dataclass
class SharedWordIndex:
    """Shared-word alignments of paraphrase pairs plus the negative-sampling pools.

    Sentence ids are ``2 * pair_id`` for ``s1`` and ``2 * pair_id + 1`` for ``s2``.
    """

    pairs: list
    entries: dict = field(default_factory=dict)  # word -> [(pair_id, pos1, pos2)]
    pool: dict = field(default_factory=dict)  # word -> [sentence_id]
    order: dict = field(default_factory=dict, repr=False)  # (pair_id, word) -> rank in s1

    def sentence(self, sid):
        p = self.pairs[sid // 2]
        return p.s2 if sid % 2 else p.s1

    def instances(self):
        """All (pair_id, word, pos1, pos2) in pair order, then s1 word order."""
        out = []
        for word, items in self.entries.items():
            out.extend((pid, word, i, j) for pid, i, j in items)
        out.sort(key=lambda r: (r[0], self.order[(r[0], r[1])], r[2], r[3]))
        return out


def build_shared_index(pairs, stopword_filter=False, occurrence="first"):
    entries = defaultdict(list)
    pool = defaultdict(list)
    order = {}
    for pid, p in enumerate(pairs):
        for side, s in enumerate((p.s1, p.s2)):
            for w in dict.fromkeys(s.tokens):
                pool[w].append(2 * pid + side)
        if not p.is_paraphrase:
            continue
        for rank, (w, i, j) in enumerate(shared_positions(p.s1, p.s2, occurrence, stopword_filter)):
            entries[w].append((pid, i, j))
            order.setdefault((pid, w), rank)
    return SharedWordIndex(list(pairs), dict(entries), dict(pool), order)


def split(pairs, held_out_fraction, seed):
    """Seeded stratified split into (train, held_out), each kept in input order.

    Each label class is shuffled and cut separately, so a class with two or
    more members lands on both sides.
    """
    if not 0.0 < held_out_fraction < 1.0:
        raise ValueError("held_out_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    by_label = defaultdict(list)
    for i, p in enumerate(pairs):
        by_label[p.label].append(i)
    held = set()
    for label in sorted(by_label):
        idx = by_label[label]
        n = len(idx)
        n_held = int(round(held_out_fraction * n))
        if n >= 2:
            n_held = min(max(n_held, 1), n - 1)
        perm = rng.permutation(n)
        held.update(idx[k] for k in perm[:n_held])
    train = [p for i, p in enumerate(pairs) if i not in held]
    held_out = [p for i, p in enumerate(pairs) if i in held]
    if not train or not held_out:
        raise ValueError(f"split of {len(pairs)} pairs at fraction {held_out_fraction} leaves a side empty")
    return train, held_out
