"""Shared-word distance analytics: per-word records, class means, reference exceedance."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from parfit.corpus import shared_positions
from parfit.pipeline import encode_many


def cosine_distance(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine distance is undefined for a zero vector")
    return float(np.clip(1.0 - (u @ v) / (nu * nv), 0.0, 2.0))


@dataclass(frozen=True)
class WordRecord:
    pair_id: int
    word: str
    label: int
    l2: float
    cosine: float


@dataclass
class DistanceReport:
    records: list = field(default_factory=list)
    mean_paraphrase_l2: float = float("nan")
    mean_nonparaphrase_l2: float = float("nan")
    n_paraphrase: int = 0
    n_nonparaphrase: int = 0

    @classmethod
    def from_records(cls, records):
        rep = cls(list(records))
        para = [r.l2 for r in rep.records if r.label == 1]
        non = [r.l2 for r in rep.records if r.label == 0]
        rep.n_paraphrase, rep.n_nonparaphrase = len(para), len(non)
        rep.mean_paraphrase_l2 = float(np.mean(para)) if para else float("nan")
        rep.mean_nonparaphrase_l2 = float(np.mean(non)) if non else float("nan")
        return rep

    def paraphrase_distances(self):
        return np.array([r.l2 for r in self.records if r.label == 1])

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["pair_id", "word", "label", "l2", "cosine"])
            for r in self.records:
                w.writerow([r.pair_id, r.word, r.label, repr(r.l2), repr(r.cosine)])
            f.write("\n# summary\n")
            f.write(f"# mean_paraphrase_l2,{self.mean_paraphrase_l2!r}\n")
            f.write(f"# mean_nonparaphrase_l2,{self.mean_nonparaphrase_l2!r}\n")
            f.write(f"# n_paraphrase,{self.n_paraphrase}\n")
            f.write(f"# n_nonparaphrase,{self.n_nonparaphrase}\n")


def read_report_csv(path):
    """Records and summary of a report CSV; returns (records, summary dict)."""
    records, summary = [], {}
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    for row in csv.DictReader(body):
        records.append(WordRecord(int(row["pair_id"]), row["word"], int(row["label"]),
                                  float(row["l2"]), float(row["cosine"])))
    for ln in lines:
        if ln.startswith("# ") and "," in ln:
            key, val = ln[2:].split(",", 1)
            summary[key] = float(val)
    return records, summary


def render_table(reports):
    """Aligned text table: one row per named report, class means at 2 decimals."""
    name_w = max(8, *(len(n) for n in reports))
    head = f"{'model':<{name_w}}  {'paraphrase':>10}  {'non-paraphrase':>14}"
    lines = [head, "-" * len(head)]
    for name, rep in reports.items():
        lines.append(f"{name:<{name_w}}  {rep.mean_paraphrase_l2:>10.2f}  {rep.mean_nonparaphrase_l2:>14.2f}")
    return "\n".join(lines)


def distance_report(pairs, enc, m, embedder, occurrence_mode="first", stopword_filter=False):
    """L2 and cosine distances of every shared word in every pair, aggregated by class."""
    if not pairs:
        raise ValueError("no pairs to report on")
    enc_vecs = encode_many([s for p in pairs for s in (p.s1, p.s2)], enc, m, embedder)
    records = []
    for pid, p in enumerate(pairs):
        e1, e2 = enc_vecs[2 * pid], enc_vecs[2 * pid + 1]
        for w, i, j in shared_positions(p.s1, p.s2, occurrence_mode, stopword_filter):
            u, v = e1[i], e2[j]
            records.append(WordRecord(pid, w, p.label, float(np.linalg.norm(u - v)), cosine_distance(u, v)))
    if not records:
        raise ValueError("no pair has a shared word")
    records.sort(key=lambda r: (r.pair_id, r.word))
    return DistanceReport.from_records(records)


@dataclass(frozen=True)
class ReferencePairStat:
    word_a: str
    word_b: str
    reference_l2: float
    exceedance: float
    n_shared: int


def _contexts(pairs, word):
    seen, out = set(), []
    for p in pairs:
        for s in (p.s1, p.s2):
            if word in s.tokens and s.tokens not in seen:
                seen.add(s.tokens)
                out.append(s)
    return out


def reference_exceedance(pairs, enc, m, embedder, word_a, word_b, context_sample, rng, report=None):
    """Share of paraphrase shared-word distances above the mean a-vs-b distance.

    The reference is the mean L2 between the contextual vectors of ``word_a``
    and ``word_b`` over ``context_sample`` random pairings of corpus
    sentences containing each word.
    """
    ctx_a, ctx_b = _contexts(pairs, word_a), _contexts(pairs, word_b)
    if not ctx_a or not ctx_b:
        missing = word_a if not ctx_a else word_b
        raise ValueError(f"no corpus sentence contains reference word {missing!r}")
    if context_sample < 1:
        raise ValueError("context_sample must be >= 1")
    ia = rng.integers(len(ctx_a), size=context_sample)
    ib = rng.integers(len(ctx_b), size=context_sample)
    used_a, used_b = sorted(set(ia.tolist())), sorted(set(ib.tolist()))
    va = dict(zip(used_a, encode_many([ctx_a[i] for i in used_a], enc, m, embedder)))
    vb = dict(zip(used_b, encode_many([ctx_b[i] for i in used_b], enc, m, embedder)))
    dists = [np.linalg.norm(va[a][ctx_a[a].first(word_a)] - vb[b][ctx_b[b].first(word_b)]) for a, b in zip(ia, ib)]
    reference = float(np.mean(dists))
    report = report or distance_report(pairs, enc, m, embedder)
    shared = report.paraphrase_distances()
    frac = float(np.mean(shared > reference)) if shared.size else 0.0
    return ReferencePairStat(word_a, word_b, reference, frac, int(shared.size))
