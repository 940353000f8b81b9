import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_pair
from parfit.embedding import InputEmbedder
from parfit.encoders import EncoderModel
from parfit.metrics import (
    DistanceReport, WordRecord, cosine_distance, distance_report, read_report_csv, reference_exceedance,
    render_table,
)
from parfit.synthetic import synthetic_corpus


def test_cosine_distance_cases():
    u = np.array([1.0, 2.0])
    assert cosine_distance(u, u) == pytest.approx(0.0, abs=1e-15)
    assert cosine_distance([1.0, 0.0], [0.0, 3.0]) == 1.0
    assert cosine_distance(u, -u) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        cosine_distance([0.0, 0.0], u)


def test_identical_sentences_give_zero(birnn16, embedder16):
    pairs = [make_pair("how do i make my arms bigger", "how do i make my arms bigger"),
             make_pair("the earth is flat", "the earth is flat", 0)]
    rep = distance_report(pairs, birnn16, None, embedder16)
    assert rep.mean_paraphrase_l2 == 0.0 and rep.mean_nonparaphrase_l2 == 0.0


def test_window_hand_computation():
    table = {"w": np.array([1.0, 0.0]), "a": np.array([0.0, 1.0]), "b": np.array([0.0, -1.0])}
    enc = EncoderModel(kind="window-mean", input_dim=2, window_radius=1)
    rep = distance_report([make_pair("w a", "w b")], enc, None, InputEmbedder(2, table=table))
    # (w + a)/2 = (.5, .5) against (w + b)/2 = (.5, -.5)
    assert rep.records == [WordRecord(0, "w", 1, 1.0, 1.0)]
    assert rep.n_paraphrase == 1 and rep.n_nonparaphrase == 0


def test_records_sorted_and_recomputable(tmp_path, birnn16, embedder16, small_corpus):
    rep = distance_report(small_corpus, birnn16, None, embedder16)
    keys = [(r.pair_id, r.word) for r in rep.records]
    assert keys == sorted(keys)
    para = [r.l2 for r in rep.records if r.label == 1]
    assert rep.mean_paraphrase_l2 == pytest.approx(np.mean(para), rel=1e-15)
    p = tmp_path / "r.csv"
    rep.write_csv(p)
    records, summary = read_report_csv(p)
    assert records == rep.records
    again = DistanceReport.from_records(records)
    assert summary["mean_paraphrase_l2"] == rep.mean_paraphrase_l2
    assert again.mean_paraphrase_l2 == rep.mean_paraphrase_l2


@given(st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_orthogonal_map_leaves_linear_encoder_distances(seed):
    # window-mean commutes with M, so an orthogonal M cannot change any distance
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((8, 8)))
    enc = EncoderModel(kind="window-mean", input_dim=8, window_radius=1)
    emb = InputEmbedder(8, hash_seed=seed)
    pairs = [make_pair("a b c d", "c b a e"), make_pair("x a y", "a z", 0)]
    base = distance_report(pairs, enc, None, emb)
    rot = distance_report(pairs, enc, q, emb)
    for r0, r1 in zip(base.records, rot.records):
        assert r1.l2 == pytest.approx(r0.l2, abs=1e-12)
        assert r1.cosine == pytest.approx(r0.cosine, abs=1e-12)


def test_report_without_shared_words(birnn16, embedder16):
    with pytest.raises(ValueError):
        distance_report([make_pair("a b", "c d")], birnn16, None, embedder16)


def test_render_table_two_decimals(birnn16, embedder16, small_corpus):
    rep = distance_report(small_corpus, birnn16, None, embedder16)
    text = render_table({"identity": rep})
    assert f"{rep.mean_paraphrase_l2:.2f}" in text and "identity" in text


def test_reference_identical_words_and_contexts(birnn16, embedder16):
    pairs = [make_pair("how do i make my arms bigger", "how can i make my arms bigger"),
             make_pair("the earth is flat", "the earth is flat"),
             make_pair("zz top", "other words", 0)]
    rng = np.random.default_rng(0)
    stat = reference_exceedance(pairs, birnn16, None, embedder16, "zz", "zz", 10, rng)
    assert stat.reference_l2 == 0.0
    shared = distance_report(pairs, birnn16, None, embedder16).paraphrase_distances()
    assert stat.exceedance == pytest.approx(np.mean(shared > 0))
    assert 0 < stat.exceedance < 1


def test_reference_zero_distance_corpus(birnn16, embedder16):
    pairs = [make_pair("the dog ran", "the dog ran"), make_pair("a cat sat", "a cat sat")]
    stat = reference_exceedance(pairs, birnn16, None, embedder16, "dog", "cat", 20, np.random.default_rng(1))
    assert stat.exceedance == 0.0


def test_reference_stable_across_reruns(birnn16, embedder16):
    pairs = synthetic_corpus(n_paraphrase=40, n_nonparaphrase=40, seed=3)
    a = reference_exceedance(pairs, birnn16, None, embedder16, "the", "a", 50, np.random.default_rng(9))
    b = reference_exceedance(pairs, birnn16, None, embedder16, "the", "a", 50, np.random.default_rng(9))
    assert a == b


def test_reference_word_missing(birnn16, embedder16, small_corpus):
    with pytest.raises(ValueError):
        reference_exceedance(small_corpus, birnn16, None, embedder16, "qqq", "the", 5, np.random.default_rng(0))
