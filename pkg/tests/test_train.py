from dataclasses import replace

import numpy as np
import pytest

from conftest import make_pair
from parfit.corpus import build_shared_index, split
from parfit.embedding import InputEmbedder, TransformMatrix
from parfit.encoders import EncoderModel
from parfit.objective import context_distance
from parfit.paraid import heldout_accuracy
from parfit.synthetic import benchmark_fixture, synthetic_corpus
from parfit.train import GridCell, TrainConfig, grid_search, read_report_csv, run_grid, select_cell, sub_seed, train


@pytest.fixture(scope="module")
def quick():
    pairs = synthetic_corpus(n_paraphrase=60, n_nonparaphrase=60, seed=1)
    enc = EncoderModel(kind="birnn", input_dim=16, hidden_dim=4, layer_count=2, weight_seed=1, output_scale=20.0)
    return pairs, enc, InputEmbedder(16, hash_seed=3)


def test_zero_epochs_returns_identity(quick):
    pairs, enc, emb = quick
    m, rep = train(pairs, enc, emb, TrainConfig(max_epochs=0))
    assert m == TransformMatrix.identity(16)
    assert rep.epochs == []


def test_training_is_deterministic(quick):
    pairs, enc, emb = quick
    cfg = TrainConfig(max_epochs=3, early_stop_patience=3)
    m1, r1 = train(pairs, enc, emb, cfg)
    m2, r2 = train(pairs, enc, emb, cfg)
    assert m1.matrix.tobytes() == m2.matrix.tobytes()
    assert r1 == r2


def test_early_stopping_returns_best_snapshot(quick):
    pairs, enc, emb = quick
    cfg = TrainConfig(max_epochs=25, early_stop_patience=2, learning_rate=0.05)
    snaps = []
    m, rep = train(pairs, enc, emb, cfg, snapshots=snaps)
    accs = [r.heldout_acc for r in rep.epochs]
    best = rep.best_epoch
    assert accs[best - 1] == max(accs)
    assert accs.index(max(accs)) == best - 1
    assert m.matrix.tobytes() == snaps[best - 1].matrix.tobytes()
    if rep.stop_reason == "patience":
        assert rep.final_epoch - best == cfg.early_stop_patience
    else:
        assert rep.final_epoch == cfg.max_epochs
    assert len(snaps) == rep.final_epoch


def test_report_csv(tmp_path, quick):
    pairs, enc, emb = quick
    _, rep = train(pairs, enc, emb, TrainConfig(max_epochs=2, early_stop_patience=5))
    p = tmp_path / "r.csv"
    rep.write_csv(p)
    assert p.read_text().splitlines()[0] == "epoch,hinge_mean,ortho_residual,heldout_acc"
    rows = read_report_csv(p)
    assert [r["heldout_acc"] for r in rows] == [r.heldout_acc for r in rep.epochs]


def test_no_shared_words_is_an_error():
    pairs = [make_pair("a b", "c d"), make_pair("e f", "g h", 0), make_pair("i j", "k l"), make_pair("m", "n", 0)]
    with pytest.raises(ValueError):
        train(pairs, EncoderModel(kind="window-mean", input_dim=4), InputEmbedder(4), TrainConfig())


def test_no_usable_instance_is_an_error():
    pairs = [make_pair("a b", "a c"), make_pair("e f", "g h", 0), make_pair("i j", "k l", 0), make_pair("m", "n", 0)]
    with pytest.raises(ValueError, match="usable"):
        train(pairs, EncoderModel(kind="window-mean", input_dim=4), InputEmbedder(4), TrainConfig(heldout_fraction=0.5),
              held_out=pairs[2:])


@pytest.mark.parametrize("bad", [dict(gamma=0), dict(lambda_=-1), dict(batch_size=0), dict(occurrence="x"),
                                 dict(grid_mode=True, gamma=2.5)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        TrainConfig(**bad)


def test_sub_seeds_differ_by_name():
    assert sub_seed(0, "order") != sub_seed(0, "negatives")
    assert sub_seed(5, "order") == sub_seed(5, "order")


def test_select_cell_planted_and_ties():
    cells = [GridCell(1.0, 0.1, 0.7), GridCell(2.0, 0.5, 0.9), GridCell(3.0, 0.1, 0.9), GridCell(4.0, 2.0, 0.95, error="")]
    assert select_cell(cells) is cells[3]
    tied = [GridCell(3.0, 1.0, 0.8), GridCell(2.0, 2.0, 0.8), GridCell(2.0, 0.5, 0.8)]
    assert select_cell(tied) is tied[2]
    failed = [GridCell(1.0, 1.0, error="boom"), GridCell(2.0, 1.0, 0.6)]
    assert select_cell(failed) is failed[1]
    with pytest.raises(ValueError):
        select_cell([GridCell(1.0, 1.0, error="boom")])


def test_single_cell_grid(quick):
    pairs, enc, emb = quick
    base = TrainConfig(max_epochs=1)
    cfg = grid_search(pairs, enc, emb, (3.0,), (0.5,), base)
    assert (cfg.gamma, cfg.lambda_) == (3.0, 0.5)


def test_grid_winner_is_deterministic(quick):
    pairs, enc, emb = quick
    base = TrainConfig(max_epochs=2, early_stop_patience=1)
    a = run_grid(pairs, enc, emb, (1.0, 2.0), (0.5, 1.0), base)
    b = run_grid(pairs, enc, emb, (1.0, 2.0), (0.5, 1.0), base)
    assert a == b and len(a) == 4
    assert select_cell(a) == select_cell(b)


def test_planted_best_cell_wins():
    # identical paraphrase sides: every positive distance is 0, so a margin
    # below the smallest achievable negative distance leaves M untouched
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(12)]
    seen = set()

    def fresh():
        while True:
            ws = rng.choice(words, size=4, replace=False)
            if frozenset(ws) not in seen:
                seen.add(frozenset(ws))
                return " ".join(ws)

    pairs = []
    for _ in range(100):
        s = fresh()
        pairs += [make_pair(s, s, 1), make_pair(fresh(), fresh(), 0)]
    # the window spans the whole sentence, so distinct word sets give distinct contexts
    enc = EncoderModel(kind="window-mean", input_dim=8, window_radius=3)
    emb = InputEmbedder(8, hash_seed=1)
    tr, ho = split(pairs, 0.25, seed=2)

    # oracle: enumerate every (instance, pool sentence) candidate negative
    idx = build_shared_index(tr)
    d_min = np.inf
    for pid, w, p1, p2 in idx.instances():
        pair = tr[pid]
        for sid in idx.pool[w]:
            if sid // 2 == pid:
                continue
            s = idx.sentence(sid)
            q = s.first(w)
            d_min = min(d_min, context_distance((q, p2), s, pair.s2, enc, None, emb),
                        context_distance((p1, q), pair.s1, s, enc, None, emb))
    assert d_min > 0
    gamma_small = 0.5 * d_min
    base = TrainConfig(max_epochs=8, early_stop_patience=3, learning_rate=0.5, mlp_lr=0.01, mlp_epochs=200)
    mlp = base.mlp()
    assert heldout_accuracy(tr, ho, enc, None, emb, mlp) == 1.0

    planted, _ = train(tr, enc, emb, replace(base, gamma=gamma_small), held_out=ho)
    assert planted == TransformMatrix.identity(8)
    cells = run_grid(tr, enc, emb, (4.0, gamma_small, 2.0), (1.0, 0.1), base, held_out=ho)
    assert max(c.heldout_acc for c in cells) == 1.0
    best = select_cell(cells)
    assert best.gamma == gamma_small


def test_strong_regularizer_keeps_orthogonality():
    pairs, emb, enc = benchmark_fixture()
    _, rep = train(pairs, enc, emb, TrainConfig(gamma=2.0, lambda_=2.0, max_epochs=30, early_stop_patience=30))
    assert len(rep.epochs) == 30
    assert max(r.ortho_residual for r in rep.epochs) <= 0.1
