"""Rerun the synthetic benchmark over several corpus and encoder-weight seeds.

    python scripts/seed_sweep.py --pairs 0:0 0:1 1:2

Each ``corpus_seed:weight_seed`` pair trains on a fresh corpus and
encoder and prints one row: held-out distance ratios, para-id accuracy
before and after, the worst orthogonality residual, and run time.
"""

import argparse
import time

import numpy as np

from parfit.corpus import split
from parfit.metrics import distance_report
from parfit.synthetic import benchmark_fixture
from parfit.train import TrainConfig, sub_seed, train


def run(corpus_seed, weight_seed, cfg):
    pairs, emb, enc = benchmark_fixture(seed=corpus_seed, weight_seed=weight_seed)
    tr, ho = split(pairs, cfg.heldout_fraction, sub_seed(cfg.seed, "split"))
    t0 = time.perf_counter()
    m, rep = train(tr, enc, emb, cfg, held_out=ho)
    secs = time.perf_counter() - t0
    base, fit = distance_report(ho, enc, None, emb), distance_report(ho, enc, m, emb)
    best_acc = rep.epochs[rep.best_epoch - 1].heldout_acc
    return dict(
        para=fit.mean_paraphrase_l2 / base.mean_paraphrase_l2,
        non=fit.mean_nonparaphrase_l2 / base.mean_nonparaphrase_l2,
        acc0=rep.baseline_heldout_acc, acc=best_acc, best=rep.best_epoch,
        resid=max(r.ortho_residual for r in rep.epochs),
        min_sv=float(np.linalg.svd(m.matrix, compute_uv=False).min()), secs=secs,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", nargs="+", default=["0:0", "0:1", "1:2", "2:3", "0:3", "3:4"])
    ap.add_argument("--max-epochs", type=int, default=250)
    ap.add_argument("--patience", type=int, default=80)
    args = ap.parse_args()
    cfg = TrainConfig(gamma=2.0, lambda_=1.0, max_epochs=args.max_epochs, early_stop_patience=args.patience)
    print("corpus weights  para   non    acc0   acc    best  resid   min_sv  secs")
    for item in args.pairs:
        cs, ws = (int(v) for v in item.split(":"))
        r = run(cs, ws, cfg)
        print(f"{cs:>6} {ws:>7}  {r['para']:.3f}  {r['non']:.3f}  {r['acc0']:.3f}  {r['acc']:.3f}  "
              f"{r['best']:>4}  {r['resid']:.4f}  {r['min_sv']:.3f}  {r['secs']:.0f}")


if __name__ == "__main__":
    main()
