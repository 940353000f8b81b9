"""Command-line entry point: ``parfit {train,report,gradcheck,gridsearch} --config PATH``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from parfit.config import load_config
from parfit.corpus import load_corpus, split
from parfit.embedding import InputEmbedder, ParseError, TransformMatrix, load_embedding_table, load_transform, save_transform
from parfit.encoders import EncoderModel
from parfit.gradcheck import TOLERANCE, run_suite
from parfit.metrics import distance_report, reference_exceedance, render_table
from parfit.synthetic import SyntheticConfig, synthetic_corpus
from parfit.train import run_grid, select_cell, sub_seed, train


MATRIX_FILE = "transform.txt"
TRAIN_REPORT_FILE = "train_report.csv"
CONFIG_SNAPSHOT_FILE = "resolved.cfg"
DISTANCE_REPORT_FILE = "distance_report.csv"
TABLE_FILE = "distance_table.txt"
GRID_FILE = "grid_results.csv"
WINNER_FILE = "best.cfg"


class CliError(Exception):
    pass


def build_components(cfg):
    """(encoder, embedder) from a resolved RunConfig."""
    table, dim = {}, cfg.embedder_dim
    if cfg.embedding_table is not None:
        table, dim = load_embedding_table(cfg.embedding_table)
        if dim != cfg.encoder["input_dim"]:
            raise CliError(f"embedding table dim {dim} does not match encoder.input_dim {cfg.encoder['input_dim']}")
    embedder = InputEmbedder(cfg.encoder["input_dim"], table, cfg.embedder_hash_seed)
    return EncoderModel(**cfg.encoder), embedder


def _split_pairs(cfg, pairs):
    if cfg.heldout is not None:
        return pairs, load_corpus(cfg.heldout)
    return split(pairs, cfg.train.heldout_fraction, sub_seed(cfg.seed, "split"))


def _prepare(args, required=("corpus",)):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    cfg = cfg.resolved()
    cfg.validate_paths(required)
    out = Path(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def cmd_train(args):
    cfg, out = _prepare(args)
    enc, emb = build_components(cfg)
    train_pairs, held = _split_pairs(cfg, load_corpus(cfg.corpus))
    m, report = train(train_pairs, enc, emb, cfg.train, held_out=held)
    save_transform(m, out / MATRIX_FILE)
    report.write_csv(out / TRAIN_REPORT_FILE)
    (out / CONFIG_SNAPSHOT_FILE).write_text(cfg.to_text(), encoding="utf-8")
    print(f"trained {report.final_epoch} epochs, best epoch {report.best_epoch} ({report.stop_reason}); wrote {out}")
    return 0


def cmd_report(args):
    cfg, out = _prepare(args)
    if args.matrix is None:
        raise CliError("report needs --matrix PATH")
    if not Path(args.matrix).is_file():
        raise FileNotFoundError(f"matrix file not found: {args.matrix}")
    enc, emb = build_components(cfg)
    m = load_transform(args.matrix)
    if m.dim != enc.input_dim:
        raise CliError(f"dimension mismatch: matrix is {m.dim}x{m.dim} but encoder input_dim is {enc.input_dim}")
    if cfg.report_corpus is not None:
        pairs = load_corpus(cfg.report_corpus)
    else:
        pairs = _split_pairs(cfg, load_corpus(cfg.corpus))[1]
    rep = distance_report(pairs, enc, m, emb, cfg.train.occurrence, cfg.train.stopword_filter)
    base = distance_report(pairs, enc, TransformMatrix.identity(enc.input_dim), emb,
                           cfg.train.occurrence, cfg.train.stopword_filter)
    rep.write_csv(out / DISTANCE_REPORT_FILE)
    text = render_table({"identity": base, "retrofitted": rep})
    if cfg.reference_words:
        a, b = cfg.reference_words
        for name, mm, r in (("identity", None, base), ("retrofitted", m, rep)):
            rng = np.random.default_rng(sub_seed(cfg.seed, "reference"))
            stat = reference_exceedance(pairs, enc, mm, emb, a, b, cfg.context_sample, rng, report=r)
            text += (f"\n{name}: mean {a}/{b} distance {stat.reference_l2:.2f}, "
                     f"{100 * stat.exceedance:.1f}% of shared-word paraphrase distances exceed it")
    (out / TABLE_FILE).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def cmd_gradcheck(args):
    cfg, _ = _prepare(args, required=())
    enc, emb = build_components(cfg)
    if cfg.corpus is not None:
        pairs = load_corpus(cfg.corpus)
    else:
        pairs = synthetic_corpus(SyntheticConfig(n_paraphrase=30, n_nonparaphrase=30, seed=cfg.seed))
    res = run_suite(enc, emb, pairs, cfg.gradcheck_trials, seed=cfg.seed, perturb=cfg.gradcheck_perturb)
    print(f"{enc.kind}: {res.trials} trials, encoder max rel err {res.encoder_error:.3e}, "
          f"objective max rel err {res.objective_error:.3e} (tolerance {TOLERANCE:g})")
    print(f"max relative error {res.max_error:.3e}: {'PASS' if res.passed else 'FAIL'}")
    return 0 if res.passed else 1


def cmd_gridsearch(args):
    cfg, out = _prepare(args)
    enc, emb = build_components(cfg)
    train_pairs, held = _split_pairs(cfg, load_corpus(cfg.corpus))
    cells = run_grid(train_pairs, enc, emb, cfg.gamma_grid, cfg.lambda_grid, cfg.train, held_out=held)
    with open(out / GRID_FILE, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["gamma", "lambda", "heldout_acc", "best_epoch", "error"])
        for c in cells:
            w.writerow([repr(c.gamma), repr(c.lambda_), repr(c.heldout_acc), c.best_epoch, c.error])
    best = select_cell(cells)
    winner = replace(cfg, train=replace(cfg.train, gamma=best.gamma, lambda_=best.lambda_))
    (out / WINNER_FILE).write_text(winner.to_text(), encoding="utf-8")
    print(f"best gamma={best.gamma:g} lambda={best.lambda_:g} heldout_acc={best.heldout_acc:.4f}; wrote {out}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "report": cmd_report,
    "gradcheck": cmd_gradcheck,
    "gridsearch": cmd_gridsearch,
}


def build_parser():
    p = argparse.ArgumentParser(prog="parfit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="run config file (key = value lines)")
        s.add_argument("--out", help="output directory (overrides out_dir)")
        s.add_argument("--seed", type=int, help="master seed (overrides the config)")
        if name == "report":
            s.add_argument("--matrix", help="transform matrix file to analyse")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CliError, ParseError, FileNotFoundError, ValueError) as e:
        print(f"parfit {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
