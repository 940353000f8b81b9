"""Plain-SGD training of the transform, with early stopping on held-out para-id."""

from __future__ import annotations

import csv
import logging
import zlib
from dataclasses import dataclass, field, fields, replace

import numpy as np

from parfit.corpus import OCCURRENCE_MODES, build_shared_index, split
from parfit.embedding import TransformMatrix, ortho_residual
from parfit.objective import AGGREGATIONS, loss_and_grad, sample_negative
from parfit.paraid import MlpConfig, heldout_accuracy
from parfit.pipeline import TRANSFORM_SCOPES

log = logging.getLogger(__name__)

GAMMA_GRID = (1.0, 2.0, 3.0, 4.0)
LAMBDA_GRID = (0.1, 0.5, 1.0, 2.0)


def sub_seed(seed, name):
    """Independent 32-bit seed for the named consumer of a run's master seed."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode())])
    return int(ss.generate_state(1)[0])


@dataclass
class TrainConfig:
    gamma: float = 2.0
    lambda_: float = 1.0
    learning_rate: float = 0.005
    batch_size: int = 128
    max_epochs: int = 30
    early_stop_patience: int = 3
    seed: int = 0
    occurrence: str = "first"
    hinge_aggregation: str = "mean"
    transform_scope: str = "all"
    stopword_filter: bool = False
    heldout_fraction: float = 0.2
    grid_mode: bool = False
    mlp_hidden: int = 50
    mlp_batch: int = 64
    mlp_epochs: int = 60
    mlp_lr: float = 1e-3

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.lambda_ > 0:
            raise ValueError("lambda must be > 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1 or self.max_epochs < 0 or self.early_stop_patience < 1:
            raise ValueError("batch_size and early_stop_patience must be >= 1, max_epochs >= 0")
        if self.occurrence not in OCCURRENCE_MODES:
            raise ValueError(f"occurrence must be one of {OCCURRENCE_MODES}")
        if self.hinge_aggregation not in AGGREGATIONS:
            raise ValueError(f"hinge_aggregation must be one of {AGGREGATIONS}")
        if self.transform_scope not in TRANSFORM_SCOPES:
            raise ValueError(f"transform_scope must be one of {TRANSFORM_SCOPES}")
        if self.grid_mode and (self.gamma not in GAMMA_GRID or self.lambda_ not in LAMBDA_GRID):
            raise ValueError(f"grid mode restricts gamma to {GAMMA_GRID} and lambda to {LAMBDA_GRID}")

    def mlp(self):
        return MlpConfig(
            hidden=self.mlp_hidden, batch=self.mlp_batch, epochs=self.mlp_epochs,
            lr=self.mlp_lr, seed=sub_seed(self.seed, "mlp"),
        )


@dataclass
class EpochRecord:
    epoch: int
    hinge_mean: float
    ortho_residual: float
    heldout_acc: float
    objective: float
    skipped: int


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    baseline_heldout_acc: float = float("nan")
    best_epoch: int = 0
    stop_reason: str = ""

    @property
    def final_epoch(self):
        return self.epochs[-1].epoch if self.epochs else 0

    @property
    def skipped(self):
        return sum(r.skipped for r in self.epochs)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["epoch", "hinge_mean", "ortho_residual", "heldout_acc"])
            for r in self.epochs:
                w.writerow([r.epoch, repr(r.hinge_mean), repr(r.ortho_residual), repr(r.heldout_acc)])


def read_report_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [{k: (int(v) if k == "epoch" else float(v)) for k, v in r.items()} for r in rows]


def train(pairs, enc, embedder, cfg, held_out=None, snapshots=None):
    """Learn the transform on the paraphrase pairs of ``pairs``.

    When ``held_out`` is None the pairs are split with ``cfg.heldout_fraction``.
    Returns (best-epoch TransformMatrix, TrainReport). If ``snapshots`` is a
    list, the matrix after every epoch is appended to it.
    """
    if held_out is None:
        train_pairs, held_out = split(pairs, cfg.heldout_fraction, sub_seed(cfg.seed, "split"))
    else:
        train_pairs = list(pairs)
    index = build_shared_index(train_pairs, cfg.stopword_filter, cfg.occurrence)
    instances = index.instances()
    if not instances:
        raise ValueError("training corpus has no paraphrase pair with a shared word")
    usable = [any(sid // 2 != pid for sid in index.pool[w]) for pid, w, _, _ in instances]
    if not any(usable):
        raise ValueError("no usable training instances: no shared word occurs in a third sentence")

    k = enc.input_dim
    m = TransformMatrix.identity(k)
    report = TrainReport()
    if cfg.max_epochs == 0:
        report.stop_reason = "max_epochs"
        return m, report

    mlp_cfg = cfg.mlp()
    report.baseline_heldout_acc = heldout_accuracy(train_pairs, held_out, enc, m, embedder, mlp_cfg)
    rng_order = np.random.default_rng(sub_seed(cfg.seed, "order"))
    rng_neg = np.random.default_rng(sub_seed(cfg.seed, "negatives"))

    best_acc, best_m, since_best = -1.0, m.copy(), 0
    for epoch in range(1, cfg.max_epochs + 1):
        triplets, skipped = [], 0
        for i in rng_order.permutation(len(instances)):
            pid, word, p1, p2 = instances[i]
            t = sample_negative(index.pairs[pid], word, index, rng_neg, pair_id=pid, positions=(p1, p2))
            if t is None:
                skipped += 1
            else:
                triplets.append(t)
        hinge_total = 0.0
        for start in range(0, len(triplets), cfg.batch_size):
            batch = triplets[start:start + cfg.batch_size]
            hinge, grad = loss_and_grad(batch, enc, m, embedder, cfg)
            hinge_total += float(hinge.sum())
            m.matrix -= cfg.learning_rate * grad
        hinge_mean = hinge_total / len(triplets)
        resid = ortho_residual(m)
        acc = heldout_accuracy(train_pairs, held_out, enc, m, embedder, mlp_cfg)
        report.epochs.append(EpochRecord(epoch, hinge_mean, resid, acc, hinge_mean + cfg.lambda_ * resid, skipped))
        if snapshots is not None:
            snapshots.append(m.copy())
        log.info("epoch %d hinge=%.4f resid=%.4f heldout_acc=%.4f", epoch, hinge_mean, resid, acc)
        if acc > best_acc:
            best_acc, best_m, since_best = acc, m.copy(), 0
            report.best_epoch = epoch
        else:
            since_best += 1
            if since_best >= cfg.early_stop_patience:
                report.stop_reason = "patience"
                break
    else:
        report.stop_reason = "max_epochs"
    return best_m, report


@dataclass
class GridCell:
    gamma: float
    lambda_: float
    heldout_acc: float = float("nan")
    best_epoch: int = 0
    error: str = ""


def run_grid(pairs, enc, embedder, gamma_grid=GAMMA_GRID, lambda_grid=LAMBDA_GRID, base=None, held_out=None):
    """Train every (gamma, lambda) cell; returns the list of GridCell results."""
    if not gamma_grid or not lambda_grid:
        raise ValueError("grids must be non-empty")
    base = base or TrainConfig()
    cells = []
    for g in gamma_grid:
        for lam in lambda_grid:
            cell = GridCell(float(g), float(lam))
            try:
                cfg = replace(base, gamma=float(g), lambda_=float(lam))
                _, rep = train(pairs, enc, embedder, cfg, held_out=held_out)
                cell.best_epoch = rep.best_epoch
                cell.heldout_acc = max((r.heldout_acc for r in rep.epochs), default=rep.baseline_heldout_acc)
            except ValueError as e:
                cell.error = str(e)
            cells.append(cell)
    return cells


def select_cell(cells):
    ok = [c for c in cells if not c.error and not np.isnan(c.heldout_acc)]
    if not ok:
        raise ValueError("every grid cell failed: " + "; ".join(c.error for c in cells))
    return min(ok, key=lambda c: (-c.heldout_acc, c.gamma, c.lambda_))


def grid_search(pairs, enc, embedder, gamma_grid=GAMMA_GRID, lambda_grid=LAMBDA_GRID, base=None, held_out=None):
    """Best TrainConfig by held-out accuracy; ties go to smaller gamma, then smaller lambda."""
    base = base or TrainConfig()
    best = select_cell(run_grid(pairs, enc, embedder, gamma_grid, lambda_grid, base, held_out))
    return replace(base, gamma=best.gamma, lambda_=best.lambda_)


def config_fields():
    return [f.name for f in fields(TrainConfig)]
