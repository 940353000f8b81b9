"""Flat ``key = value`` run configuration, parsed into typed settings.

Lines starting with ``#`` are comments. Encoder and embedder settings use
dotted keys (``encoder.kind = birnn``). Unknown keys are an error so typos do
not silently fall back to defaults. Relative paths, including ``out_dir``,
are taken relative to the config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from parfit.embedding import ParseError
from parfit.train import GAMMA_GRID, LAMBDA_GRID, TrainConfig, sub_seed

# config key -> TrainConfig field
TRAIN_KEYS = {
    "gamma": "gamma",
    "lambda": "lambda_",
    "lr": "learning_rate",
    "batch_size": "batch_size",
    "max_epochs": "max_epochs",
    "patience": "early_stop_patience",
    "seed": "seed",
    "occurrence": "occurrence",
    "hinge_aggregation": "hinge_aggregation",
    "transform_scope": "transform_scope",
    "stopword_filter": "stopword_filter",
    "heldout_fraction": "heldout_fraction",
    "grid_mode": "grid_mode",
    "mlp_hidden": "mlp_hidden",
    "mlp_batch": "mlp_batch",
    "mlp_epochs": "mlp_epochs",
    "mlp_lr": "mlp_lr",
}

ENCODER_KEYS = {
    "encoder.kind": ("kind", str),
    "encoder.input_dim": ("input_dim", int),
    "encoder.output_dim": ("output_dim", int),
    "encoder.window_radius": ("window_radius", int),
    "encoder.layers": ("layer_count", int),
    "encoder.hidden_dim": ("hidden_dim", int),
    "encoder.weight_seed": ("weight_seed", int),
    "encoder.layer_mode": ("layer_mode", str),
    "encoder.output_scale": ("output_scale", float),
}

PATH_KEYS = ("corpus", "heldout", "report_corpus", "embedding_table")


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


@dataclass
class RunConfig:
    corpus: str | None = None
    heldout: str | None = None
    report_corpus: str | None = None
    embedding_table: str | None = None
    out_dir: str = "out"
    train: TrainConfig = field(default_factory=TrainConfig)
    encoder: dict = field(default_factory=dict)
    embedder_dim: int | None = None
    embedder_hash_seed: int | None = None
    gamma_grid: tuple = GAMMA_GRID
    lambda_grid: tuple = LAMBDA_GRID
    gradcheck_trials: int = 20
    gradcheck_perturb: float = 0.0
    reference_words: tuple = ()
    context_sample: int = 200

    @property
    def seed(self):
        return self.train.seed

    def with_seed(self, seed):
        return replace(self, train=replace(self.train, seed=int(seed)))

    def resolved(self):
        """Copy with every derived value (seeds, dims) written out explicitly."""
        enc = dict(self.encoder)
        enc.setdefault("kind", "birnn")
        enc.setdefault("input_dim", self.embedder_dim or 16)
        enc.setdefault("weight_seed", sub_seed(self.seed, "weights"))
        hash_seed = self.embedder_hash_seed
        if hash_seed is None:
            hash_seed = sub_seed(self.seed, "hash")
        return replace(self, encoder=enc, embedder_dim=enc["input_dim"], embedder_hash_seed=hash_seed)

    def validate_paths(self, required=("corpus",)):
        for key in required:
            if getattr(self, key) is None:
                raise ValueError(f"config is missing required key {key!r}")
        for key in PATH_KEYS:
            p = getattr(self, key)
            if p is not None and not Path(p).is_file():
                raise FileNotFoundError(f"{key} file not found: {p}")

    def to_text(self):
        lines = []
        for key in PATH_KEYS:
            if getattr(self, key) is not None:
                lines.append(f"{key} = {getattr(self, key)}")
        lines.append(f"out_dir = {self.out_dir}")
        for key, attr in TRAIN_KEYS.items():
            lines.append(f"{key} = {_fmt(getattr(self.train, attr))}")
        for key, (attr, _) in ENCODER_KEYS.items():
            if attr in self.encoder and self.encoder[attr] is not None:
                lines.append(f"{key} = {_fmt(self.encoder[attr])}")
        if self.embedder_dim is not None:
            lines.append(f"embedder.dim = {self.embedder_dim}")
        if self.embedder_hash_seed is not None:
            lines.append(f"embedder.hash_seed = {self.embedder_hash_seed}")
        lines.append(f"gamma_grid = {_fmt(tuple(self.gamma_grid))}")
        lines.append(f"lambda_grid = {_fmt(tuple(self.lambda_grid))}")
        lines.append(f"gradcheck.trials = {self.gradcheck_trials}")
        if self.gradcheck_perturb:
            lines.append(f"gradcheck.perturb = {_fmt(self.gradcheck_perturb)}")
        if self.reference_words:
            lines.append(f"report.reference_words = {','.join(self.reference_words)}")
        lines.append(f"report.context_sample = {self.context_sample}")
        return "\n".join(lines) + "\n"


def parse_config(text, path=None):
    cfg = RunConfig()
    train_kw = {}
    base_dir = Path(path).parent if path is not None else None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", path, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", path, lineno)
        seen.add(key)
        try:
            if key in PATH_KEYS:
                p = Path(value)
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                setattr(cfg, key, str(p.resolve()))
            elif key == "out_dir":
                p = Path(value)
                if base_dir is not None and not p.is_absolute():
                    p = base_dir / p
                cfg.out_dir = str(p.resolve())
            elif key in TRAIN_KEYS:
                attr = TRAIN_KEYS[key]
                ftype = {f.name: f.type for f in fields(TrainConfig)}[attr]
                if ftype == "bool":
                    train_kw[attr] = _parse_bool(value)
                elif ftype == "int":
                    train_kw[attr] = int(value)
                elif ftype == "float":
                    train_kw[attr] = float(value)
                else:
                    train_kw[attr] = value
            elif key in ENCODER_KEYS:
                attr, conv = ENCODER_KEYS[key]
                cfg.encoder[attr] = conv(value)
            elif key == "embedder.dim":
                cfg.embedder_dim = int(value)
            elif key == "embedder.hash_seed":
                cfg.embedder_hash_seed = int(value)
            elif key == "gamma_grid":
                cfg.gamma_grid = _floats(value)
            elif key == "lambda_grid":
                cfg.lambda_grid = _floats(value)
            elif key == "gradcheck.trials":
                cfg.gradcheck_trials = int(value)
            elif key == "gradcheck.perturb":
                cfg.gradcheck_perturb = float(value)
            elif key == "report.reference_words":
                words = tuple(w.strip() for w in value.split(",") if w.strip())
                if len(words) != 2:
                    raise ValueError("report.reference_words needs exactly two words")
                cfg.reference_words = words
            elif key == "report.context_sample":
                cfg.context_sample = int(value)
            else:
                raise ParseError(f"unknown key {key!r}", path, lineno)
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(f"bad value for {key!r}: {e}", path, lineno) from None
    try:
        cfg.train = TrainConfig(**train_kw)
    except ValueError as e:
        raise ParseError(str(e), path) from None
    if cfg.embedder_dim is not None and cfg.encoder.get("input_dim", cfg.embedder_dim) != cfg.embedder_dim:
        raise ParseError("embedder.dim and encoder.input_dim disagree", path)
    return cfg


def load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"), path)
