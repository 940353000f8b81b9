"""Input embeddings, the learnable transform, and their file formats."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    """Malformed input file. ``line`` is 1-based, or None for whole-file errors."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


def as_vector(values, dim=None):
    """Validate and return a finite float64 vector, optionally of length ``dim``."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("vector has non-finite entries")
    return x


def as_square(values):
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


@dataclass
class TransformMatrix:
    """The k x k map applied to every input vector before encoding.

    Mutable in place during training; everything else treats it as read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = as_square(self.matrix).copy()

    @classmethod
    def identity(cls, dim):
        if dim <= 0:
            raise ValueError("dim must be positive")
        return cls(np.eye(dim))

    @property
    def dim(self):
        return self.matrix.shape[0]

    def copy(self):
        return TransformMatrix(self.matrix.copy())

    def __eq__(self, other):
        if not isinstance(other, TransformMatrix):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and np.array_equal(self.matrix, other.matrix)


def _matrix_of(m):
    return m.matrix if isinstance(m, TransformMatrix) else as_square(m)


def apply_transform(m, x):
    """Return ``M @ x`` for a single vector or a stack of row vectors."""
    mat = _matrix_of(m)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != mat.shape[1]:
        raise ValueError(f"dimension mismatch: transform is {mat.shape[0]}, input is {x.shape[-1]}")
    return x @ mat.T


def ortho_residual(m):
    """Frobenius norm of ``I - M^T M``; zero exactly when M is orthogonal."""
    mat = _matrix_of(m)
    r = np.eye(mat.shape[0]) - mat.T @ mat
    return float(np.linalg.norm(r, "fro"))


def save_transform(m, path):
    mat = _matrix_of(m)
    lines = [str(mat.shape[0])]
    for row in mat:
        lines.append(" ".join(format(v, ".17g") for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_transform(path):
    """Read a matrix written by :func:`save_transform`.

    Raises ParseError naming the offending line for a bad header, a wrong
    row count or width, or a non-numeric entry.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty matrix file", path, 1)
    try:
        k = int(lines[0].strip())
    except ValueError:
        raise ParseError(f"bad header {lines[0]!r}, expected the dimension k", path, 1) from None
    if k <= 0:
        raise ParseError(f"dimension must be positive, got {k}", path, 1)
    rows = lines[1:]
    if len(rows) != k:
        raise ParseError(f"header declares k={k} but file has {len(rows)} rows", path, len(lines) + 1)
    mat = np.empty((k, k))
    for i, row in enumerate(rows):
        lineno = i + 2
        parts = row.split()
        if len(parts) != k:
            raise ParseError(f"expected {k} entries, got {len(parts)}", path, lineno)
        for j, tok in enumerate(parts):
            try:
                mat[i, j] = float(tok)
            except ValueError:
                raise ParseError(f"non-numeric entry {tok!r}", path, lineno) from None
    if not np.all(np.isfinite(mat)):
        raise ParseError("matrix has non-finite entries", path)
    return TransformMatrix(mat)


def load_embedding_table(path):
    """Read ``<vocab_size> <k>`` then ``<token> <k floats>`` lines into a dict."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty embedding table", path, 1)
    header = lines[0].split()
    try:
        vocab_size, dim = int(header[0]), int(header[1])
        if len(header) != 2:
            raise ValueError
    except (ValueError, IndexError):
        raise ParseError(f"bad header {lines[0]!r}, expected '<vocab_size> <k>'", path, 1) from None
    table = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        token, vals = parts[0], parts[1:]
        if len(vals) != dim:
            raise ParseError(f"expected {dim} values for {token!r}, got {len(vals)}", path, lineno)
        if token in table:
            raise ParseError(f"duplicate token {token!r}", path, lineno)
        try:
            vec = np.array([float(v) for v in vals])
        except ValueError:
            raise ParseError(f"non-numeric value in row for {token!r}", path, lineno) from None
        if not np.all(np.isfinite(vec)) or np.any(np.abs(vec) > 1.0):
            raise ParseError(f"values for {token!r} must be finite and within [-1, 1]", path, lineno)
        table[token] = vec
    if len(table) != vocab_size:
        raise ParseError(f"header declares {vocab_size} words but file has {len(table)}", path)
    return table, dim


def save_embedding_table(table, path):
    dim = len(next(iter(table.values()))) if table else 0
    lines = [f"{len(table)} {dim}"]
    for tok, vec in table.items():
        lines.append(tok + " " + " ".join(format(v, ".17g") for v in vec))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


_BUCKETS_PER_GRAM = 4


@dataclass
class InputEmbedder:
    """Context-free word vectors in [-1, 1]^k.

    Words found in ``table`` use the stored vector. Any other word is embedded
    by hashing its character 3-grams (with ``<``/``>`` boundary marks) and the
    whole word into signed bucket counts, then squashing with tanh, which
    gives every string a deterministic vector.
    """

    dim: int
    table: dict = field(default_factory=dict)
    hash_seed: int = 0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("embedding dim must be positive")
        for tok, vec in self.table.items():
            vec = as_vector(vec, self.dim)
            if np.any(np.abs(vec) > 1.0):
                raise ValueError(f"table vector for {tok!r} leaves [-1, 1]")
            self.table[tok] = vec

    def _hash_vector(self, word):
        key = (self.hash_seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
        marked = f"<{word}>"
        grams = [marked[i:i + 3] for i in range(max(len(marked) - 2, 1))]
        grams.append(marked)  # whole-word feature, keeps short words apart
        acc = np.zeros(self.dim)
        for gram in grams:
            digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8 * _BUCKETS_PER_GRAM, key=key).digest()
            for b in range(_BUCKETS_PER_GRAM):
                h = int.from_bytes(digest[8 * b:8 * b + 8], "little")
                sign = 1.0 if (h >> 63) & 1 else -1.0
                acc[h % self.dim] += sign
        return np.tanh(acc / math.sqrt(len(grams)))

    def embed(self, word):
        if not isinstance(word, str) or not word:
            raise ValueError("cannot embed an empty token")
        vec = self._cache.get(word)
        if vec is None:
            vec = self.table[word].copy() if word in self.table else self._hash_vector(word)
            vec.flags.writeable = False
            self._cache[word] = vec
        return vec

    def embed_tokens(self, tokens):
        """Stack the vectors of ``tokens`` into an (l, k) array."""
        return np.stack([self.embed(t) for t in tokens])


def embed_word(embedder, word):
    return embedder.embed(word).copy()
