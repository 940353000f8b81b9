import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parfit.embedding import (
    InputEmbedder, ParseError, TransformMatrix, apply_transform, embed_word,
    load_embedding_table, load_transform, ortho_residual, save_embedding_table, save_transform,
)


def random_orthogonal(k, seed):
    q, r = np.linalg.qr(np.random.default_rng(seed).standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def test_table_lookup_returns_stored_vector():
    v = np.linspace(-1, 1, 4)
    emb = InputEmbedder(4, table={"cat": v})
    assert np.array_equal(emb.embed("cat"), v)


def test_oov_embedding_is_deterministic():
    a = InputEmbedder(16, hash_seed=3).embed("zebra")
    b = InputEmbedder(16, hash_seed=3).embed("zebra")
    assert a.tobytes() == b.tobytes()
    assert embed_word(InputEmbedder(16, hash_seed=3), "zebra").tobytes() == a.tobytes()


def test_distinct_oov_words_differ():
    emb = InputEmbedder(16, hash_seed=7)
    assert np.linalg.norm(emb.embed("bigger") - emb.embed("larger")) > 0


def test_hash_seed_changes_vectors():
    assert not np.array_equal(InputEmbedder(16, hash_seed=1).embed("w"), InputEmbedder(16, hash_seed=2).embed("w"))


def test_oov_vectors_are_bounded():
    emb = InputEmbedder(16, hash_seed=0)
    for w in ("a", "supercalifragilistic", "x1"):
        v = emb.embed(w)
        assert v.shape == (16,) and np.all(np.abs(v) <= 1.0)


def test_empty_token_rejected():
    with pytest.raises(ValueError):
        InputEmbedder(4).embed("")


def test_table_dimension_checked():
    with pytest.raises(ValueError):
        InputEmbedder(4, table={"a": np.zeros(3)})


def test_identity_transform_is_noop():
    x = np.random.default_rng(0).standard_normal(5)
    assert np.array_equal(apply_transform(TransformMatrix.identity(5), x), x)


def test_scalar_transform():
    out = apply_transform(2 * np.eye(3), np.array([1.0, 0.0, -1.0]))
    assert np.array_equal(out, [2.0, 0.0, -2.0])


def test_transform_matches_hand_product():
    rng = np.random.default_rng(11)
    m, x = rng.standard_normal((6, 6)), rng.standard_normal(6)
    expect = [sum(m[i, j] * x[j] for j in range(6)) for i in range(6)]
    assert np.allclose(apply_transform(m, x), expect, rtol=0, atol=1e-12)


def test_transform_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_transform(np.eye(3), np.ones(4))


def test_ortho_residual_cases():
    assert ortho_residual(np.eye(4)) == 0.0
    assert ortho_residual(2 * np.eye(3)) == pytest.approx(3 * np.sqrt(3), abs=1e-12)


def test_ortho_residual_brute_force():
    m = np.random.default_rng(5).standard_normal((8, 8))
    total = 0.0
    for i in range(8):
        for j in range(8):
            mtm = sum(m[r, i] * m[r, j] for r in range(8))
            total += ((1.0 if i == j else 0.0) - mtm) ** 2
    assert ortho_residual(m) == pytest.approx(np.sqrt(total), rel=1e-12)


def test_ortho_residual_left_orthogonal_invariance():
    m = np.random.default_rng(2).standard_normal((5, 5))
    q = random_orthogonal(5, 3)
    assert ortho_residual(q @ m) == pytest.approx(ortho_residual(m), abs=1e-6)


@given(st.integers(0, 10_000), st.integers(2, 12))
@settings(max_examples=40, deadline=None)
def test_orthogonal_map_is_isometry(seed, k):
    q = random_orthogonal(k, seed)
    rng = np.random.default_rng(seed + 1)
    x, y = rng.standard_normal(k), rng.standard_normal(k)
    mx, my = apply_transform(q, x), apply_transform(q, y)
    assert abs(np.linalg.norm(mx - my) - np.linalg.norm(x - y)) <= 1e-9
    cos = lambda a, b: a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
    assert abs(cos(mx, my) - cos(x, y)) <= 1e-9


@given(st.integers(0, 10_000), st.floats(0.0, 0.05))
@settings(max_examples=40, deadline=None)
def test_near_orthogonal_map_nearly_isometric(seed, eps):
    # ||Mx||^2 = ||x||^2 - x^T (I - M^T M) x, so relative distortion <= residual
    k = 6
    rng = np.random.default_rng(seed)
    m = random_orthogonal(k, seed) + eps * rng.standard_normal((k, k)) / k
    r = ortho_residual(m)
    x, y = rng.standard_normal(k), rng.standard_normal(k)
    d0 = np.linalg.norm(x - y)
    d1 = np.linalg.norm(apply_transform(m, x) - apply_transform(m, y))
    assert abs(d1 - d0) <= r * d0 + 1e-12


def test_transform_round_trip_identity(tmp_path):
    p = tmp_path / "m.txt"
    save_transform(TransformMatrix.identity(4), p)
    assert load_transform(p) == TransformMatrix.identity(4)


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_transform_round_trip_bit_exact(tmp_path_factory, seed):
    m = TransformMatrix(np.random.default_rng(seed).standard_normal((5, 5)) * 10.0 ** np.random.default_rng(seed).integers(-8, 8))
    p = tmp_path_factory.mktemp("rt") / "m.txt"
    save_transform(m, p)
    assert load_transform(p).matrix.tobytes() == m.matrix.tobytes()


@pytest.mark.parametrize("text,line", [
    ("3\n1 0 0\n0 1 0\n", 4),
    ("x\n1\n", 1),
    ("2\n1 0\n0 zz\n", 3),
    ("2\n1 0 0\n0 1\n", 2),
    ("", 1),
])
def test_malformed_transform_files(tmp_path, text, line):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(ParseError) as e:
        load_transform(p)
    assert e.value.line == line
    assert f":{line}" in str(e.value)


def test_embedding_table_round_trip(tmp_path):
    table = {"a": np.array([0.5, -0.25]), "b": np.array([1.0, 0.0])}
    p = tmp_path / "t.txt"
    save_embedding_table(table, p)
    back, dim = load_embedding_table(p)
    assert dim == 2 and set(back) == {"a", "b"}
    assert all(back[w].tobytes() == table[w].tobytes() for w in table)


@pytest.mark.parametrize("text", ["2 2\na 0 0\na 1 1\n", "1 2\na 0 2\n", "2 2\na 0 0\n", "1 2\na 0\n"])
def test_malformed_embedding_tables(tmp_path, text):
    p = tmp_path / "t.txt"
    p.write_text(text)
    with pytest.raises(ParseError):
        load_embedding_table(p)
