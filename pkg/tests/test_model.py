import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbowkit.corpus import build_vocab
from cbowkit.model import (
    EmbeddingSet,
    Model,
    ModelConfig,
    SubwordIndex,
    char_ngrams,
    context_vector,
    hash_ngram,
    input_vector,
    position_row,
    score,
)
from oracles import fnv1a_reference


def test_char_ngrams_examples():
    assert char_ngrams("as", 3, 3) == ["<as", "as>"]
    assert char_ngrams("a", 4, 6) == []
    assert char_ngrams("where", 3, 3) == ["<wh", "whe", "her", "ere", "re>"]


def test_char_ngrams_excludes_whole_word_and_dedups():
    assert "<as>" not in char_ngrams("as", 3, 6)
    grams = char_ngrams("aaaa", 2, 3)
    assert len(grams) == len(set(grams))
    assert grams == ["<a", "aa", "a>", "<aa", "aaa", "aa>"]


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="abcé_", min_size=1, max_size=10), st.integers(1, 4), st.integers(0, 3))
def test_char_ngrams_are_substrings_of_bounded_length(word, minn, extra):
    maxn = minn + extra
    wrapped = "<" + word + ">"
    for g in char_ngrams(word, minn, maxn):
        assert minn <= len(g) <= maxn and g in wrapped and g != wrapped


def test_hash_ngram_examples():
    assert hash_ngram(b"", 2 ** 32) == 2166136261
    assert hash_ngram(b"", 10) == 1
    assert all(hash_ngram(g, 1) == 0 for g in ["a", "<wh", "xyz"])
    assert hash_ngram("whe", 1000) == hash_ngram("whe", 1000)


def test_hash_ngram_matches_reference_on_corpus():
    rng = np.random.default_rng(0)
    strings = [bytes(rng.integers(0, 256, size=int(rng.integers(0, 12))).tolist()) for _ in range(1000)]
    for s in strings:
        assert hash_ngram(s, 2 ** 32) == fnv1a_reference(s)
        assert hash_ngram(s, 2_000_000) == fnv1a_reference(s) % 2_000_000


def test_position_row_layout():
    c = 3
    rows = [position_row(p, c) for p in (-3, -2, -1, 1, 2, 3)]
    assert rows == [0, 1, 2, 3, 4, 5]
    with pytest.raises(ValueError):
        position_row(0, c)


@pytest.mark.parametrize("kwargs", [{"dim": 0}, {"window": 0}, {"minn": 7, "maxn": 6}, {"minn": 0},
                                    {"use_subwords": True, "buckets": 0}])
def test_model_config_validation(kwargs):
    with pytest.raises(ValueError):
        ModelConfig(**kwargs)


def test_initialization():
    cfg = ModelConfig(dim=10, window=4, use_position_weights=True, use_subwords=True, buckets=7)
    emb = EmbeddingSet.initialize(5, cfg, seed=0)
    assert emb.input.shape == (12, 10) and emb.output.shape == (5, 10)
    assert np.abs(emb.input).max() <= 0.05
    assert not emb.output.any()
    assert emb.positions.shape == (8, 10) and np.all(emb.positions == np.float32(1 / 8))
    assert EmbeddingSet.initialize(5, ModelConfig(dim=10)).positions is None


def tiny(dim=2, **cfg):
    vocab = build_vocab([["ab", "cd", "ef", "ab"]])
    config = ModelConfig(dim=dim, window=2, buckets=4, minn=2, maxn=2, **cfg)
    emb = EmbeddingSet.initialize(len(vocab), config, dtype=np.float64)
    return vocab, config, emb


def test_input_vector_plain_is_word_row():
    vocab, cfg, emb = tiny()
    assert np.array_equal(input_vector("cd", vocab, emb, cfg), emb.input[vocab.id("cd")])
    with pytest.raises(KeyError):
        input_vector("zz", vocab, emb, cfg)


def test_input_vector_subword_mean():
    vocab = build_vocab([["a", "b"]])
    cfg = ModelConfig(dim=2, window=1, use_subwords=True, buckets=1000, minn=2, maxn=2)
    emb = EmbeddingSet.initialize(len(vocab), cfg, dtype=np.float64)
    sw = SubwordIndex.build(vocab.tokens, cfg)
    w = vocab.id("a")
    rows = sw.word_rows(w)
    assert len(rows) == 2 and rows[0] != rows[1]  # "<a", "a>"
    emb.input[:] = 0
    emb.input[w] = [1, 1]
    assert np.array_equal(input_vector("a", vocab, emb, cfg, sw), [1, 1])
    emb.input[rows[0]] = [2, 0]
    emb.input[rows[1]] = [0, 2]
    np.testing.assert_allclose(input_vector("a", vocab, emb, cfg, sw), [2, 2])


def test_input_vector_oov_composition():
    vocab, cfg, emb = tiny(use_subwords=True)
    sw = SubwordIndex.build(vocab.tokens, cfg)
    rows = sw.oov_rows("zab")
    np.testing.assert_allclose(input_vector("zab", vocab, emb, cfg, sw), emb.input[rows].mean(axis=0))


def test_input_vector_ngram_order_invariant():
    vocab, cfg, emb = tiny(dim=4, use_subwords=True)
    sw = SubwordIndex.build(vocab.tokens, cfg)
    w = vocab.id("ef")
    a = input_vector("ef", vocab, emb, cfg, sw)
    lo, hi = sw.offsets[w], sw.offsets[w + 1]
    sw.rows[lo:hi] = sw.rows[lo:hi][::-1].copy()
    np.testing.assert_allclose(input_vector("ef", vocab, emb, cfg, sw), a, rtol=1e-15)


def test_context_vector_plain_single_word():
    vocab, cfg, emb = tiny()
    h, pairs = context_vector(["ab", "cd"], 1, vocab, emb, cfg)
    assert pairs == [(-1, "ab")]
    np.testing.assert_array_equal(h, emb.input[vocab.id("ab")])


def test_context_vector_empty():
    vocab, cfg, emb = tiny()
    h, pairs = context_vector(["ab"], 0, vocab, emb, cfg)
    assert h is None and pairs == []
    h, _ = context_vector(["ab", "zz"], 0, vocab, emb, cfg)
    assert h is None


def test_context_vector_weighted_identity_and_zero():
    vocab, cfg, emb = tiny(use_position_weights=True)
    sent = ["ab", "cd", "ef", "ab"]
    emb.positions[:] = 1.0
    h, pairs = context_vector(sent, 1, vocab, emb, cfg)
    expected = sum(emb.input[vocab.id(w)] for _, w in pairs)
    np.testing.assert_allclose(h, expected)
    emb.positions[:] = 0.0
    h, _ = context_vector(sent, 1, vocab, emb, cfg)
    assert not h.any()


@pytest.mark.parametrize("t", [0, 1, 2, 3])
def test_plain_equals_weighted_with_uniform_positions(t):
    vocab, cfg_w, emb = tiny(dim=3, use_position_weights=True)
    cfg_p = ModelConfig(dim=3, window=2, buckets=4, minn=2, maxn=2)
    sent = ["ab", "cd", "ef", "ab"]
    plain, pairs = context_vector(sent, t, vocab, emb, cfg_p)
    emb.positions[:] = 1.0 / len(pairs)
    weighted, _ = context_vector(sent, t, vocab, emb, cfg_w)
    np.testing.assert_allclose(weighted, plain, rtol=1e-12)


def test_score_examples():
    emb = EmbeddingSet(np.zeros((2, 2)), np.array([[1.0, 0.0], [1.0, 1.0]]))
    assert score(np.array([1.0, 0.0]), 0, emb) == 1.0
    assert score(np.zeros(2), 0, emb) == score(np.zeros(2), 1, emb) == 0.0
    assert score(np.array([0.5, 0.5]), 1, emb) == 1.0
    with pytest.raises(IndexError):
        score(np.zeros(2), 2, emb)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.integers(0, 2 ** 16))
def test_score_bilinear(alpha, beta, seed):
    rng = np.random.default_rng(seed)
    emb = EmbeddingSet(np.zeros((1, 5)), rng.normal(size=(3, 5)))
    x, y = rng.normal(size=5), rng.normal(size=5)
    lhs = score(alpha * x + beta * y, 2, emb)
    rhs = alpha * score(x, 2, emb) + beta * score(y, 2, emb)
    assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-9)


def test_model_composed_vectors_match_input_vector():
    vocab, cfg, emb = tiny(dim=3, use_subwords=True)
    m = Model(vocab, cfg, emb)
    comp = m.composed_vectors()
    for w in vocab.tokens:
        np.testing.assert_allclose(comp[vocab.id(w)], m.word_vector(w), rtol=1e-6)
    assert "zab" in m and "ab" in m
