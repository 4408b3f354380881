"""Parameters and forward computations of the cbow model.

The input matrix stacks one row per vocabulary word followed by ``buckets``
rows for hashed character n-grams. The output matrix has one row per word.
With position weighting, a third matrix holds one row per relative
position ``p`` in ``[-c, ..., -1, 1, ..., c]``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from cbowkit.corpus import Vocab, encode_token

FNV_OFFSET = 2166136261
FNV_PRIME = 16777619


@dataclass
class ModelConfig:
    """Architecture hyper-parameters.

    Defaults follow the baseline setting: window 5, and character n-grams
    of 3 to 6 characters when subwords are on.
    """

    dim: int = 100
    window: int = 5
    use_position_weights: bool = False
    use_subwords: bool = False
    minn: int = 3
    maxn: int = 6
    buckets: int = 2_000_000

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if not 1 <= self.minn <= self.maxn:
            raise ValueError("need 1 <= minn <= maxn, got minn=%r maxn=%r" % (self.minn, self.maxn))
        if self.use_subwords and self.buckets < 1:
            raise ValueError("buckets must be >= 1 when subwords are enabled")

    def to_dict(self) -> dict:
        return asdict(self)


def position_row(p: int, window: int) -> int:
    """Row of the position matrix holding relative position `p` (``p != 0``)."""
    if p == 0 or abs(p) > window:
        raise ValueError("relative position must be in [-%i, %i] \\ {0}, got %r" % (window, window, p))
    return p + window if p < 0 else p + window - 1


def char_ngrams(word: str, minn: int = 3, maxn: int = 6) -> list[str]:
    """Character n-grams of ``<word>``, shortest first.

    The fully wrapped word is excluded, since the word has its own vector.
    Repeated n-grams are listed once.

    >>> char_ngrams("where", 3, 3)
    ['<wh', 'whe', 'her', 'ere', 're>']
    """
    wrapped = "<" + word + ">"
    seen: dict[str, None] = {}
    for n in range(minn, min(maxn, len(wrapped)) + 1):
        for i in range(len(wrapped) - n + 1):
            gram = wrapped[i:i + n]
            if gram != wrapped:
                seen.setdefault(gram, None)
    return list(seen)


def fnv1a_32(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFF
    return h


def hash_ngram(ngram: str | bytes, buckets: int) -> int:
    """Bucket of `ngram`: 32-bit FNV-1a of its UTF-8 bytes, modulo `buckets`."""
    if buckets < 1:
        raise ValueError("buckets must be >= 1")
    if isinstance(ngram, str):
        ngram = encode_token(ngram)
    return fnv1a_32(ngram) % buckets


class SubwordIndex:
    """Input-matrix rows of the n-gram buckets of every vocabulary word.

    Stored in CSR form: the buckets of word ``i`` are
    ``rows[offsets[i]:offsets[i + 1]]``, already shifted past the word rows.
    """

    def __init__(self, offsets: np.ndarray, rows: np.ndarray, n_words: int, config: ModelConfig):
        self.offsets = offsets
        self.rows = rows
        self.n_words = n_words
        self.config = config

    @classmethod
    def build(cls, tokens: Sequence[str], config: ModelConfig) -> "SubwordIndex":
        n = len(tokens)
        offsets = np.zeros(n + 1, dtype=np.int64)
        rows: list[int] = []
        for i, tok in enumerate(tokens):
            rows.extend(n + b for b in ngram_buckets(tok, config))
            offsets[i + 1] = len(rows)
        return cls(offsets, np.array(rows, dtype=np.int32), n, config)

    @classmethod
    def empty(cls, n_words: int, config: ModelConfig) -> "SubwordIndex":
        return cls(np.zeros(n_words + 1, dtype=np.int64), np.zeros(0, dtype=np.int32), n_words, config)

    def word_rows(self, i: int) -> np.ndarray:
        return self.rows[self.offsets[i]:self.offsets[i + 1]]

    def oov_rows(self, word: str) -> np.ndarray:
        return np.array([self.n_words + b for b in ngram_buckets(word, self.config)], dtype=np.int64)


def ngram_buckets(word: str, config: ModelConfig) -> list[int]:
    return [hash_ngram(g, config.buckets) for g in char_ngrams(word, config.minn, config.maxn)]


@dataclass
class EmbeddingSet:
    """The three parameter matrices.

    Attributes
    ----------
    input : ndarray, shape (n_words + buckets, dim)
        Context-side word vectors followed by n-gram bucket vectors.
    output : ndarray, shape (n_words, dim)
        Predicted-word vectors.
    positions : ndarray, shape (2 * window, dim), or None
        Per-position reweighting vectors; present only with position weights.

    """

    input: np.ndarray
    output: np.ndarray
    positions: np.ndarray | None = None

    @classmethod
    def initialize(cls, n_words: int, config: ModelConfig, seed: int = 1, dtype=np.float32) -> "EmbeddingSet":
        """Uniform input rows in +-0.5/dim, zero output rows, positions at 1/(2c)."""
        rng = np.random.default_rng(seed)
        n_input = n_words + (config.buckets if config.use_subwords else 0)
        bound = 0.5 / config.dim
        inp = rng.uniform(-bound, bound, size=(n_input, config.dim)).astype(dtype)
        out = np.zeros((n_words, config.dim), dtype=dtype)
        pos = None
        if config.use_position_weights:
            pos = np.full((2 * config.window, config.dim), 1.0 / (2 * config.window), dtype=dtype)
        return cls(inp, out, pos)

    def astype(self, dtype) -> "EmbeddingSet":
        return EmbeddingSet(
            self.input.astype(dtype),
            self.output.astype(dtype),
            None if self.positions is None else self.positions.astype(dtype),
        )

    def copy(self) -> "EmbeddingSet":
        return self.astype(self.input.dtype)

    def is_finite(self) -> bool:
        mats = [self.input, self.output] + ([] if self.positions is None else [self.positions])
        return all(np.isfinite(m).all() for m in mats)


def input_vector(word: str, vocab: Vocab, embeddings: EmbeddingSet, config: ModelConfig,
                 subwords: SubwordIndex | None = None) -> np.ndarray:
    """Context-side representation of `word`.

    The word row, plus the mean of its n-gram bucket rows when subwords are
    enabled. An out-of-vocabulary word is represented by its n-gram mean
    alone.

    Raises
    ------
    KeyError
        If `word` is out of vocabulary and cannot be composed from n-grams.

    """
    idx = vocab.index.get(word)
    if config.use_subwords and subwords is None:
        subwords = SubwordIndex.build(vocab.tokens, config)
    if idx is not None:
        vec = embeddings.input[idx].astype(np.float64)
        if config.use_subwords:
            rows = subwords.word_rows(idx)
            if len(rows):
                vec = vec + embeddings.input[rows].astype(np.float64).mean(axis=0)
        return vec
    if not config.use_subwords:
        raise KeyError("%r is out of vocabulary" % word)
    rows = subwords.oov_rows(word)
    if not len(rows):
        raise KeyError("%r is out of vocabulary and has no character n-grams" % word)
    return embeddings.input[rows].astype(np.float64).mean(axis=0)


def context_vector(sentence: Sequence[str], t: int, vocab: Vocab, embeddings: EmbeddingSet,
                   config: ModelConfig, subwords: SubwordIndex | None = None,
                   window: int | None = None):
    """Aggregate the context of position `t` of `sentence`.

    Plain mode averages the input vectors of the in-vocabulary words within
    `window` positions (default ``config.window``). With position weights,
    each context vector is multiplied elementwise by its position row and
    the products are summed. Windows are truncated at sentence edges.

    Returns
    -------
    (ndarray or None, list of (int, str))
        The context vector and the ``(relative position, word)`` pairs that
        contributed. The vector is None when no context word is present, in
        which case the center word should be skipped.

    """
    c = config.window if window is None else window
    if config.use_subwords and subwords is None:
        subwords = SubwordIndex.build(vocab.tokens, config)
    pairs = []
    for p in range(-c, c + 1):
        j = t + p
        if p == 0 or j < 0 or j >= len(sentence):
            continue
        if sentence[j] in vocab.index:
            pairs.append((p, sentence[j]))
    if not pairs:
        return None, pairs
    vecs = [input_vector(w, vocab, embeddings, config, subwords) for _, w in pairs]
    if config.use_position_weights:
        h = np.zeros(config.dim)
        for (p, _), v in zip(pairs, vecs):
            h += embeddings.positions[position_row(p, config.window)] * v
        return h, pairs
    return np.mean(vecs, axis=0), pairs


def score(context_vec: np.ndarray, word: int, embeddings: EmbeddingSet) -> float:
    """Dot product of a context vector with the output row of `word`."""
    if not 0 <= word < embeddings.output.shape[0]:
        raise IndexError("word id %r out of range" % word)
    return float(np.dot(context_vec, embeddings.output[word]))


class Model:
    """A trained (or freshly initialized) cbow model with its vocabulary."""

    def __init__(self, vocab: Vocab, config: ModelConfig, embeddings: EmbeddingSet,
                 train_config=None):
        self.vocab = vocab
        self.config = config
        self.embeddings = embeddings
        self.train_config = train_config
        if config.use_subwords:
            self.subwords = SubwordIndex.build(vocab.tokens, config)
        else:
            self.subwords = SubwordIndex.empty(len(vocab), config)

    def __contains__(self, word: str) -> bool:
        if word in self.vocab:
            return True
        return self.config.use_subwords and bool(char_ngrams(word, self.config.minn, self.config.maxn))

    def word_vector(self, word: str) -> np.ndarray:
        return input_vector(word, self.vocab, self.embeddings, self.config, self.subwords)

    def composed_vectors(self) -> np.ndarray:
        """One composed input vector per vocabulary word, in id order."""
        inp = self.embeddings.input
        n = len(self.vocab)
        out = inp[:n].astype(np.float32, copy=True)
        if self.config.use_subwords:
            offs, rows = self.subwords.offsets, self.subwords.rows
            for i in range(n):
                lo, hi = offs[i], offs[i + 1]
                if hi > lo:
                    out[i] += inp[rows[lo:hi]].mean(axis=0)
        return out
