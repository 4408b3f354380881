"""Streaming corpus ingestion.

Sentences are lists of ``str`` tokens. Lines are split on runs of ASCII
whitespace only, and bytes that are not valid UTF-8 survive as surrogate
escapes, so a token round-trips byte-exactly through :func:`encode_token`.

Examples
--------
>>> stream = TokenStream.from_lines(["new york is big", "new york is big", "so is paris"])
>>> kept = dedup_sentences(stream)
>>> len(kept)
2
>>> vocab = build_vocab(kept, min_count=1)
>>> vocab.tokens[:3]
['is', 'big', 'new']

"""

from __future__ import annotations

import hashlib
import logging
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)

Sentence = list[str]


def encode_token(token: str) -> bytes:
    return token.encode("utf-8", "surrogateescape")


def tokenize(line: bytes | str) -> Sentence:
    """Split `line` on runs of ASCII whitespace.

    No other normalization is applied; an empty or blank line gives ``[]``.
    """
    if isinstance(line, str):
        line = line.encode("utf-8", "surrogateescape")
    # bytes.split() breaks on ASCII whitespace only, unlike str.split()
    return [tok.decode("utf-8", "surrogateescape") for tok in line.split()]


class TokenStream:
    """A re-iterable sequence of tokenized sentences.

    Backed either by an in-memory list or by a text file that is re-read on
    every pass, so two iterations always produce the same sentences.

    Parameters
    ----------
    source : sequence of list of str, or path
        Sentences, or the path of a one-sentence-per-line text file.

    """

    def __init__(self, source: Sequence[Sentence] | str | Path):
        if isinstance(source, (str, Path)):
            self._path: Path | None = Path(source)
            self._sentences: Sequence[Sentence] | None = None
        else:
            self._path = None
            self._sentences = source
        self._total: int | None = None
        # sentences removed by the step that produced this stream, if any
        self.dropped = 0

    @classmethod
    def from_lines(cls, lines: Iterable[bytes | str]) -> "TokenStream":
        return cls([tokenize(line) for line in lines])

    @classmethod
    def from_file(cls, path: str | Path) -> "TokenStream":
        return cls(path)

    def __iter__(self) -> Iterator[Sentence]:
        if self._path is not None:
            with open(self._path, "rb") as fin:
                for line in fin:
                    yield tokenize(line)
        else:
            for sentence in self._sentences:
                yield list(sentence)

    def __len__(self) -> int:
        if self._sentences is not None:
            return len(self._sentences)
        return sum(1 for _ in self)

    @property
    def total_tokens(self) -> int:
        if self._total is None:
            self._total = sum(len(s) for s in self)
        return self._total

    def materialize(self) -> "TokenStream":
        """Return an in-memory copy of this stream."""
        return TokenStream(list(self))


def read_sentences(path: str | Path) -> Iterator[Sentence]:
    with open(path, "rb") as fin:
        for line in fin:
            yield tokenize(line)


def write_sentences(sentences: Iterable[Sequence[str]], path: str | Path) -> int:
    n = 0
    with open(path, "wb") as fout:
        for sentence in sentences:
            fout.write(b" ".join(encode_token(t) for t in sentence) + b"\n")
            n += 1
    return n


# ---------------------------------------------------------------------------
# de-duplication
# ---------------------------------------------------------------------------

def sentence_fingerprint(sentence: Sequence[str]) -> bytes:
    """128-bit fingerprint of the space-joined token bytes."""
    joined = b" ".join(encode_token(t) for t in sentence)
    return hashlib.blake2b(joined, digest_size=16).digest()


class SentenceDeduplicator:
    """Drop repeated sentences, keeping first occurrences in order.

    The fingerprint set is shared and guarded by a lock, so several threads
    may feed disjoint shards through the same instance without losing
    inserts.

    Parameters
    ----------
    exact : bool
        Keep the joined bytes of every kept sentence and compare them on a
        fingerprint hit, so that a hash collision can never drop a distinct
        sentence.

    Attributes
    ----------
    kept, dropped : int
        Running counts over everything seen so far.

    """

    def __init__(self, exact: bool = False):
        self.exact = exact
        self.kept = 0
        self.dropped = 0
        self._seen: dict[bytes, bytes | None] = {}
        self._collided: set[bytes] = set()
        self._lock = threading.Lock()

    def insert_if_absent(self, sentence: Sequence[str]) -> bool:
        """Record `sentence`; return True if it had not been seen before."""
        joined = b" ".join(encode_token(t) for t in sentence)
        key = hashlib.blake2b(joined, digest_size=16).digest()
        with self._lock:
            if key not in self._seen:
                self._seen[key] = joined if self.exact else None
                self.kept += 1
                return True
            if self.exact and self._seen[key] != joined and joined not in self._collided:
                self._collided.add(joined)
                self.kept += 1
                return True
            self.dropped += 1
            return False

    def filter(self, sentences: Iterable[Sentence]) -> Iterator[Sentence]:
        for sentence in sentences:
            if self.insert_if_absent(sentence):
                yield sentence


def dedup_sentences(stream: Iterable[Sentence], exact: bool = False) -> TokenStream:
    """Return the distinct sentences of `stream` in first-occurrence order.

    The number of dropped sentences is logged; use
    :class:`SentenceDeduplicator` directly to read it programmatically.
    """
    dedup = SentenceDeduplicator(exact=exact)
    kept = list(dedup.filter(stream))
    logger.info("dedup: kept %i sentences, dropped %i duplicates", dedup.kept, dedup.dropped)
    out = TokenStream(kept)
    out.dropped = dedup.dropped
    return out


# ---------------------------------------------------------------------------
# vocabulary
# ---------------------------------------------------------------------------

@dataclass
class Vocab:
    """Token to dense id map with raw counts.

    Ids are assigned by descending count, ties broken by ascending token.
    """

    tokens: list[str] = field(default_factory=list)
    counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    min_count: int = 1

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.tokens) != len(self.counts):
            raise ValueError("tokens and counts differ in length")
        self.index = {tok: i for i, tok in enumerate(self.tokens)}

    @classmethod
    def from_counts(cls, counts: dict[str, int], min_count: int = 1) -> "Vocab":
        if min_count < 1:
            raise ValueError("min_count must be >= 1, got %r" % min_count)
        items = sorted(
            ((tok, c) for tok, c in counts.items() if c >= min_count),
            key=lambda kv: (-kv[1], kv[0]),
        )
        return cls([tok for tok, _ in items], np.array([c for _, c in items], dtype=np.int64), min_count)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def id(self, token: str) -> int:
        return self.index[token]

    def count(self, token: str) -> int:
        return int(self.counts[self.index[token]])

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        total = self.total_count
        if total == 0:
            return np.zeros(0)
        return self.counts / float(total)

    def discard_probs(self, t: float) -> np.ndarray:
        """Per-id discard probability under threshold `t`."""
        return np.array([discard_prob(f, t) for f in self.frequencies()], dtype=np.float64)

    def encode(self, sentence: Sequence[str]) -> np.ndarray:
        """Ids of the in-vocabulary tokens of `sentence`; OOV tokens are dropped."""
        index = self.index
        return np.array([index[w] for w in sentence if w in index], dtype=np.int32)

    def save(self, path: str | Path) -> None:
        """Write ``#total <n>`` then one ``token<TAB>count`` line per entry."""
        with open(path, "wb") as fout:
            fout.write(b"#total %d\n" % self.total_count)
            for tok, c in zip(self.tokens, self.counts):
                fout.write(encode_token(tok) + b"\t%d\n" % c)

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        tokens, counts = [], []
        declared = None
        with open(path, "rb") as fin:
            for lineno, line in enumerate(fin, 1):
                line = line.rstrip(b"\n")
                if lineno == 1 and line.startswith(b"#total"):
                    declared = int(line.split()[1])
                    continue
                if not line:
                    continue
                try:
                    tok, c = line.split(b"\t")
                    counts.append(int(c))
                except ValueError:
                    raise ValueError("%s:%i: expected 'token<TAB>count'" % (path, lineno)) from None
                tokens.append(tok.decode("utf-8", "surrogateescape"))
        vocab = cls(tokens, np.array(counts, dtype=np.int64), min_count=min(counts) if counts else 1)
        if declared is not None and declared != vocab.total_count:
            raise ValueError("%s: header total %i != sum of counts %i" % (path, declared, vocab.total_count))
        return vocab


def count_tokens(stream: Iterable[Sequence[str]]) -> Counter:
    counts: Counter = Counter()
    for sentence in stream:
        counts.update(sentence)
    return counts


def build_vocab(stream: Iterable[Sequence[str]], min_count: int = 1) -> Vocab:
    """Count every token and keep those seen at least `min_count` times."""
    return Vocab.from_counts(count_tokens(stream), min_count=min_count)


# ---------------------------------------------------------------------------
# frequent-word subsampling
# ---------------------------------------------------------------------------

def discard_prob(f_w: float, t: float) -> float:
    """Probability of discarding one occurrence of a word of frequency `f_w`.

    Computes ``1 - sqrt(t / f_w)``, clamped at zero for words rarer than `t`.

    Raises
    ------
    ValueError
        If `f_w` is not in (0, 1] or `t` is not positive.

    """
    if not 0.0 < f_w <= 1.0:
        raise ValueError("frequency must be in (0, 1], got %r" % f_w)
    if not t > 0.0:
        raise ValueError("threshold must be > 0, got %r" % t)
    return max(0.0, 1.0 - math.sqrt(t / f_w))


def subsample(
    stream: Iterable[Sequence[str]],
    vocab: Vocab,
    t: float,
    rng: np.random.Generator,
) -> Iterator[Sentence]:
    """Drop each token occurrence independently with its discard probability.

    Out-of-vocabulary tokens are always dropped. Sentences that become empty
    are still yielded, so sentence alignment with the input is preserved.
    """
    keep = 1.0 - vocab.discard_probs(t)
    index = vocab.index
    for sentence in stream:
        ids = [index[w] for w in sentence if w in index]
        if not ids:
            yield []
            continue
        draws = rng.random(len(ids))
        yield [vocab.tokens[i] for i, u in zip(ids, draws) if u < keep[i]]


# ---------------------------------------------------------------------------
# unigram language model filter
# ---------------------------------------------------------------------------

@dataclass
class UnigramLM:
    """Add-one smoothed unigram model with a fixed log-prob for unseen tokens."""

    log_probs: dict[str, float]
    oov_logprob: float

    def logprob(self, token: str) -> float:
        return self.log_probs.get(token, self.oov_logprob)

    def score(self, document: Iterable[Sequence[str]] | Sequence[str]) -> float:
        """Mean per-token log probability; ``-inf`` for an empty document."""
        tokens = _flatten(document)
        if not tokens:
            return -math.inf
        return sum(self.logprob(w) for w in tokens) / len(tokens)


def _flatten(document) -> list[str]:
    items = list(document)
    if items and not isinstance(items[0], str):
        return [w for sentence in items for w in sentence]
    return items


def lm_train(stream: Iterable[Sequence[str]], vocab: Vocab) -> UnigramLM:
    """Fit add-one smoothed unigram probabilities over `vocab`.

    Every vocabulary word gets ``(count + 1) / (T + |V|)``, where ``T`` is
    the number of in-vocabulary tokens of `stream`. A token outside the
    vocabulary scores ``1 / (T + |V| + 1)``, a little below any word seen
    zero times. The scores are a filtering heuristic and, with the OOV
    term, do not sum to one.

    Raises
    ------
    ValueError
        If `stream` holds no tokens.

    """
    counts: Counter = Counter()
    n_tokens = 0
    for sentence in stream:
        n_tokens += len(sentence)
        counts.update(w for w in sentence if w in vocab.index)
    if n_tokens == 0:
        raise ValueError("cannot train a language model on an empty stream")
    total = sum(counts.values())
    log_denom = math.log(total + len(vocab))
    log_probs = {w: math.log(counts[w] + 1) - log_denom for w in vocab.tokens}
    return UnigramLM(log_probs, -math.log(total + len(vocab) + 1))


def lm_filter(document, lm: UnigramLM, threshold: float) -> tuple[bool, float]:
    """Return ``(keep, score)`` where ``keep`` iff the mean log-prob is >= `threshold`."""
    score = lm.score(document)
    if score == -math.inf:
        return False, score
    return score >= threshold, score
