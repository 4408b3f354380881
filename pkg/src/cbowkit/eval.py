"""Analogy accuracy, word-similarity correlation and nearest neighbours.

Analogies are answered with 3CosAdd: the prediction for ``a : b :: c : ?``
is the word whose unit vector has the highest cosine with
``x_b - x_a + x_c`` (unit vectors), the three question words excluded.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalogyItem:
    a: str
    b: str
    c: str
    d: str
    section: str = ""

    @property
    def kind(self) -> str:
        return section_kind(self.section)


@dataclass(frozen=True)
class SimilarityPair:
    w1: str
    w2: str
    gold: float


def section_kind(section: str) -> str:
    """``syntactic`` for the ``gram*`` sections of the analogy file, else ``semantic``."""
    return "syntactic" if section.strip().lower().startswith("gram") else "semantic"


def read_analogies(path: str | Path, lowercase: bool = False) -> list[AnalogyItem]:
    """Parse ``: section`` headers followed by four space-separated tokens per line."""
    items = []
    section = ""
    with open(path, encoding="utf-8", errors="surrogateescape") as fin:
        for lineno, line in enumerate(fin, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(":"):
                section = line[1:].strip()
                continue
            if lowercase:
                line = line.lower()
            parts = line.split()
            if len(parts) != 4:
                raise ValueError("%s:%i: expected 4 tokens, got %i" % (path, lineno, len(parts)))
            items.append(AnalogyItem(*parts, section=section))
    return items


def read_similarity(path: str | Path, lowercase: bool = False) -> list[SimilarityPair]:
    """Parse ``w1 w2 score`` lines.

    Fields are tab separated, or whitespace separated when a line has no
    tab. Columns past the third (per-rater scores in Rare Words) are
    ignored. Lines starting with ``#`` are skipped, and so is a first line
    whose score column is not a number (a header).
    """
    pairs = []
    with open(path, encoding="utf-8", errors="surrogateescape") as fin:
        for lineno, line in enumerate(fin, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) < 3:
                raise ValueError("%s:%i: expected 'w1 w2 score'" % (path, lineno))
            w1, w2 = parts[0].strip(), parts[1].strip()
            if lowercase:
                w1, w2 = w1.lower(), w2.lower()
            try:
                gold = float(parts[2])
            except ValueError:
                if lineno == 1:
                    continue
                raise ValueError("%s:%i: score %r is not a number" % (path, lineno, parts[2])) from None
            if not math.isfinite(gold):
                raise ValueError("%s:%i: non-finite gold score" % (path, lineno))
            pairs.append(SimilarityPair(w1, w2, gold))
    return pairs


class WordVectors:
    """An immutable token-to-vector table used by the evaluators.

    Parameters
    ----------
    tokens : list of str
    vectors : ndarray, shape (len(tokens), dim)
    oov : callable, optional
        Maps an out-of-vocabulary token to a vector, or raises KeyError.
        Models trained with subwords supply n-gram composition here.

    """

    def __init__(self, tokens: Sequence[str], vectors: np.ndarray,
                 oov: Callable[[str], np.ndarray] | None = None):
        self.tokens = list(tokens)
        self.vectors = np.asarray(vectors)
        if len(self.tokens) != self.vectors.shape[0]:
            raise ValueError("token count and vector rows differ")
        self.index = {w: i for i, w in enumerate(self.tokens)}
        self.oov = oov
        norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        self.unit = (self.vectors / norms).astype(np.float64)

    @classmethod
    def from_model(cls, model) -> "WordVectors":
        oov = model.word_vector if model.config.use_subwords else None
        return cls(model.vocab.tokens, model.composed_vectors(), oov=oov)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def resolve(self, word: str) -> np.ndarray | None:
        """Vector for `word`, composing it via `oov` if needed; None if unresolvable."""
        i = self.index.get(word)
        if i is not None:
            return self.vectors[i]
        if self.oov is None:
            return None
        try:
            return np.asarray(self.oov(word))
        except KeyError:
            return None


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def analogy_target(a: str, b: str, c: str, vectors: WordVectors) -> np.ndarray:
    u = vectors.unit
    return u[vectors.index[b]] - u[vectors.index[a]] + u[vectors.index[c]]


def analogy_predict(a: str, b: str, c: str, vectors: WordVectors, exclude_inputs: bool = True,
                    restrict: int | None = None) -> str | None:
    """Answer ``a : b :: c : ?``; None if a question word is out of vocabulary.

    Ties go to the lower vocabulary id. `restrict` limits candidates to the
    first (most frequent) ids.
    """
    if a not in vectors or b not in vectors or c not in vectors:
        return None
    sims = _candidate_sims(analogy_target(a, b, c, vectors)[None, :], vectors, restrict)[0]
    if exclude_inputs:
        for w in (a, b, c):
            i = vectors.index[w]
            if i < sims.shape[0]:
                sims[i] = -np.inf
    return vectors.tokens[int(np.argmax(sims))]


def _candidate_sims(targets: np.ndarray, vectors: WordVectors, restrict: int | None) -> np.ndarray:
    unit = vectors.unit if restrict is None else vectors.unit[:restrict]
    norms = np.linalg.norm(targets, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return (targets / norms) @ unit.T


@dataclass
class AnalogyResult:
    semantic: float
    syntactic: float
    total: float
    oov: int
    answered: int
    correct: int
    sections: dict[str, tuple[int, int]]

    def report(self) -> str:
        lines = []
        for name, (correct, n) in self.sections.items():
            acc = correct / n if n else 0.0
            lines.append("%s: %.4f (%d/%d)" % (name, acc, correct, n))
        lines.append("semantic: %.4f" % self.semantic)
        lines.append("syntactic: %.4f" % self.syntactic)
        lines.append("total: %.4f (%d/%d)" % (self.total, self.correct, self.answered))
        lines.append("oov: %d" % self.oov)
        return "\n".join(lines)


def analogy_accuracy(items: Iterable[AnalogyItem], vectors: WordVectors, restrict: int | None = None,
                     batch_size: int = 1024) -> AnalogyResult:
    """Per-kind and total accuracy over the in-vocabulary questions.

    Questions with an out-of-vocabulary word (including an answer outside
    the candidate set) are counted in ``oov`` and left out of every
    denominator. Accuracies with an empty denominator are reported as 0.
    """
    idx = vectors.index
    limit = len(vectors) if restrict is None else min(restrict, len(vectors))
    ok_items, oov = [], 0
    for it in items:
        ids = [idx.get(w) for w in (it.a, it.b, it.c, it.d)]
        if any(i is None or i >= limit for i in ids):
            oov += 1
        else:
            ok_items.append((it, ids))

    sections: dict[str, list[int]] = {}
    by_kind = {"semantic": [0, 0], "syntactic": [0, 0]}
    correct_total = 0
    for lo in range(0, len(ok_items), batch_size):
        batch = ok_items[lo:lo + batch_size]
        ids = np.array([ids for _, ids in batch])
        u = vectors.unit
        targets = u[ids[:, 1]] - u[ids[:, 0]] + u[ids[:, 2]]
        sims = _candidate_sims(targets, vectors, limit)
        rows = np.arange(len(batch))
        for col in range(3):
            sims[rows, ids[:, col]] = -np.inf
        pred = np.argmax(sims, axis=1)
        for (it, _), p, gold in zip(batch, pred, ids[:, 3]):
            hit = int(p == gold)
            sec = sections.setdefault(it.section, [0, 0])
            sec[0] += hit
            sec[1] += 1
            by_kind[it.kind][0] += hit
            by_kind[it.kind][1] += 1
            correct_total += hit

    def acc(c, n):
        return c / n if n else 0.0

    return AnalogyResult(
        semantic=acc(*by_kind["semantic"]),
        syntactic=acc(*by_kind["syntactic"]),
        total=acc(correct_total, len(ok_items)),
        oov=oov,
        answered=len(ok_items),
        correct=correct_total,
        sections={k: (v[0], v[1]) for k, v in sections.items()},
    )


def cosine(x: np.ndarray, y: np.ndarray) -> float:
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        return 0.0
    return float(np.dot(x, y) / (nx * ny))


@dataclass
class SimilarityResult:
    spearman: float
    scored: int
    skipped: int

    def report(self) -> str:
        return "spearman: %.4f\nscored: %d\nskipped: %d" % (self.spearman, self.scored, self.skipped)


def similarity_scores(pairs: Iterable[SimilarityPair], vectors: WordVectors):
    """Model cosines and gold scores of the resolvable pairs, plus the skip count."""
    model, gold, skipped = [], [], 0
    for pair in pairs:
        x, y = vectors.resolve(pair.w1), vectors.resolve(pair.w2)
        if x is None or y is None:
            skipped += 1
            continue
        model.append(cosine(x, y))
        gold.append(pair.gold)
    return np.array(model), np.array(gold), skipped


def similarity_spearman(pairs: Iterable[SimilarityPair], vectors: WordVectors) -> SimilarityResult:
    """Spearman correlation (average ranks for ties) of cosines against gold scores.

    Raises
    ------
    ValueError
        If fewer than two pairs can be scored.

    """
    model, gold, skipped = similarity_scores(pairs, vectors)
    if len(model) < 2:
        raise ValueError("need at least 2 scorable pairs, got %i" % len(model))
    rho = stats.spearmanr(model, gold).statistic
    return SimilarityResult(float(rho), len(model), skipped)


def nearest_neighbors(query: str, k: int, vectors: WordVectors) -> list[tuple[str, float]]:
    """Top-`k` tokens by cosine to `query`, excluding the query itself.

    Sorted by descending cosine, ties by token string.

    Raises
    ------
    KeyError
        If `query` can't be resolved to a vector.

    """
    if k <= 0:
        return []
    v = vectors.resolve(query)
    if v is None:
        raise KeyError("cannot resolve %r to a vector" % query)
    sims = vectors.unit @ _unit(np.asarray(v, dtype=np.float64))
    cands = [(vectors.tokens[i], float(sims[i])) for i in range(len(vectors)) if vectors.tokens[i] != query]
    cands.sort(key=lambda ts: (-ts[1], ts[0]))
    return cands[:k]
