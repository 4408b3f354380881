"""Iterative merging of high-scoring bigrams into phrase tokens.

Each pass counts unigrams and within-sentence bigrams, then rewrites every
sentence left to right, joining a qualifying pair ``a b`` into ``a_b`` with
probability ``keep_prob``. Merged tokens are ordinary units in the next
pass, so repeated passes grow longer phrases (``new_york`` then
``new_york_city``).

Examples
--------
>>> import numpy as np
>>> corpus = [["new", "york", "city"]] * 20 + [["a", "b"], ["c", "d"]]
>>> cfg = PhraseConfig(delta=0, threshold=[1.0, 1.0], iterations=2, keep_prob=1.0)
>>> out, reports = build_phrases(corpus, cfg, np.random.default_rng(0))
>>> out[0]
['new_york_city']

"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class PhraseStats:
    unigram_counts: Counter
    bigram_counts: Counter
    total_tokens: int


@dataclass
class PhraseConfig:
    """Settings of the phrase builder.

    Parameters
    ----------
    delta : float
        Count discount subtracted from every bigram count before scoring.
    threshold : float or list of float, optional
        Score cutoff, either shared by all passes or given per pass. The
        default starts at 200 and halves each pass.
    iterations : int
        Number of count-and-merge passes.
    keep_prob : float
        Probability that one qualifying occurrence is actually merged.
    joiner : str
        Separator placed between merged tokens.

    """

    delta: float = 5.0
    threshold: float | list[float] | None = None
    iterations: int = 6
    keep_prob: float = 0.5
    joiner: str = "_"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 < self.keep_prob <= 1.0:
            raise ValueError("keep_prob must be in (0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if not self.joiner or any(ch.isspace() for ch in self.joiner):
            raise ValueError("joiner must be non-empty and contain no whitespace")
        if isinstance(self.threshold, (list, tuple)) and len(self.threshold) < self.iterations:
            raise ValueError("need one threshold per pass: got %i for %i passes"
                             % (len(self.threshold), self.iterations))

    def thresholds(self) -> list[float]:
        if self.threshold is None:
            return [200.0 / 2 ** i for i in range(self.iterations)]
        if isinstance(self.threshold, (list, tuple)):
            return [float(x) for x in self.threshold[:self.iterations]]
        return [float(self.threshold)] * self.iterations


@dataclass
class PassReport:
    """Bigrams merged in one pass: ``(a, b) -> (score, merge count)``."""

    iteration: int
    threshold: float
    merges: dict[tuple[str, str], tuple[float, int]] = field(default_factory=dict)

    @property
    def n_merges(self) -> int:
        return sum(n for _, n in self.merges.values())


def count_stats(stream: Iterable[Sequence[str]]) -> PhraseStats:
    """Exact unigram and adjacent-bigram counts; bigrams never cross sentences."""
    uni: Counter = Counter()
    bi: Counter = Counter()
    total = 0
    for sentence in stream:
        uni.update(sentence)
        total += len(sentence)
        bi.update(zip(sentence, sentence[1:]))
    return PhraseStats(uni, bi, total)


def bigram_score(c_ab: float, c_a: float, c_b: float, delta: float, n: float) -> float:
    """Discounted pointwise association ``(c_ab - delta) * n / (c_a * c_b)``.

    Equals 1 for a pair occurring exactly as often as independence predicts
    (with no discount), and is negative when ``c_ab < delta``.
    """
    if c_a <= 0 or c_b <= 0:
        raise ValueError("unigram counts must be positive, got c_a=%r c_b=%r" % (c_a, c_b))
    return (c_ab - delta) * n / (c_a * c_b)


def _qualifying(stats: PhraseStats, delta: float, threshold: float,
                exempt: set[str]) -> dict[tuple[str, str], float]:
    if math.isinf(threshold) and threshold > 0:
        return {}
    uni, n = stats.unigram_counts, stats.total_tokens
    out = {}
    for (a, b), c_ab in stats.bigram_counts.items():
        if a in exempt or b in exempt:
            continue
        s = bigram_score(c_ab, uni[a], uni[b], delta, n)
        if s > threshold:
            out[(a, b)] = s
    return out


def merge_pass(stream: Iterable[Sequence[str]], stats: PhraseStats, config: PhraseConfig,
               rng: np.random.Generator, threshold: float | None = None,
               exempt: set[str] | None = None, report: PassReport | None = None) -> list[list[str]]:
    """Rewrite every sentence once, merging qualifying pairs greedily left to right.

    A merge consumes both tokens, so overlapping pairs are never both
    merged. Tokens in `exempt` are never merged.
    """
    if threshold is None:
        threshold = config.thresholds()[0]
    chosen = _qualifying(stats, config.delta, threshold, exempt or set())
    joiner, keep_prob = config.joiner, config.keep_prob
    out = []
    for sentence in stream:
        merged_sentence = []
        i, n = 0, len(sentence)
        while i < n:
            if i + 1 < n:
                pair = (sentence[i], sentence[i + 1])
                s = chosen.get(pair)
                if s is not None and (keep_prob >= 1.0 or rng.random() < keep_prob):
                    merged_sentence.append(pair[0] + joiner + pair[1])
                    if report is not None:
                        _, c = report.merges.get(pair, (s, 0))
                        report.merges[pair] = (s, c + 1)
                    i += 2
                    continue
            merged_sentence.append(sentence[i])
            i += 1
        out.append(merged_sentence)
    return out


def build_phrases(stream: Iterable[Sequence[str]], config: PhraseConfig,
                  rng: np.random.Generator) -> tuple[list[list[str]], list[PassReport]]:
    """Run ``config.iterations`` count-and-merge passes.

    Input tokens that already contain the joiner can't be told apart from
    merged ones after re-splitting, so they are exempt from merging.

    Returns
    -------
    (list of list of str, list of PassReport)
        The rewritten corpus and one report per pass.

    """
    sentences = [list(s) for s in stream]
    exempt = {w for s in sentences for w in s if config.joiner in w}
    if exempt:
        logger.warning("%i input token types contain the joiner %r and will not be merged",
                       len(exempt), config.joiner)
    reports = []
    for it, thr in enumerate(config.thresholds()):
        stats = count_stats(sentences)
        report = PassReport(it + 1, thr)
        sentences = merge_pass(sentences, stats, config, rng, threshold=thr, exempt=exempt, report=report)
        logger.info("phrase pass %i: threshold %g, %i merges over %i bigram types",
                    it + 1, thr, report.n_merges, len(report.merges))
        reports.append(report)
    return sentences, reports


def write_report(reports: Sequence[PassReport], path: str | Path) -> None:
    """One ``a<TAB>b<TAB>score<TAB>merge_count`` line per merged bigram, under a ``# pass`` header."""
    with open(path, "w", encoding="utf-8", errors="surrogateescape") as fout:
        for rep in reports:
            fout.write("# pass %d threshold %g\n" % (rep.iteration, rep.threshold))
            for (a, b), (s, c) in sorted(rep.merges.items(), key=lambda kv: (-kv[1][1], kv[0])):
                fout.write("%s\t%s\t%.6g\t%d\n" % (a, b, s, c))
