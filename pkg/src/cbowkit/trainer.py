"""Negative-sampling SGD for the cbow objective.

The hot loop is compiled with numba and releases the GIL, so ``threads > 1``
runs workers on disjoint shards of the corpus that read and write the shared
matrices without locks. Each worker owns one slot of a progress array, and
the learning rate is driven by the (racy) sum of all slots.
"""

from __future__ import annotations

import logging
import math
import threading
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

from cbowkit.corpus import Vocab
from cbowkit.model import EmbeddingSet, Model, ModelConfig, SubwordIndex, position_row

logger = logging.getLogger(__name__)

LR_FLOOR = 1e-4


@dataclass
class TrainConfig:
    lr0: float = 0.05
    epochs: int = 5
    t: float = 1e-5
    negatives: int = 10
    neg_power: float = 0.75
    threads: int = 1
    seed: int = 1
    dynamic_window: bool = True
    max_sentence_length: int = 1000
    dtype: str = "float32"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.lr0 > 0:
            raise ValueError("lr0 must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if not 0.0 <= self.neg_power <= 1.0:
            raise ValueError("neg_power must be in [0, 1]")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not self.t > 0:
            raise ValueError("subsampling threshold t must be > 0")
        if self.max_sentence_length < 1:
            raise ValueError("max_sentence_length must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class NegativeSampler:
    """Draw vocabulary ids with probability proportional to ``count ** power``.

    Sampling is an inverse-CDF lookup (binary search) on the cumulative
    distribution, so the drawn probabilities are exact up to float64
    rounding.
    """

    def __init__(self, counts: np.ndarray, power: float = 0.75):
        counts = np.asarray(counts, dtype=np.float64)
        if len(counts) == 0:
            raise ValueError("cannot sample from an empty vocabulary")
        weights = counts ** power
        self.probs = weights / weights.sum()
        self.cumulative = np.cumsum(self.probs)
        self.cumulative[-1] = 1.0

    def __len__(self) -> int:
        return len(self.probs)

    def sample(self, k: int, exclude: int | None, rng: np.random.Generator) -> np.ndarray:
        """`k` independent draws; draws equal to `exclude` are redrawn."""
        if exclude is not None and len(self) < 2:
            raise ValueError("vocabulary of size 1 leaves nothing to sample besides the excluded id")
        out = np.empty(k, dtype=np.int32)
        for i in range(k):
            while True:
                j = min(int(np.searchsorted(self.cumulative, rng.random(), side="right")), len(self) - 1)
                if j != exclude:
                    break
            out[i] = j
        return out


def softplus(x):
    return np.logaddexp(0.0, x)


def pair_loss(context_vec: np.ndarray, target: int, negatives: Sequence[int],
              embeddings: EmbeddingSet) -> float:
    """``softplus(-s(target)) + sum(softplus(s(n)))`` over the negatives."""
    out = embeddings.output
    loss = softplus(-float(np.dot(context_vec, out[target])))
    for n in negatives:
        loss += softplus(float(np.dot(context_vec, out[n])))
    return float(loss)


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------

@numba.njit(inline="always")
def _softplus(x):
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@numba.njit(inline="always")
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@numba.njit(nogil=True, cache=True)
def _cbow_update(ctx_words, ctx_slots, n_ctx, target, negs, inp, out, pos,
                 sub_off, sub_rows, use_sub, use_pos, lr, h, gh, gw, grads, cbuf):
    """One SGD step on one center word; returns the loss before the update.

    All gradients are taken at the pre-update parameters: the composed
    context vectors are cached in `cbuf`, output-side gradients are
    accumulated before any output row moves, and input rows are updated
    before position rows.
    """
    d = inp.shape[1]
    n_neg = negs.shape[0]
    for j in range(d):
        h[j] = 0.0
    for k in range(n_ctx):
        w = ctx_words[k]
        for j in range(d):
            cbuf[k, j] = inp[w, j]
        if use_sub:
            lo = sub_off[w]
            hi = sub_off[w + 1]
            if hi > lo:
                inv = 1.0 / (hi - lo)
                for r in range(lo, hi):
                    row = sub_rows[r]
                    for j in range(d):
                        cbuf[k, j] += inv * inp[row, j]
        if use_pos:
            s = ctx_slots[k]
            for j in range(d):
                h[j] += pos[s, j] * cbuf[k, j]
        else:
            for j in range(d):
                h[j] += cbuf[k, j]
    if not use_pos:
        inv = 1.0 / n_ctx
        for j in range(d):
            h[j] *= inv

    loss = 0.0
    for j in range(d):
        gh[j] = 0.0
    for i in range(n_neg + 1):
        w = target if i == 0 else negs[i - 1]
        f = 0.0
        for j in range(d):
            f += h[j] * out[w, j]
        if i == 0:
            loss += _softplus(-f)
            g = _sigmoid(f) - 1.0
        else:
            loss += _softplus(f)
            g = _sigmoid(f)
        grads[i] = g
        for j in range(d):
            gh[j] += g * out[w, j]
    for i in range(n_neg + 1):
        w = target if i == 0 else negs[i - 1]
        step = lr * grads[i]
        for j in range(d):
            out[w, j] -= step * h[j]

    for k in range(n_ctx):
        w = ctx_words[k]
        if use_pos:
            s = ctx_slots[k]
            for j in range(d):
                gw[j] = pos[s, j] * gh[j]
        else:
            inv = 1.0 / n_ctx
            for j in range(d):
                gw[j] = inv * gh[j]
        for j in range(d):
            inp[w, j] -= lr * gw[j]
        if use_sub:
            lo = sub_off[w]
            hi = sub_off[w + 1]
            if hi > lo:
                scale = lr / (hi - lo)
                for r in range(lo, hi):
                    row = sub_rows[r]
                    for j in range(d):
                        inp[row, j] -= scale * gw[j]
    if use_pos:
        for k in range(n_ctx):
            s = ctx_slots[k]
            for j in range(d):
                pos[s, j] -= lr * gh[j] * cbuf[k, j]
    return loss


@numba.njit(nogil=True, cache=True)
def _draw_negative(cum, target):
    n = cum.shape[0]
    while True:
        j = np.searchsorted(cum, np.random.random(), side="right")
        if j >= n:
            j = n - 1
        if j != target:
            return j


@numba.njit(nogil=True, cache=True)
def _subsample_ids(tokens, lo, hi, keep, buf):
    m = 0
    for i in range(lo, hi):
        w = tokens[i]
        kp = keep[w]
        if kp >= 1.0 or np.random.random() < kp:
            buf[m] = w
            m += 1
    return m


@numba.njit(nogil=True, cache=True)
def _subsample_kernel(tokens, keep, seed):
    np.random.seed(seed)
    buf = np.empty(tokens.shape[0], dtype=np.int32)
    m = _subsample_ids(tokens, 0, tokens.shape[0], keep, buf)
    return buf[:m]


@numba.njit(nogil=True, cache=True)
def _train_shard(tokens, sent_off, s_lo, s_hi, keep, cum, inp, out, pos, sub_off, sub_rows,
                 use_sub, use_pos, window, dynamic, negatives, lr0, total_work,
                 progress, worker, seed, result):
    np.random.seed(seed)
    d = inp.shape[1]
    max_len = 1
    for s in range(s_lo, s_hi):
        if sent_off[s + 1] - sent_off[s] > max_len:
            max_len = sent_off[s + 1] - sent_off[s]
    dt = inp.dtype
    sbuf = np.empty(max_len, dtype=np.int32)
    ctx_words = np.empty(2 * window, dtype=np.int32)
    ctx_slots = np.empty(2 * window, dtype=np.int32)
    negs = np.empty(negatives, dtype=np.int32)
    h = np.empty(d, dtype=dt)
    gh = np.empty(d, dtype=dt)
    gw = np.empty(d, dtype=dt)
    grads = np.empty(negatives + 1, dtype=np.float64)
    cbuf = np.empty((2 * window, d), dtype=dt)
    loss_sum = 0.0
    n_steps = 0
    for s in range(s_lo, s_hi):
        lo = sent_off[s]
        hi = sent_off[s + 1]
        done = 0
        for q in range(progress.shape[0]):
            done += progress[q]
        frac = 1.0 - done / total_work
        if frac < 1e-4:
            frac = 1e-4
        lr = lr0 * frac
        m = _subsample_ids(tokens, lo, hi, keep, sbuf)
        progress[worker] += hi - lo
        for t in range(m):
            b = window
            if dynamic and not use_pos:
                b = np.random.randint(1, window + 1)
            n_ctx = 0
            for p in range(-b, b + 1):
                j = t + p
                if p == 0 or j < 0 or j >= m:
                    continue
                ctx_words[n_ctx] = sbuf[j]
                ctx_slots[n_ctx] = p + window if p < 0 else p + window - 1
                n_ctx += 1
            if n_ctx == 0:
                continue
            target = sbuf[t]
            for k in range(negatives):
                negs[k] = _draw_negative(cum, target)
            loss_sum += _cbow_update(ctx_words, ctx_slots, n_ctx, target, negs, inp, out, pos,
                                     sub_off, sub_rows, use_sub, use_pos, lr, h, gh, gw, grads, cbuf)
            n_steps += 1
    result[0] = loss_sum
    result[1] = n_steps


# ---------------------------------------------------------------------------
# python-facing API
# ---------------------------------------------------------------------------

def _kernel_args(embeddings: EmbeddingSet, config: ModelConfig, subwords: SubwordIndex | None):
    pos = embeddings.positions
    if pos is None:
        pos = np.zeros((1, embeddings.input.shape[1]), dtype=embeddings.input.dtype)
    if subwords is None or not config.use_subwords:
        sub_off = np.zeros(embeddings.output.shape[0] + 1, dtype=np.int64)
        sub_rows = np.zeros(0, dtype=np.int32)
    else:
        sub_off, sub_rows = subwords.offsets, subwords.rows
    return pos, sub_off, sub_rows


def cbow_update(context: Sequence[tuple[int, int]], target: int, negatives: Sequence[int],
                embeddings: EmbeddingSet, config: ModelConfig, lr: float,
                subwords: SubwordIndex | None = None) -> float:
    """Apply one SGD step for `target` given ``(relative position, word id)`` context pairs.

    Returns the loss before the update. With ``lr = 1`` in double precision
    the change of every parameter equals minus its gradient.
    """
    if not context:
        raise ValueError("empty context")
    ctx_words = np.array([w for _, w in context], dtype=np.int32)
    ctx_slots = np.array(
        [position_row(p, config.window) if config.use_position_weights else 0 for p, _ in context],
        dtype=np.int32)
    negs = np.asarray(negatives, dtype=np.int32)
    d = config.dim
    dt = embeddings.input.dtype
    pos, sub_off, sub_rows = _kernel_args(embeddings, config, subwords)
    return _cbow_update(ctx_words, ctx_slots, len(context), int(target), negs,
                        embeddings.input, embeddings.output, pos, sub_off, sub_rows,
                        config.use_subwords, config.use_position_weights, float(lr),
                        np.empty(d, dt), np.empty(d, dt), np.empty(d, dt),
                        np.empty(len(negs) + 1), np.empty((len(context), d), dt))


def step(sentence: Sequence[int], t: int, embeddings: EmbeddingSet, sampler: NegativeSampler,
         lr: float, config: ModelConfig, rng: np.random.Generator, negatives: int = 10,
         subwords: SubwordIndex | None = None, window: int | None = None) -> float | None:
    """One training step on position `t` of an id-encoded sentence.

    Returns the pre-update loss, or None (and changes nothing) when the
    center word has no context.
    """
    c = config.window if window is None else window
    context = [(p, int(sentence[t + p])) for p in range(-c, c + 1)
               if p != 0 and 0 <= t + p < len(sentence)]
    if not context:
        return None
    target = int(sentence[t])
    negs = sampler.sample(negatives, target, rng)
    return cbow_update(context, target, negs, embeddings, config, lr, subwords)


@dataclass
class EncodedCorpus:
    """Flat id array plus sentence offsets; sentence ``s`` is ``tokens[offsets[s]:offsets[s+1]]``."""

    tokens: np.ndarray
    offsets: np.ndarray

    def __len__(self) -> int:
        return len(self.offsets) - 1

    @property
    def n_tokens(self) -> int:
        return int(self.offsets[-1])


def encode_corpus(stream: Iterable[Sequence[str]], vocab: Vocab, max_sentence_length: int = 1000) -> EncodedCorpus:
    """Map sentences to ids, dropping OOV tokens and empty sentences.

    Sentences longer than `max_sentence_length` are cut into consecutive
    pieces, which bounds the window buffers and keeps learning-rate updates
    frequent on corpora without line breaks.
    """
    index = vocab.index
    chunks: list[np.ndarray] = []
    lengths: list[int] = []
    for sentence in stream:
        ids = np.fromiter((index[w] for w in sentence if w in index), dtype=np.int32)
        for lo in range(0, len(ids), max_sentence_length):
            piece = ids[lo:lo + max_sentence_length]
            chunks.append(piece)
            lengths.append(len(piece))
    tokens = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int32)
    offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    return EncodedCorpus(tokens, offsets)


def subsample_ids(ids: np.ndarray, keep_probs: np.ndarray, seed: int) -> np.ndarray:
    """Subsample an id array with the same compiled routine the trainer uses."""
    return _subsample_kernel(np.asarray(ids, dtype=np.int32), np.asarray(keep_probs, dtype=np.float64), seed)


@dataclass
class EpochStats:
    epoch: int
    loss: float
    tokens_per_sec: float
    steps: int

    def line(self) -> str:
        return "epoch %d loss %.6f tokens_per_sec %.1f" % (self.epoch, self.loss, self.tokens_per_sec)


@dataclass
class TrainReport:
    epochs: list[EpochStats] = field(default_factory=list)

    @property
    def losses(self) -> list[float]:
        return [e.loss for e in self.epochs]

    def lines(self) -> list[str]:
        return [e.line() for e in self.epochs]


def _shards(corpus: EncodedCorpus, n: int) -> list[tuple[int, int]]:
    """Split sentences into `n` contiguous runs of roughly equal token count."""
    n_sent = len(corpus)
    if n <= 1 or n_sent <= 1:
        return [(0, n_sent)]
    cuts = np.searchsorted(corpus.offsets, np.linspace(0, corpus.n_tokens, n + 1)[1:-1])
    bounds = [0] + [int(c) for c in cuts] + [n_sent]
    return [(bounds[i], bounds[i + 1]) for i in range(n) if bounds[i + 1] > bounds[i]]


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def train(corpus, vocab: Vocab, config: TrainConfig, model_config: ModelConfig,
          embeddings: EmbeddingSet | None = None, callback=None) -> tuple[Model, TrainReport]:
    """Train a cbow model.

    Parameters
    ----------
    corpus : EncodedCorpus or iterable of list of str
        Training sentences; token streams are encoded against `vocab`.
    vocab : Vocab
        Vocabulary with the counts used for subsampling and negatives.
    config : TrainConfig
    model_config : ModelConfig
    embeddings : EmbeddingSet, optional
        Starting parameters; freshly initialized when omitted.
    callback : callable, optional
        Called with each :class:`EpochStats` as epochs finish.

    Returns
    -------
    (Model, TrainReport)

    Notes
    -----
    Only ``threads=1`` is reproducible. With more threads, workers update
    shared rows without synchronization and the result depends on
    scheduling.

    """
    config.validate()
    model_config.validate()
    if not isinstance(corpus, EncodedCorpus):
        corpus = encode_corpus(corpus, vocab, config.max_sentence_length)
    if corpus.n_tokens == 0:
        raise ValueError("cannot train on an empty corpus")
    if len(vocab) < 2:
        raise ValueError("need at least two vocabulary words to draw negatives")

    dtype = np.dtype(config.dtype)
    if embeddings is None:
        embeddings = EmbeddingSet.initialize(len(vocab), model_config, seed=config.seed, dtype=dtype)
    model = Model(vocab, model_config, embeddings, train_config=config)
    pos, sub_off, sub_rows = _kernel_args(embeddings, model_config, model.subwords)
    keep = 1.0 - vocab.discard_probs(config.t)
    sampler = NegativeSampler(vocab.counts, config.neg_power)
    shards = _shards(corpus, config.threads)
    progress = np.zeros(len(shards), dtype=np.int64)
    total_work = float(config.epochs * corpus.n_tokens)
    report = TrainReport()

    for epoch in range(config.epochs):
        results = np.zeros((len(shards), 2))
        start = time.perf_counter()
        args = [
            (corpus.tokens, corpus.offsets, lo, hi, keep, sampler.cumulative,
             embeddings.input, embeddings.output, pos, sub_off, sub_rows,
             model_config.use_subwords, model_config.use_position_weights,
             model_config.window, config.dynamic_window, config.negatives,
             config.lr0, total_work, progress, w, _derive_seed(config.seed, epoch, w), results[w])
            for w, (lo, hi) in enumerate(shards)
        ]
        if len(args) == 1:
            _train_shard(*args[0])
        else:
            workers = [threading.Thread(target=_train_shard, args=a) for a in args]
            for th in workers:
                th.start()
            for th in workers:
                th.join()
        elapsed = max(time.perf_counter() - start, 1e-9)
        steps = int(results[:, 1].sum())
        stats = EpochStats(epoch + 1, results[:, 0].sum() / max(steps, 1), corpus.n_tokens / elapsed, steps)
        report.epochs.append(stats)
        logger.info(stats.line())
        if callback is not None:
            callback(stats)
    return model, report


def evaluate_loss(corpus: EncodedCorpus, model: Model, negatives: int = 10, seed: int = 0,
                  neg_power: float = 0.75) -> float:
    """Mean cbow loss over every center word of `corpus`, without training.

    Uses the full fixed window, no subsampling, and negatives from a fixed
    seed, so two models scored on the same corpus see the same draws.
    """
    emb = model.embeddings.copy()
    pos, sub_off, sub_rows = _kernel_args(emb, model.config, model.subwords)
    keep = np.ones(len(model.vocab))
    sampler = NegativeSampler(model.vocab.counts, neg_power)
    result = np.zeros(2)
    _train_shard(corpus.tokens, corpus.offsets, 0, len(corpus), keep, sampler.cumulative,
                 emb.input, emb.output, pos, sub_off, sub_rows,
                 model.config.use_subwords, model.config.use_position_weights,
                 model.config.window, False, negatives, 0.0, 1.0,
                 np.zeros(1, dtype=np.int64), 0, seed, result)
    return result[0] / max(result[1], 1)
