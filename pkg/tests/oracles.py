"""Naive reference implementations the library is checked against.

Everything here is written for clarity, not speed, and shares no code with
the package beyond plain data types.
"""

from __future__ import annotations

import math

import numpy as np


def naive_dedup(sentences):
    out = []
    for s in sentences:
        if not any(list(s) == list(o) for o in out):
            out.append(list(s))
    return out


def naive_vocab(sentences, min_count):
    tokens = []
    for s in sentences:
        for w in s:
            if w not in tokens:
                tokens.append(w)
    counts = {w: sum(s.count(w) for s in sentences) for w in tokens}
    kept = [w for w in tokens if counts[w] >= min_count]
    # selection sort on (count desc, token asc)
    order = []
    while kept:
        best = kept[0]
        for w in kept[1:]:
            if counts[w] > counts[best] or (counts[w] == counts[best] and w < best):
                best = w
        order.append(best)
        kept.remove(best)
    return order, [counts[w] for w in order]


def naive_bigram_scores(sentences, delta):
    n = sum(len(s) for s in sentences)
    words = sorted({w for s in sentences for w in s})
    uni = {w: sum(s.count(w) for s in sentences) for w in words}
    scores = {}
    for a in words:
        for b in words:
            c_ab = sum(1 for s in sentences for i in range(len(s) - 1) if s[i] == a and s[i + 1] == b)
            if c_ab:
                scores[(a, b)] = (c_ab - delta) * n / (uni[a] * uni[b])
    return scores


def naive_merge(sentences, delta, threshold, joiner="_"):
    scores = naive_bigram_scores(sentences, delta)
    out = []
    for s in sentences:
        res = []
        i = 0
        while i < len(s):
            if i + 1 < len(s) and scores.get((s[i], s[i + 1]), -math.inf) > threshold:
                res.append(s[i] + joiner + s[i + 1])
                i += 2
            else:
                res.append(s[i])
                i += 1
        out.append(res)
    return out


def fnv1a_reference(data: bytes) -> int:
    # FNV-1a 32-bit via explicit modular arithmetic
    h = 0x811C9DC5
    for byte in data:
        h = ((h ^ byte) * 0x01000193) % (1 << 32)
    return h


def brute_force_analogy(a, b, c, tokens, vectors, exclude=True):
    def unit(v):
        n = math.sqrt(sum(x * x for x in v))
        return [x / n for x in v] if n else list(v)

    idx = {w: i for i, w in enumerate(tokens)}
    ua, ub, uc = unit(vectors[idx[a]]), unit(vectors[idx[b]]), unit(vectors[idx[c]])
    target = [y - x + z for x, y, z in zip(ua, ub, uc)]
    best, best_sim = None, -math.inf
    for w, v in zip(tokens, vectors):
        if exclude and w in (a, b, c):
            continue
        uv = unit(v)
        tn = math.sqrt(sum(x * x for x in target)) or 1.0
        sim = sum(x * y for x, y in zip(uv, target)) / tn
        if sim > best_sim:
            best, best_sim = w, sim
    return best


def average_ranks(xs):
    ranks = []
    for x in xs:
        below = sum(1 for y in xs if y < x)
        equal = sum(1 for y in xs if y == x)
        ranks.append(below + (equal + 1) / 2.0)
    return ranks


def brute_force_spearman(xs, ys):
    rx, ry = average_ranks(list(xs)), average_ranks(list(ys))
    n = len(rx)
    mx, my = sum(rx) / n, sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / math.sqrt(vx * vy)


# ---------------------------------------------------------------------------
# cbow loss written from scratch, for finite differences
# ---------------------------------------------------------------------------

def reference_loss(inp, out, pos, context, target, negatives, window, ngram_rows=None, weighted=False):
    """cbow negative-sampling loss of one example.

    context : list of (relative position, word id)
    ngram_rows : dict word id -> list of input rows of its n-grams, or None
    """
    def word_input(w):
        v = inp[w].copy()
        if ngram_rows is not None and len(ngram_rows.get(w, [])):
            v = v + sum(inp[r] for r in ngram_rows[w]) / len(ngram_rows[w])
        return v

    if weighted:
        h = np.zeros(inp.shape[1])
        for p, w in context:
            row = p + window if p < 0 else p + window - 1
            h = h + pos[row] * word_input(w)
    else:
        h = sum(word_input(w) for _, w in context) / len(context)

    def sp(x):
        return math.log1p(math.exp(-abs(x))) + max(x, 0.0)

    loss = sp(-float(h @ out[target]))
    for n in negatives:
        loss += sp(float(h @ out[n]))
    return loss
