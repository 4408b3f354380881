# %% [markdown]
# # Phrases from repeated bigram merging
#
# Each pass scores every adjacent pair with `(c_ab - delta) * N / (c_a c_b)`
# and joins pairs above the threshold. Running passes in sequence builds
# longer phrases out of shorter ones.

# %%
import numpy as np

from cbowkit.phrases import PhraseConfig, build_phrases, count_stats, bigram_score

# %%
rng = np.random.default_rng(0)
filler = ["we", "saw", "a", "big", "old", "in", "the", "city", "day", "life", "york", "new"]
corpus = []
for _ in range(3000):
    s = [str(w) for w in rng.choice(filler, size=6)]
    if rng.random() < 0.3:
        i = int(rng.integers(0, 4))
        s[i:i + 3] = ["new", "york", "city"]
    corpus.append(s)

stats = count_stats(corpus)
for pair in [("new", "york"), ("york", "city"), ("the", "city")]:
    c = stats.bigram_counts.get(pair, 0)
    print(pair, c, "%.2f" % bigram_score(c, stats.unigram_counts[pair[0]], stats.unigram_counts[pair[1]],
                                           5, stats.total_tokens))

# %% [markdown]
# With `keep_prob=1` merging is deterministic. The first pass joins
# "new york"; the second joins the new token with "city".

# %%
cfg = PhraseConfig(delta=5, threshold=[3.0, 3.0], iterations=2, keep_prob=1.0)
out, reports = build_phrases(corpus, cfg, np.random.default_rng(1))
for rep in reports:
    print("pass", rep.iteration, sorted(rep.merges))

# %% [markdown]
# The default `keep_prob=0.5` leaves about half of the qualifying pairs
# unmerged, so the vocabulary keeps both "new" and "new_york".

# %%
cfg = PhraseConfig(delta=5, threshold=3.0, iterations=1, keep_prob=0.5)
out, reports = build_phrases(corpus, cfg, np.random.default_rng(1))
merged = reports[0].merges[("new", "york")][1]
print("merged %d of %d" % (merged, stats.bigram_counts[("new", "york")]))
