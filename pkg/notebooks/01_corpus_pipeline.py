# %% [markdown]
# # Cleaning a corpus before training
#
# Three passes run before any vector is trained: drop repeated lines,
# drop lines a reference language model finds unlikely, and count what is
# left. Subsampling then thins out the very frequent words.

# %%
import numpy as np

from cbowkit import corpus

# %%
lines = [
    "the cat sat on the mat",
    "the dog sat on the rug",
    "the cat sat on the mat",          # exact repeat
    "the  cat sat on the mat",         # same tokens, different spacing
    "zxq vvv kkk qqq",                 # boilerplate-looking junk
    "a cat and a dog",
]
sentences = [corpus.tokenize(line) for line in lines]

# %% [markdown]
# Deduplication compares token sequences, so whitespace differences do not
# stop a repeat from being caught.

# %%
dedup = corpus.SentenceDeduplicator()
kept = list(dedup.filter(sentences))
print("kept %d dropped %d" % (dedup.kept, dedup.dropped))

# %% [markdown]
# The filter scores each line by mean unigram log-probability under a model
# fit on text we trust, with add-one smoothing for unseen words.

# %%
reference = [s.split() for s in ["the cat sat", "the dog sat", "a cat", "a dog", "on the mat"] * 10]
lm = corpus.lm_train(reference, corpus.build_vocab(reference))
for s in kept:
    keep, score = corpus.lm_filter(s, lm, threshold=-4.0)
    print("%-5s %7.3f  %s" % (keep, score, " ".join(s)))

# %%
clean = [s for s in kept if corpus.lm_filter(s, lm, -4.0)[0]]
vocab = corpus.build_vocab(clean)
print([(tok, int(c)) for tok, c in zip(vocab.tokens, vocab.counts)])

# %% [markdown]
# Subsampling drops an occurrence of `w` with probability
# `max(0, 1 - sqrt(t / f(w)))`. With a large `t` only "the" is touched on
# this tiny corpus.

# %%
t = 0.05
for tok, p in zip(vocab.tokens, vocab.discard_probs(t)):
    if p > 0:
        print("%s discard %.3f" % (tok, p))

rng = np.random.default_rng(0)
big = clean * 2000
n_the = sum(s.count("the") for s in big)
after = sum(s.count("the") for s in corpus.subsample(big, vocab, t, rng))
print("empirical discard of 'the': %.3f" % (1 - after / n_the))
