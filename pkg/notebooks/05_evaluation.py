# %% [markdown]
# # Analogies and similarity
#
# 3CosAdd answers `a : b :: c : ?` with the word whose unit vector is most
# cosine-similar to `b - a + c`, leaving out the three question words.
# Similarity benchmarks compare model cosines to human scores by Spearman
# rank correlation.

# %%
import numpy as np

from cbowkit.eval import (AnalogyItem, SimilarityPair, WordVectors, analogy_accuracy,
                          similarity_spearman)

# %% [markdown]
# Hand-built vectors: one axis for royalty, one for gender, one for
# plurality, plus a little noise.

# %%
rng = np.random.default_rng(0)
base = {
    "man": [0, 1, 0], "woman": [0, -1, 0], "king": [1, 1, 0], "queen": [1, -1, 0],
    "kings": [1, 1, 1], "queens": [1, -1, 1], "men": [0, 1, 1], "women": [0, -1, 1],
}
tokens = list(base)
vecs = np.array([base[t] for t in tokens], dtype=float) + rng.normal(0, 0.05, (len(tokens), 3))
wv = WordVectors(tokens, vecs)

items = [
    AnalogyItem("man", "king", "woman", "queen", "family"),
    AnalogyItem("king", "kings", "queen", "queens", "gram8-plural"),
    AnalogyItem("man", "men", "woman", "women", "gram8-plural"),
    AnalogyItem("man", "king", "prince", "princess", "family"),   # OOV, skipped
]
print(analogy_accuracy(items, wv).report())

# %%
gold = [SimilarityPair("king", "queen", 7.0), SimilarityPair("king", "kings", 8.0),
        SimilarityPair("man", "queens", 1.0), SimilarityPair("woman", "queen", 6.0),
        SimilarityPair("men", "king", 3.0)]
print(similarity_spearman(gold, wv).report())
