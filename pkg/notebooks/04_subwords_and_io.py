# %% [markdown]
# # Subwords, unseen words, and saving models
#
# With subwords on, a word's input vector is its own row plus the mean of
# the rows of its hashed character n-grams. A word never seen in training
# still gets a vector from its n-grams alone.

# %%
import tempfile
from pathlib import Path

import numpy as np

from cbowkit import ModelConfig, TrainConfig, build_vocab, train
from cbowkit.eval import WordVectors, nearest_neighbors
from cbowkit.model import char_ngrams
from cbowkit.vecio import export_text, load_model, load_text, save_model

print(char_ngrams("where", 3, 4))

# %%
rng = np.random.default_rng(0)
# each stem gets its own objects, so inflections of one stem share contexts
objects = {
    "walk": ["home", "slowly"], "talk": ["loudly", "often"], "jump": ["high", "over"],
    "play": ["games", "outside"], "climb": ["trees", "walls"], "paint": ["walls", "canvas"],
}
stems = list(objects)
suffixes = ["", "s", "ed", "ing"]
corpus = []
for stem in rng.choice(stems, size=30000):
    corpus.append([str(rng.choice(["i", "you", "they"])), stem + str(rng.choice(suffixes)),
                   str(rng.choice(objects[stem]))])
vocab = build_vocab(corpus)
cfg = ModelConfig(dim=24, window=2, use_subwords=True, minn=3, maxn=5, buckets=50_000)
model, report = train(corpus, vocab, TrainConfig(epochs=5, t=1e-3), cfg)
print("\n".join(report.lines()))

# %% [markdown]
# "paints" and "painted" are in the vocabulary; "painter" is not, but it
# shares n-grams with the "paint" family. `in model` asks whether a vector
# can be built, `in model.vocab` whether the word was seen.

# %%
wv = WordVectors.from_model(model)
print("painter" in model.vocab, "painter" in model)
for tok, sim in nearest_neighbors("painter", 5, wv):
    print("%-10s %.3f" % (tok, sim))

# %% [markdown]
# The binary format keeps everything needed to rebuild the model, so the
# unseen-word vector is identical after a round trip. The text format only
# stores the composed vector of each vocabulary word.

# %%
with tempfile.TemporaryDirectory() as tmp:
    save_model(model, Path(tmp) / "model.bin")
    back = load_model(Path(tmp) / "model.bin")
    print("same OOV vector:", np.array_equal(back.word_vector("painter"), model.word_vector("painter")))
    export_text(model, Path(tmp) / "vectors.txt")
    print(open(Path(tmp) / "vectors.txt").readline().strip(), len(load_text(Path(tmp) / "vectors.txt")))
