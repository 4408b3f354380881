# %% [markdown]
# # Position-dependent weights
#
# Plain cbow averages its context and forgets where each word sat. With
# position weights the context is `sum_p d_p * u_{w_p}`, so the model can
# learn that some offsets matter more than others.
#
# The toy task: sentences `x y x y ...` where every `y` is a fixed function
# of the `x` immediately to its left. Only offset -1 carries the signal.

# %%
import numpy as np

from cbowkit import ModelConfig, TrainConfig, build_vocab, train
from cbowkit.model import position_row
from cbowkit.trainer import encode_corpus, evaluate_loss


def left_determined(n_sentences, seed, n_keys=120, n_values=12, pairs=8):
    rng = np.random.default_rng(seed)
    f = np.random.default_rng(7).permutation(n_keys) % n_values
    out = []
    for _ in range(n_sentences):
        s = []
        for i in rng.integers(0, n_keys, size=pairs):
            s += ["x%03d" % i, "y%03d" % f[i]]
        out.append(s)
    return out


train_sents, held = left_determined(3000, 0), left_determined(500, 1)
vocab = build_vocab(train_sents)
enc, enc_held = encode_corpus(train_sents, vocab), encode_corpus(held, vocab)

# %%
window = 2
tcfg = TrainConfig(epochs=5, t=1.0, dynamic_window=False, seed=0)
models = {}
for weighted in (False, True):
    models[weighted], report = train(enc, vocab, tcfg, ModelConfig(dim=20, window=window,
                                                                    use_position_weights=weighted))
    print("weighted" if weighted else "plain   ", "held-out loss %.4f" % evaluate_loss(enc_held, models[weighted]))

# %% [markdown]
# The learned weight vector at offset -1 ends up far larger than the rest.

# %%
norms = np.linalg.norm(models[True].embeddings.positions, axis=1)
for p in (-2, -1, 1, 2):
    print("offset %+d  |d| = %.2f" % (p, norms[position_row(p, window)]))
