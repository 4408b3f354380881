"""cbow word embeddings with phrases, position-dependent weighting and subwords."""

from cbowkit.corpus import (
    SentenceDeduplicator,
    TokenStream,
    UnigramLM,
    Vocab,
    build_vocab,
    dedup_sentences,
    discard_prob,
    lm_filter,
    lm_train,
    subsample,
    tokenize,
)
from cbowkit.eval import (
    AnalogyItem,
    SimilarityPair,
    WordVectors,
    analogy_accuracy,
    analogy_predict,
    nearest_neighbors,
    similarity_spearman,
)
from cbowkit.model import EmbeddingSet, Model, ModelConfig, char_ngrams, hash_ngram
from cbowkit.phrases import PhraseConfig, bigram_score, build_phrases, count_stats, merge_pass
from cbowkit.trainer import NegativeSampler, TrainConfig, encode_corpus, pair_loss, train
from cbowkit.vecio import load_model, load_text, save_model, save_text

__version__ = "0.1.0"
