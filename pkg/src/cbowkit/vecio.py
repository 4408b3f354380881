"""Vector and model serialization.

Text vectors use the common ``word2vec`` text layout: a ``<count> <dim>``
header line, then ``<token> <v1> ... <vd>`` per line.

Binary models are a little-endian container::

    b"DVEC"  u8 version
    u32 n    JSON (utf-8) of {"model": ModelConfig, "train": TrainConfig | null}
    u64 n    then per token: u32 len, token bytes, u64 count
    3 x      u64 rows, u64 cols, rows*cols float32 (row-major)

The matrices are input, output and positions (``0 x dim`` when absent).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from cbowkit.corpus import Vocab, encode_token
from cbowkit.eval import WordVectors
from cbowkit.model import EmbeddingSet, Model, ModelConfig

MAGIC = b"DVEC"
VERSION = 1


class FormatError(ValueError):
    """Raised on malformed or truncated vector and model files."""


def save_text(vectors: WordVectors, path: str | Path) -> None:
    values = np.asarray(vectors.vectors, dtype=np.float64)
    if not np.isfinite(values).all():
        raise ValueError("refusing to write non-finite vectors")
    n, d = len(vectors), (values.shape[1] if values.ndim == 2 else 0)
    with open(path, "wb") as fout:
        fout.write(b"%d %d\n" % (n, d))
        for tok, row in zip(vectors.tokens, values):
            raw = encode_token(tok)
            if not raw or any(ch in raw for ch in b" \t\n\r\x0b\x0c"):
                raise ValueError("token %r is empty or contains whitespace" % tok)
            fout.write(raw + b" " + " ".join("%.9g" % x for x in row).encode("ascii") + b"\n")


def load_text(path: str | Path) -> WordVectors:
    """Read a text vector file.

    Raises
    ------
    FormatError
        On a malformed header, a row of the wrong arity, a non-numeric value
        or a row count that disagrees with the header. The message carries
        the 1-based line number.

    """
    with open(path, "rb") as fin:
        header = fin.readline()
        try:
            n, d = (int(x) for x in header.split())
        except ValueError:
            raise FormatError("%s:1: malformed header %r" % (path, header)) from None
        if n < 0 or d < 0:
            raise FormatError("%s:1: negative size in header" % path)
        tokens = []
        mat = np.zeros((n, d), dtype=np.float32)
        for i in range(n):
            lineno = i + 2
            line = fin.readline()
            if not line:
                raise FormatError("%s:%i: expected %i rows, file ended" % (path, lineno, n))
            parts = line.rstrip(b"\r\n").split(b" ")
            if len(parts) != d + 1:
                raise FormatError("%s:%i: expected %i values, got %i" % (path, lineno, d, len(parts) - 1))
            try:
                mat[i] = [float(x) for x in parts[1:]]
            except ValueError:
                raise FormatError("%s:%i: non-numeric value" % (path, lineno)) from None
            tokens.append(parts[0].decode("utf-8", "surrogateescape"))
        if fin.readline().strip():
            raise FormatError("%s:%i: more rows than the header declares" % (path, n + 2))
    return WordVectors(tokens, mat)


def export_text(model: Model, path: str | Path) -> None:
    """Write the composed (word plus n-gram mean) input vector of every word."""
    save_text(WordVectors(model.vocab.tokens, model.composed_vectors()), path)


def _write_matrix(fout, m: np.ndarray | None, dim: int) -> None:
    if m is None:
        fout.write(struct.pack("<QQ", 0, dim))
        return
    fout.write(struct.pack("<QQ", m.shape[0], m.shape[1]))
    fout.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def save_model(model: Model, path: str | Path) -> None:
    emb = model.embeddings
    train_cfg = None if model.train_config is None else model.train_config.to_dict()
    meta = json.dumps({"model": model.config.to_dict(), "train": train_cfg}).encode("utf-8")
    with open(path, "wb") as fout:
        fout.write(MAGIC + struct.pack("<B", VERSION))
        fout.write(struct.pack("<I", len(meta)) + meta)
        fout.write(struct.pack("<Q", len(model.vocab)))
        for tok, c in zip(model.vocab.tokens, model.vocab.counts):
            raw = encode_token(tok)
            fout.write(struct.pack("<I", len(raw)) + raw + struct.pack("<Q", int(c)))
        d = model.config.dim
        _write_matrix(fout, emb.input, d)
        _write_matrix(fout, emb.output, d)
        _write_matrix(fout, emb.positions, d)


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("%s: truncated at byte %i (needed %i more)" % (self.path, self.pos, n))
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def matrix(self) -> np.ndarray:
        rows, cols = self.unpack("<QQ")
        raw = self.take(rows * cols * 4)
        return np.frombuffer(raw, dtype="<f4").reshape(rows, cols).astype(np.float32)


def load_model(path: str | Path) -> Model:
    """Load a binary model; matrices are restored bit for bit.

    Raises
    ------
    FormatError
        On bad magic, an unsupported version or a truncated file.

    """
    from cbowkit.trainer import TrainConfig

    with open(path, "rb") as fin:
        r = _Reader(fin.read(), path)
    if r.take(4) != MAGIC:
        raise FormatError("%s: not a model file (bad magic)" % path)
    (version,) = r.unpack("<B")
    if version != VERSION:
        raise FormatError("%s: unsupported format version %i" % (path, version))
    (n_meta,) = r.unpack("<I")
    meta = json.loads(r.take(n_meta).decode("utf-8"))
    (n_words,) = r.unpack("<Q")
    tokens, counts = [], []
    for _ in range(n_words):
        (n,) = r.unpack("<I")
        tokens.append(r.take(n).decode("utf-8", "surrogateescape"))
        counts.append(r.unpack("<Q")[0])
    inp, out, pos = r.matrix(), r.matrix(), r.matrix()
    if r.pos != len(r.data):
        raise FormatError("%s: %i trailing bytes" % (path, len(r.data) - r.pos))
    config = ModelConfig(**meta["model"])
    train_cfg = TrainConfig(**meta["train"]) if meta.get("train") else None
    vocab = Vocab(tokens, np.array(counts, dtype=np.int64), min_count=min(counts) if counts else 1)
    emb = EmbeddingSet(inp, out, pos if config.use_position_weights else None)
    return Model(vocab, config, emb, train_config=train_cfg)
