import subprocess
import sys

import numpy as np
import pytest

from cbowkit.cli import build_parser, run
from cbowkit.corpus import Vocab, read_sentences
from cbowkit.vecio import load_model, load_text
from synthetic import markov_corpus


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.txt"
    sentences = markov_corpus(6000, vocab_size=60, seed=2)
    path.write_text("\n".join(" ".join(s) for s in sentences) + "\n")
    return path


def test_no_arguments_is_usage_error(capsys):
    assert run([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert run(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["train", "--input", "x", "--output", "y", "--minn", "7", "--maxn", "6"],
    ["train", "--input", "x", "--output", "y", "--dim", "0"],
    ["train", "--input", "x", "--output", "y", "--neg-power", "2"],
    ["train", "--input", "x", "--output", "y", "--epochs", "notanumber"],
    ["phrases", "a", "b", "--keep-prob", "0"],
    ["phrases", "a", "b", "--iters", "3", "--threshold", "1,2"],
    ["phrases", "a", "b", "--joiner", " "],
    ["train", "--input", "x", "--output", "y", "--max-sentence-length", "0"],
])
def test_invalid_flags_rejected_before_work(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 1
    assert not (tmp_path / "y").exists()


def test_runtime_error_exit_two(tmp_path, capsys):
    assert run(["vocab", str(tmp_path / "missing.txt"), str(tmp_path / "v.tsv")]) == 2
    assert "error" in capsys.readouterr().err


def test_defaults():
    from cbowkit.cli import _configs

    p = build_parser()
    train_cfg, model_cfg = _configs(p.parse_args(["train", "--input", "x", "--output", "y"]))
    assert model_cfg.window == 5 and train_cfg.negatives == 10 and train_cfg.t == 1e-5
    assert model_cfg.dim == 100 and train_cfg.epochs == 5 and train_cfg.lr0 == 0.05
    _, model_cfg = _configs(p.parse_args(["train", "--input", "x", "--output", "y", "--pos-weights"]))
    assert model_cfg.window == 15 and model_cfg.use_position_weights
    _, model_cfg = _configs(p.parse_args(["train", "--input", "x", "--output", "y", "--pos-weights",
                                          "--window", "7"]))
    assert model_cfg.window == 7
    args = p.parse_args(["phrases", "a", "b"])
    assert args.iters == 6 and args.delta == 5.0 and args.keep_prob == 0.5
    args = p.parse_args(["phrases", "a", "b", "--phrase-iters", "2", "--phrase-threshold", "8,4"])
    assert args.iters == 2 and args.threshold == [8.0, 4.0]


def test_dedup(tmp_path, capsys):
    src = tmp_path / "in.txt"
    src.write_text("a b\nc\na b\na  b\n\n")
    out = tmp_path / "out.txt"
    assert run(["dedup", str(src), str(out)]) == 0
    assert out.read_text().splitlines() == ["a b", "c", ""]
    assert "dropped 2" in capsys.readouterr().err


def test_filter(tmp_path):
    ref = tmp_path / "ref.txt"
    ref.write_text("the cat sat\nthe dog sat\n" * 20)
    src = tmp_path / "in.txt"
    src.write_text("the cat sat\nzzz qqq www\n")
    out, scores = tmp_path / "out.txt", tmp_path / "scores.tsv"
    assert run(["filter", str(src), str(out), "--lm-corpus", str(ref), "--threshold", "-3",
                "--scores", str(scores)]) == 0
    assert out.read_text() == "the cat sat\n"
    keep = [line.split("\t")[0] for line in scores.read_text().splitlines()]
    assert keep == ["1", "0"]


def test_phrases_six_passes(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("new york city\n" * 40 + "old town\n")
    out, rep = tmp_path / "out.txt", tmp_path / "rep.tsv"
    assert run(["phrases", str(src), str(out), "--iters", "6", "--threshold", "1", "--delta", "0",
                "--keep-prob", "1", "--report", str(rep)]) == 0
    assert sum(line.startswith("# pass") for line in rep.read_text().splitlines()) == 6
    first = out.read_text().splitlines()[0]
    assert first in ("new_york_city",)


def test_phrases_joiner(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("new york\n" * 20)
    out = tmp_path / "out.txt"
    assert run(["phrases", str(src), str(out), "--iters", "1", "--threshold", "1", "--delta", "0",
                "--keep-prob", "1", "--joiner", "+"]) == 0
    assert out.read_text().splitlines()[0] == "new+york"


def test_phrases_seeded(tmp_path):
    src = tmp_path / "in.txt"
    src.write_text("new york\n" * 200)
    outs = []
    for seed in (3, 3, 4):
        out = tmp_path / ("out%d.txt" % len(outs))
        assert run(["phrases", str(src), str(out), "--iters", "1", "--threshold", "1", "--delta", "0",
                    "--seed", str(seed)]) == 0
        outs.append(out.read_text())
    assert outs[0] == outs[1] != outs[2]


def test_train_pipeline(tmp_path, corpus_file, capsys):
    vocab = tmp_path / "vocab.tsv"
    assert run(["vocab", str(corpus_file), str(vocab), "--min-count", "2"]) == 0
    assert len(Vocab.load(vocab)) > 10
    model, vectors, report = tmp_path / "m.bin", tmp_path / "v.txt", tmp_path / "report.txt"
    assert run(["train", "--input", str(corpus_file), "--output", str(model), "--vectors", str(vectors),
                "--vocab", str(vocab), "--dim", "12", "--window", "15", "--pos-weights", "--neg", "10",
                "--t", "1e-5", "--epochs", "2", "--subwords", "--buckets", "500",
                "--report", str(report)]) == 0
    lines = report.read_text().splitlines()
    assert len(lines) == 2 and lines[0].startswith("epoch 1 loss")
    m = load_model(model)
    assert m.config.window == 15 and m.config.use_position_weights and m.embeddings.positions.shape == (30, 12)
    wv = load_text(vectors)
    assert wv.vectors.shape == (len(m.vocab), 12)

    exported = tmp_path / "v2.txt"
    assert run(["export", "--model", str(model), "--output", str(exported)]) == 0
    assert exported.read_text() == vectors.read_text()

    query = m.vocab.tokens[0]
    capsys.readouterr()
    assert run(["nn", "--vectors", str(vectors), "--query", query, "-k", "3"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) == 3 and all(query != r.split("\t")[0] for r in rows)
    # subword composition answers for an unseen word
    assert run(["nn", "--model", str(model), "--query", query + "zz", "-k", "2"]) == 0

    toks = m.vocab.tokens
    questions = tmp_path / "q.txt"
    questions.write_text(": capital-x\n%s %s %s %s\n: gram1-y\n%s %s %s unseenword\n"
                         % (toks[0], toks[1], toks[2], toks[3], toks[0], toks[1], toks[2]))
    capsys.readouterr()
    assert run(["eval-analogy", "--model", str(model), "--questions", str(questions)]) == 0
    out = capsys.readouterr().out
    assert "semantic" in out and "oov: 1" in out

    pairs = tmp_path / "rw.txt"
    pairs.write_text("".join("%s\t%s\t%d\n" % (toks[i], toks[i + 1], i) for i in range(6)))
    capsys.readouterr()
    assert run(["eval-sim", "--vectors", str(vectors), "--pairs", str(pairs)]) == 0
    assert "spearman" in capsys.readouterr().out


def test_train_reads_and_subsamples_defaults(tmp_path, corpus_file):
    model = tmp_path / "m.bin"
    assert run(["train", "--input", str(corpus_file), "--output", str(model), "--dim", "8",
                "--epochs", "1", "--threads", "2", "--seed", "5"]) == 0
    m = load_model(model)
    assert m.config.window == 5 and m.train_config.negatives == 10 and m.train_config.threads == 2
    assert np.isfinite(m.embeddings.input).all()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cbowkit"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr


def test_sentence_io_round_trip(tmp_path):
    src = tmp_path / "in.txt"
    src.write_bytes("café naïve\n".encode("utf-8") + b"\xff\xfe x\n")
    out = tmp_path / "out.txt"
    assert run(["dedup", str(src), str(out)]) == 0
    assert out.read_bytes() == src.read_bytes()
    assert next(iter(read_sentences(out))) == ["café", "naïve"]
