"""Command line entry point: ``cbowkit <subcommand> ...``.

Exit status is 0 on success, 1 on a usage error and 2 when the command
fails at run time.
"""

from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager

import numpy as np

from cbowkit import corpus as corpus_mod
from cbowkit import eval as eval_mod
from cbowkit import phrases as phrases_mod
from cbowkit import vecio
from cbowkit.model import ModelConfig
from cbowkit.trainer import TrainConfig, train

logger = logging.getLogger("cbowkit")

BASE_WINDOW = 5
POSITION_WINDOW = 15


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("%s\n%s: error: %s" % (self.format_usage().rstrip(), self.prog, message))


@contextmanager
def _open_in(path):
    if path == "-":
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as f:
            yield f


@contextmanager
def _open_out(path):
    if path == "-":
        yield sys.stdout.buffer
    else:
        with open(path, "wb") as f:
            yield f


def _sentences(fin):
    for line in fin:
        yield corpus_mod.tokenize(line)


def _write(fout, sentence):
    fout.write(b" ".join(corpus_mod.encode_token(t) for t in sentence) + b"\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers, got %r" % text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cbowkit", description="cbow word-embedding pipeline")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("dedup", help="drop repeated sentences")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--exact", action="store_true", help="compare bytes on fingerprint hits")

    s = sub.add_parser("filter", help="keep lines scoring above a unigram LM threshold")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--lm-corpus", required=True, help="reference text the language model is fit on")
    s.add_argument("--threshold", type=float, required=True, help="minimum mean log-probability")
    s.add_argument("--min-count", type=int, default=1)
    s.add_argument("--scores", help="also write 'keep<TAB>score' per input line here")

    s = sub.add_parser("phrases", help="merge high-scoring bigrams over several passes")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--iters", "--phrase-iters", dest="iters", type=int, default=6)
    s.add_argument("--threshold", "--phrase-threshold", dest="threshold", type=_float_list, default=None,
                   help="one value for every pass or a comma-separated list per pass")
    s.add_argument("--delta", "--phrase-delta", dest="delta", type=float, default=5.0)
    s.add_argument("--keep-prob", "--phrase-keep-prob", dest="keep_prob", type=float, default=0.5)
    s.add_argument("--joiner", default="_", help="string placed between merged tokens")
    s.add_argument("--report", help="write merged bigrams per pass here")
    s.add_argument("--seed", type=int, default=1)

    s = sub.add_parser("vocab", help="count tokens and write a vocabulary file")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--min-count", type=int, default=5)

    s = sub.add_parser("train", help="train a cbow model")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True, help="binary model path")
    s.add_argument("--vectors", help="also export composed text vectors here")
    s.add_argument("--vocab", help="vocabulary file; built from the input when omitted")
    s.add_argument("--min-count", type=int, default=5)
    s.add_argument("--dim", type=int, default=100)
    s.add_argument("--window", type=int, default=None,
                   help="context half-width (default %i, or %i with --pos-weights)" % (BASE_WINDOW, POSITION_WINDOW))
    s.add_argument("--pos-weights", action="store_true")
    s.add_argument("--subwords", action="store_true")
    s.add_argument("--minn", type=int, default=3)
    s.add_argument("--maxn", type=int, default=6)
    s.add_argument("--buckets", type=int, default=2_000_000)
    s.add_argument("--neg", type=int, default=10)
    s.add_argument("--neg-power", type=float, default=0.75)
    s.add_argument("--t", type=float, default=1e-5)
    s.add_argument("--lr", type=float, default=0.05)
    s.add_argument("--epochs", type=int, default=5)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--no-dynamic-window", action="store_true")
    s.add_argument("--max-sentence-length", type=int, default=1000,
                   help="longer sentences are split into chunks of this many tokens")
    s.add_argument("--report", help="write per-epoch report lines here")

    for name, helptext in (("eval-analogy", "analogy accuracy"), ("eval-sim", "word similarity"),
                           ("nn", "nearest neighbours")):
        s = sub.add_parser(name, help=helptext)
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--model", help="binary model")
        src.add_argument("--vectors", help="text vectors")
        if name == "eval-analogy":
            s.add_argument("--questions", required=True)
            s.add_argument("--restrict", type=int, default=None, help="only the N most frequent words")
            s.add_argument("--lowercase", action="store_true")
        elif name == "eval-sim":
            s.add_argument("--pairs", required=True)
            s.add_argument("--lowercase", action="store_true")
        else:
            s.add_argument("--query", required=True)
            s.add_argument("-k", type=int, default=10)

    s = sub.add_parser("export", help="write composed text vectors from a binary model")
    s.add_argument("--model", required=True)
    s.add_argument("--output", required=True)
    return p


def _configs(args) -> tuple[TrainConfig, ModelConfig]:
    window = args.window
    if window is None:
        window = POSITION_WINDOW if args.pos_weights else BASE_WINDOW
    try:
        model_cfg = ModelConfig(dim=args.dim, window=window, use_position_weights=args.pos_weights,
                                use_subwords=args.subwords, minn=args.minn, maxn=args.maxn,
                                buckets=args.buckets)
        train_cfg = TrainConfig(lr0=args.lr, epochs=args.epochs, t=args.t, negatives=args.neg,
                                neg_power=args.neg_power, threads=args.threads, seed=args.seed,
                                dynamic_window=not args.no_dynamic_window,
                                max_sentence_length=args.max_sentence_length)
    except ValueError as e:
        raise UsageError("cbowkit train: error: %s" % e) from None
    if args.min_count < 1:
        raise UsageError("cbowkit train: error: --min-count must be >= 1")
    return train_cfg, model_cfg


def _vectors(args) -> eval_mod.WordVectors:
    if args.model:
        return eval_mod.WordVectors.from_model(vecio.load_model(args.model))
    return vecio.load_text(args.vectors)


def cmd_dedup(args):
    dedup = corpus_mod.SentenceDeduplicator(exact=args.exact)
    with _open_in(args.input) as fin, _open_out(args.output) as fout:
        for sentence in dedup.filter(_sentences(fin)):
            _write(fout, sentence)
    print("kept %d dropped %d" % (dedup.kept, dedup.dropped), file=sys.stderr)


def cmd_filter(args):
    ref = corpus_mod.TokenStream.from_file(args.lm_corpus)
    vocab = corpus_mod.build_vocab(ref, min_count=args.min_count)
    lm = corpus_mod.lm_train(ref, vocab)
    kept = dropped = 0
    scores = open(args.scores, "w") if args.scores else None
    try:
        with _open_in(args.input) as fin, _open_out(args.output) as fout:
            for sentence in _sentences(fin):
                keep, score = corpus_mod.lm_filter(sentence, lm, args.threshold)
                if scores:
                    scores.write("%d\t%.6f\n" % (keep, score))
                if keep:
                    _write(fout, sentence)
                    kept += 1
                else:
                    dropped += 1
    finally:
        if scores:
            scores.close()
    print("kept %d dropped %d" % (kept, dropped), file=sys.stderr)


def cmd_phrases(args):
    threshold = args.threshold
    if threshold is not None and len(threshold) == 1:
        threshold = threshold[0]
    try:
        cfg = phrases_mod.PhraseConfig(delta=args.delta, threshold=threshold, iterations=args.iters,
                                       keep_prob=args.keep_prob, joiner=args.joiner)
    except ValueError as e:
        raise UsageError("cbowkit phrases: error: %s" % e) from None
    with _open_in(args.input) as fin:
        sentences = list(_sentences(fin))
    out, reports = phrases_mod.build_phrases(sentences, cfg, np.random.default_rng(args.seed))
    with _open_out(args.output) as fout:
        for sentence in out:
            _write(fout, sentence)
    if args.report:
        phrases_mod.write_report(reports, args.report)
    for rep in reports:
        print("pass %d threshold %g merges %d" % (rep.iteration, rep.threshold, rep.n_merges), file=sys.stderr)


def cmd_vocab(args):
    if args.min_count < 1:
        raise UsageError("cbowkit vocab: error: --min-count must be >= 1")
    with _open_in(args.input) as fin:
        vocab = corpus_mod.build_vocab(_sentences(fin), min_count=args.min_count)
    vocab.save(args.output)
    print("%d words, %d tokens" % (len(vocab), vocab.total_count), file=sys.stderr)


def cmd_train(args):
    train_cfg, model_cfg = _configs(args)
    stream = corpus_mod.TokenStream.from_file(args.input)
    if args.vocab:
        vocab = corpus_mod.Vocab.load(args.vocab)
    else:
        vocab = corpus_mod.build_vocab(stream, min_count=args.min_count)
    logger.info("vocabulary: %i words, %i tokens", len(vocab), vocab.total_count)
    report_file = open(args.report, "w") if args.report else None

    def on_epoch(stats):
        print(stats.line(), file=sys.stderr)
        if report_file:
            report_file.write(stats.line() + "\n")
            report_file.flush()

    try:
        model, _ = train(stream, vocab, train_cfg, model_cfg, callback=on_epoch)
    finally:
        if report_file:
            report_file.close()
    vecio.save_model(model, args.output)
    if args.vectors:
        vecio.export_text(model, args.vectors)


def cmd_eval_analogy(args):
    vectors = _vectors(args)
    items = eval_mod.read_analogies(args.questions, lowercase=args.lowercase)
    print(eval_mod.analogy_accuracy(items, vectors, restrict=args.restrict).report())


def cmd_eval_sim(args):
    vectors = _vectors(args)
    pairs = eval_mod.read_similarity(args.pairs, lowercase=args.lowercase)
    print(eval_mod.similarity_spearman(pairs, vectors).report())


def cmd_nn(args):
    vectors = _vectors(args)
    for tok, sim in eval_mod.nearest_neighbors(args.query, args.k, vectors):
        print("%s\t%.6f" % (tok, sim))


def cmd_export(args):
    vecio.export_text(vecio.load_model(args.model), args.output)


COMMANDS = {
    "dedup": cmd_dedup,
    "filter": cmd_filter,
    "phrases": cmd_phrases,
    "vocab": cmd_vocab,
    "train": cmd_train,
    "eval-analogy": cmd_eval_analogy,
    "eval-sim": cmd_eval_sim,
    "nn": cmd_nn,
    "export": cmd_export,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help().rstrip())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(asctime)s %(levelname)s %(message)s")
        COMMANDS[args.command](args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SystemExit as e:
        # argparse --help exits 0
        return int(e.code or 0)
    except (OSError, ValueError, KeyError) as e:
        print("cbowkit: error: %s" % e, file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
