"""Command-line entry points for training, evaluation and persistence.

Defaults follow the recommended recipe: context window 2 with dynamic
windows, five negative samples, subsampling threshold 1e-3, linear
learning rate from 2.5e-2 down to 2.5e-6, vocabulary 100k, reservoir
1e8, dimension 100.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from streamvec import batch, checkpoint, corpus, evaluation
from streamvec.stream import StreamModel, TrainerConfig

logger = logging.getLogger(__name__)

DEFAULTS = TrainerConfig()


def _add_model_flags(p: argparse.ArgumentParser, for_resume: bool) -> None:
    # defaults stay None so we can tell "explicitly set" from "defaulted",
    # which --resume needs; _resolve_config applies the real defaults
    p.add_argument("--vocab-size", type=int, default=None, metavar="K",
                   help=f"sketch vocabulary slots (default {DEFAULTS.vocab_capacity})")
    p.add_argument("--reservoir-size", type=int, default=None, metavar="N",
                   help=f"negative sampling reservoir size (default {DEFAULTS.reservoir_capacity})")
    p.add_argument("--negatives", type=int, default=None, metavar="S",
                   help=f"negative samples per pair (default {DEFAULTS.negatives})")
    p.add_argument("--dim", type=int, default=None, metavar="D",
                   help=f"embedding dimension (default {DEFAULTS.dim})")
    p.add_argument("--window", type=int, default=None, metavar="C",
                   help=f"context radius (default {DEFAULTS.context_radius})")
    p.add_argument("--subsample", type=float, default=None, metavar="DELTA",
                   help=f"subsampling threshold (default {DEFAULTS.subsample_threshold})")
    p.add_argument("--dynamic-windows", action=argparse.BooleanOptionalAction, default=None,
                   help="draw each window radius uniformly from 1..C (default on)")
    p.add_argument("--lr", type=float, default=None,
                   help=f"initial learning rate (default {DEFAULTS.rho0})")
    p.add_argument("--lr-min", type=float, default=None,
                   help=f"learning rate floor (default {DEFAULTS.rho_min})")
    p.add_argument("--lr-horizon", type=float, default=None,
                   help=f"steps over which the linear rate decays (default {DEFAULTS.horizon:g})")
    p.add_argument("--schedule", choices=["linear", "poly"], default=None,
                   help="per-slot learning rate schedule (default linear)")
    p.add_argument("--tau", type=float, default=None,
                   help=f"poly schedule offset (default {DEFAULTS.tau})")
    p.add_argument("--kappa", type=float, default=None,
                   help=f"poly schedule exponent (default {DEFAULTS.kappa})")
    p.add_argument("--seed", type=int, default=None,
                   help=f"rng seed (default {DEFAULTS.rng_seed})")
    del for_resume


_FLAG_TO_FIELD = {
    "vocab_size": "vocab_capacity",
    "reservoir_size": "reservoir_capacity",
    "negatives": "negatives",
    "dim": "dim",
    "window": "context_radius",
    "subsample": "subsample_threshold",
    "dynamic_windows": "dynamic_windows",
    "lr": "rho0",
    "lr_min": "rho_min",
    "lr_horizon": "horizon",
    "schedule": "schedule",
    "tau": "tau",
    "kappa": "kappa",
    "seed": "rng_seed",
}


def _resolve_config(args: argparse.Namespace) -> TrainerConfig:
    values = {}
    for flag, field in _FLAG_TO_FIELD.items():
        given = getattr(args, flag, None)
        if given is not None:
            values[field] = given
    return TrainerConfig(**values)


def _explicit_model_flags(args: argparse.Namespace) -> list[str]:
    return [flag for flag in _FLAG_TO_FIELD if getattr(args, flag, None) is not None]


def _input_source(spec: str):
    return sys.stdin.buffer if spec == "-" else spec


def _parse_buckets(text: str) -> list[tuple[int, int]]:
    buckets = []
    for piece in text.split(","):
        lo, _, hi = piece.partition(":")
        try:
            buckets.append((int(lo), int(hi)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad bucket {piece!r}, expected LO:HI") from None
    return buckets


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamvec",
                                     description="Streaming and batch SGNS word embeddings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-stream", help="one-pass bounded-memory training")
    p.add_argument("--input", required=True, help="corpus path, or - for stdin")
    _add_model_flags(p, for_resume=True)
    p.add_argument("--max-sentence-len", type=int, default=corpus.DEFAULT_MAX_SENTENCE_LEN)
    p.add_argument("--checkpoint-out", help="write the trained model here")
    p.add_argument("--resume", help="continue from this checkpoint")
    p.add_argument("--export-out", help="also export embeddings as text")
    p.add_argument("--log-every", type=int, default=0, metavar="TOKENS",
                   help="progress line interval in tokens (0 = quiet)")

    p = sub.add_parser("train-batch", help="two-pass word2vec-style reference training")
    p.add_argument("--input", required=True, help="corpus path (re-read per epoch)")
    _add_model_flags(p, for_resume=False)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--min-count", type=int, default=5)
    p.add_argument("--table-size", type=int, default=10_000_000)
    p.add_argument("--max-sentence-len", type=int, default=corpus.DEFAULT_MAX_SENTENCE_LEN)
    p.add_argument("--out", required=True, help="embeddings text file to write")
    p.add_argument("--vocab-out", help="also write the vocabulary as TSV")

    p = sub.add_parser("counts", help="exact word counts as TSV, rank order")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval-counts", help="sketch count error report vs ground truth")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--truth-corpus", required=True)
    p.add_argument("--mode", choices=["impute", "omit"], default="impute")
    p.add_argument("--csv-out", required=True)

    p = sub.add_parser("eval-sim", help="cross-model cosine similarity correlation")
    p.add_argument("--model-a", required=True, help="checkpoint or text embeddings")
    p.add_argument("--model-b", required=True, help="checkpoint or text embeddings")
    p.add_argument("--buckets", type=_parse_buckets, default=[(1, 100), (1601, 1700), (6401, 6500)],
                   help="comma-separated rank intervals LO:HI (default 1:100,1601:1700,6401:6500)")
    p.add_argument("--pairs", type=int, default=1000, help="pairs sampled per bucket pair")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--csv-out", required=True)
    p.add_argument("--truth-corpus",
                   help="rank words by exact counts from this corpus "
                        "(default: model-b's own order)")

    p = sub.add_parser("neighbors", help="nearest neighbors of a word")
    p.add_argument("--model", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--top-n", type=int, default=10)

    p = sub.add_parser("export", help="export a model as text embeddings")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)

    return parser


def _cmd_train_stream(args) -> int:
    explicit = _explicit_model_flags(args)
    if args.resume:
        if explicit:
            flags = ", ".join("--" + f.replace("_", "-") for f in explicit)
            print(f"error: {flags} cannot be overridden when resuming", file=sys.stderr)
            return 2
        model = checkpoint.load_checkpoint(args.resume)
    else:
        model = StreamModel(_resolve_config(args))
    sentences = corpus.read_sentences(_input_source(args.input), args.max_sentence_len)
    stats = model.train_stream(sentences, log_every_tokens=args.log_every)
    logger.info(
        "trained: sentences=%d tokens=%d retained=%d ejections=%d contexts=%d skipped=%d",
        stats.sentences, stats.tokens, stats.retained_tokens,
        stats.ejections, stats.contexts_trained, stats.contexts_skipped,
    )
    if args.checkpoint_out:
        checkpoint.save_checkpoint(model, args.checkpoint_out)
    if args.export_out:
        checkpoint.export_embeddings(evaluation.EmbeddingView.from_stream_model(model),
                                     args.export_out)
    return 0


def _cmd_train_batch(args) -> int:
    if args.input == "-" and args.epochs > 1:
        print("error: stdin cannot be re-read for multiple epochs", file=sys.stderr)
        return 2
    config = _resolve_config(args)
    vocab = batch.build_vocab(_input_source(args.input), args.min_count)
    if not len(vocab):
        print("error: vocabulary is empty at this min-count", file=sys.stderr)
        return 1
    table = batch.build_negative_table(vocab, max(args.table_size, len(vocab)))
    embeddings = batch.batch_train(
        _input_source(args.input), vocab, table, config,
        epochs=args.epochs, max_sentence_len=args.max_sentence_len,
    )
    checkpoint.export_embeddings(evaluation.EmbeddingView.from_batch(vocab, embeddings), args.out)
    if args.vocab_out:
        with open(args.vocab_out, "w", encoding="utf-8") as f:
            batch.write_vocab_tsv(vocab, f)
    return 0


def _cmd_counts(args) -> int:
    table = corpus.exact_counts(_input_source(args.input))
    with open(args.out, "w", encoding="utf-8") as f:
        corpus.write_counts_tsv(table, f)
    return 0


def _cmd_eval_counts(args) -> int:
    model = checkpoint.load_checkpoint(args.checkpoint)
    truth = corpus.exact_counts(_input_source(args.truth_corpus))
    report = evaluation.count_error_report(model.sketch, truth, args.mode)
    with open(args.csv_out, "w", encoding="utf-8") as f:
        report.write_csv(f)
    defined = [r.relative_error for r in report.rows if r.relative_error is not None]
    mean = sum(defined) / len(defined) if defined else float("nan")
    print(f"rows={len(report.rows)} defined={len(defined)} mean_relative_error={mean:.6g}")
    return 0


def _cmd_eval_sim(args) -> int:
    view_a = checkpoint.load_model_view(args.model_a)
    view_b = checkpoint.load_model_view(args.model_b)
    if args.truth_corpus:
        truth = corpus.exact_counts(_input_source(args.truth_corpus))
        ranked = [w for w, _ in corpus.rank_by_frequency(truth)]
    else:
        ranked = view_b.words
    rng = np.random.Generator(np.random.PCG64(args.seed))
    with open(args.csv_out, "w", encoding="utf-8") as f:
        for i, bucket_a in enumerate(args.buckets):
            for bucket_b in args.buckets[i:]:
                pairs = evaluation.sample_bucket_pairs(ranked, bucket_a, bucket_b,
                                                       args.pairs, rng)
                report = evaluation.similarity_correlation(
                    view_a, view_b, pairs, bucket_pair=(bucket_a, bucket_b))
                report.write_csv(f)
                r = "nan" if report.pearson_r is None else f"{report.pearson_r:.4f}"
                print(f"buckets {bucket_a[0]}:{bucket_a[1]} x {bucket_b[0]}:{bucket_b[1]} "
                      f"r={r} undefined_fraction={report.undefined_fraction:.4f} "
                      f"pairs={report.pairs_sampled}")
    return 0


def _cmd_neighbors(args) -> int:
    view = checkpoint.load_model_view(args.model)
    for word, sim in evaluation.nearest_neighbors(view, args.word, args.top_n):
        print(f"{word}\t{sim:.6f}")
    return 0


def _cmd_export(args) -> int:
    checkpoint.export_embeddings(checkpoint.load_model_view(args.model), args.out)
    return 0


_COMMANDS = {
    "train-stream": _cmd_train_stream,
    "train-batch": _cmd_train_batch,
    "counts": _cmd_counts,
    "eval-counts": _cmd_eval_counts,
    "eval-sim": _cmd_eval_sim,
    "neighbors": _cmd_neighbors,
    "export": _cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError, KeyError, checkpoint.CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    sys.exit(main())
