"""Command-line interface: ``lcpseg <subcommand> [options]``.

Exit status is 0 on success, 1 on runtime errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import io
from .bpe import apply_bpe, bpe_segmentations, train_bpe
from .core import BoundaryMode, LcpsegError, MultiSegmentation
from .lcp import LcpParams, SegmentMode, lcp_dropout, replay_labeler, segment_test_time
from .metrics import SegmentationStats, compute_stats, segmentation_stats

log = logging.getLogger("lcpseg")


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(None), help="random seed (generated and recorded if omitted)")
    p.add_argument(
        "--boundary-mode",
        choices=[m.value for m in BoundaryMode],
        default=d(BoundaryMode.RESPECT.value),
    )
    p.add_argument("--input", default=d(None), help="input corpus, one sentence per line")
    p.add_argument("--output", default=d(None))
    p.add_argument("--sep", default=d(" "), help="token separator in segmented output")
    p.add_argument("--blank-marker", default=d(io.BLANK_MARKER), help="rendering of the blank symbol")
    p.add_argument("-v", "--verbose", action="count", default=d(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcpseg", description="BPE, BPE-dropout and LCP-dropout segmentation")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        _add_globals(p, suppress=True)
        return p

    p = add("train-bpe", "learn a BPE merge table")
    p.add_argument("--vocab-size", type=_positive_int, required=True)
    p.add_argument("--merge-singletons", action="store_true", help="keep merging pairs seen only once")
    p.add_argument("--save-config", help="write the run configuration as JSON")

    p = add("train-lcp", "run LCP-dropout, write the vocabulary and one file per pass")
    p.add_argument("--vocab-size", type=_positive_int, required=True)
    p.add_argument("--partial-vocab", type=_positive_int, help="per-pass budget (default: vocab-size / 2)")
    p.add_argument("--topk", type=_fraction, default=0.01)
    p.add_argument("--max-passes", type=_positive_int, default=100)
    p.add_argument("--max-inner", type=_positive_int, default=10_000)
    p.add_argument("--max-relabel", type=_positive_int, default=32)
    p.add_argument("--max-stall", type=_positive_int, default=10)
    p.add_argument("--passes-prefix", help="stem for <stem>.passN.txt (default: output without suffix)")
    p.add_argument("--stats-json", help="write segmentation statistics as JSON")
    p.add_argument("--save-config", help="write the run configuration as JSON")
    p.add_argument("--replay-labels", help=argparse.SUPPRESS)

    p = add("segment", "segment a corpus with a trained model")
    p.add_argument("--model", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--dropout", type=_probability, help="BPE-dropout probability (BPE models)")
    mode.add_argument("--test-mode", choices=[m.value for m in SegmentMode], help="LCP models")

    p = add("augment", "train from a run configuration and emit one segmented file per pass")
    p.add_argument("--model-config", required=True)
    p.add_argument("--stats-json")

    p = add("stats", "statistics of pass files against the raw corpus")
    p.add_argument("--passes", required=True, help="stem of <stem>.passN.txt files")
    p.add_argument("--trace", help="trace JSON (default: <stem>.trace.json if present)")
    return parser


def _require(args, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise _UsageError(f"--{name.replace('_', '-')} is required for {args.command}")


class _UsageError(Exception):
    pass


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        log.info("generated seed %d", args.seed)
    return args.seed


def _stats_report(stats: SegmentationStats, extra: dict, json_path: str | None) -> None:
    doc = {**stats.as_dict(), **extra}
    text = json.dumps(doc, sort_keys=True)
    print(text)
    if json_path:
        Path(json_path).write_text(text + "\n", encoding="utf-8")
    width = max(len(k) for k in doc)
    for key, value in doc.items():
        if not isinstance(value, dict):
            print(f"{key:<{width}}  {value}", file=sys.stderr)


def _emit_passes(stem, result: MultiSegmentation, args, algorithm: str) -> list[Path]:
    paths = io.write_passes(stem, result, args.sep, args.blank_marker)
    io.write_trace(io.trace_path(stem), result, args.seed, algorithm)
    return paths


def _stem(path: str) -> str:
    p = Path(path)
    return str(p.with_suffix("")) if p.suffix else str(p)


def _run_lcp(corpus, params: LcpParams, seed: int, labels_file: str | None = None) -> MultiSegmentation:
    rng = np.random.default_rng(seed)
    if labels_file:
        script = json.loads(Path(labels_file).read_text(encoding="utf-8"))
        return lcp_dropout(corpus, params, rng, replay_labeler(script))
    return lcp_dropout(corpus, params, rng)


def cmd_train_bpe(args) -> int:
    _require(args, "input", "output")
    seed = _seed(args)
    corpus = io.load_corpus(args.input, args.boundary_mode)
    table = train_bpe(corpus, args.vocab_size, args.merge_singletons)
    io.save_model(table, args.output)
    log.info("learned %d rules", len(table.rules))
    if args.save_config:
        params = {"vocab_size": args.vocab_size, "merge_singletons": args.merge_singletons}
        io.RunConfig("bpe", seed, params, args.boundary_mode, args.input, args.output).save(args.save_config)
    return 0


def cmd_train_lcp(args) -> int:
    _require(args, "input", "output")
    partial = args.partial_vocab if args.partial_vocab is not None else max(1, args.vocab_size // 2)
    if partial > args.vocab_size:
        raise _UsageError("--partial-vocab must not exceed --vocab-size")
    seed = _seed(args)
    params = LcpParams(
        args.vocab_size, partial, args.topk, args.max_passes, args.max_inner, args.max_relabel, args.max_stall
    )
    corpus = io.load_corpus(args.input, args.boundary_mode)
    result = _run_lcp(corpus, params, seed, args.replay_labels)
    io.save_model(io.LcpModel(result.global_vocab, params.v, params.l, params.k, seed), args.output)
    stem = args.passes_prefix or _stem(args.output)
    paths = _emit_passes(stem, result, args, "lcp-dropout")
    log.info("wrote %d pass files, |V|=%d (%s)", len(paths), len(result.global_vocab), result.stop_reason)
    if args.save_config:
        io.RunConfig("lcp-dropout", seed, asdict(params), args.boundary_mode, args.input, stem).save(
            args.save_config
        )
    if args.stats_json:
        stats = compute_stats(result, [s.text for s in corpus])
        _stats_report(stats, {"seed": seed, "params": io.params_dict(params)}, args.stats_json)
    return 0


def cmd_segment(args) -> int:
    _require(args, "input")
    model = io.load_model(args.model)
    corpus = io.iter_corpus(args.input, args.boundary_mode)
    if isinstance(model, io.LcpModel):
        if args.dropout is not None:
            raise _UsageError("--dropout applies to BPE models only")
        mode = SegmentMode(args.test_mode or SegmentMode.GREEDY)
        rng = np.random.default_rng(_seed(args)) if mode is SegmentMode.LCP_SAMPLE else None
        out = (segment_test_time(seq, model.vocab, mode, model.k, rng) for seq in corpus)
    else:
        if args.test_mode is not None:
            raise _UsageError("--test-mode applies to LCP models only")
        p = args.dropout or 0.0
        rng = np.random.default_rng(_seed(args)) if p > 0 else None
        out = (apply_bpe(seq, model, p, rng) for seq in corpus)
    if args.output is None:
        for seq in out:
            sys.stdout.write(io.render_tokens(seq, args.sep, args.blank_marker) + "\n")
    else:
        io.write_segmented(args.output, out, args.sep, args.blank_marker)
    return 0


def cmd_augment(args) -> int:
    cfg = io.RunConfig.load(args.model_config)
    # command-line values win over the stored ones
    input_path = args.input or cfg.input
    output = args.output or cfg.output
    if input_path is None or output is None:
        raise _UsageError("input and output must come from the command line or the config")
    args.seed = cfg.seed if args.seed is None else args.seed
    corpus = io.load_corpus(input_path, cfg.boundary_mode)
    if cfg.algorithm == "lcp-dropout":
        params = LcpParams(**cfg.params)
        result = _run_lcp(corpus, params, args.seed)
    else:
        table = train_bpe(corpus, cfg.params["vocab_size"], cfg.params.get("merge_singletons", False))
        p = cfg.params.get("dropout", 0.0) if cfg.algorithm == "bpe-dropout" else 0.0
        samples = cfg.params.get("samples", 1)
        rng = np.random.default_rng(args.seed)
        result = bpe_segmentations(corpus, table, p, samples, rng)
    _emit_passes(output, result, args, cfg.algorithm)
    if args.stats_json:
        stats = compute_stats(result, [s.text for s in corpus])
        _stats_report(stats, {"seed": args.seed, "params": io.params_dict(result.params)}, args.stats_json)
    return 0


def cmd_stats(args) -> int:
    _require(args, "input")
    raw = io.read_lines(args.input)
    paths = []
    i = 1
    while io.pass_path(args.passes, i).exists():
        paths.append(io.pass_path(args.passes, i))
        i += 1
    if not paths:
        raise LcpsegError(f"no pass files found for stem {args.passes!r}")
    passes = [io.read_segmented(p, args.sep, args.blank_marker) for p in paths]
    trace_file = Path(args.trace) if args.trace else io.trace_path(args.passes)
    extra: dict = {}
    traces = []
    if trace_file.exists():
        doc, traces = io.read_trace(trace_file)
        extra = {"seed": doc.get("seed"), "params": doc.get("params"), "algorithm": doc.get("algorithm")}
    stats = segmentation_stats(passes, traces, raw)
    _stats_report(stats, extra, None)
    return 0


COMMANDS = {
    "train-bpe": cmd_train_bpe,
    "train-lcp": cmd_train_lcp,
    "segment": cmd_segment,
    "augment": cmd_augment,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    if not args.sep or "\\" in args.sep or args.sep == args.blank_marker:
        parser.print_usage(sys.stderr)
        print("lcpseg: error: --sep must be non-empty, without backslashes, and differ from the blank marker", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except _UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"lcpseg: error: {e}", file=sys.stderr)
        return 2
    except (LcpsegError, OSError, ValueError, KeyError) as e:
        print(f"lcpseg: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
