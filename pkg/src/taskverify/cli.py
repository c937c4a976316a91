"""Command-line entry point.

Exit codes: 0 verified (or success), 1 not verified, 2 error. Errors are
reported on stderr as a single line ``error: <Kind>: <reason>``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from taskverify import errors
from taskverify.aligner import DEFAULT_K, DEFAULT_THRESHOLD, Trace, align_dp, segment, verify
from taskverify.datagen import SPLITS, DatasetConfig, TraceConfig, build_dataset, read_samples, write_dataset
from taskverify.dsl import graph_to_dot, parse_dot
from taskverify.graph import DEFAULT_CAP
from taskverify.scorer import ConstantScorer, OracleScorer, ParametricScorer
from taskverify.semparse import ged, parse_description

EXIT_OK, EXIT_NOT_VERIFIED, EXIT_ERROR = 0, 1, 2


class UsageError(errors.ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    """Turns argparse failures into one-line errors instead of usage dumps."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _probability(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {v}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _fraction(text):
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1), got {v}")
    return v


def _global_flags(p, suppress: bool):
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=_nonneg_int, default=dflt(0), help="random seed (default 0)")
    g.add_argument("--threshold", type=_probability, default=dflt(DEFAULT_THRESHOLD),
                   help=f"decision threshold on the verification probability (default {DEFAULT_THRESHOLD:.6f})")
    g.add_argument("--window-k", type=_positive_int, default=dflt(DEFAULT_K),
                   help=f"frames per segment (default {DEFAULT_K})")
    g.add_argument("--extension-cap", type=_positive_int, default=dflt(DEFAULT_CAP),
                   help=f"maximum linear extensions enumerated per graph (default {DEFAULT_CAP})")
    g.add_argument("--strict-vocab", action="store_true", default=dflt(False),
                   help="reject objects, states and receptacles outside the built-in vocabulary")


def _scorer_flags(p):
    p.add_argument("--scorer", choices=("oracle", "parametric", "constant"), default="oracle",
                   help="scorer used to rate (query, segment) pairs (default oracle)")
    p.add_argument("--checkpoint", help="parametric scorer checkpoint (required with --scorer parametric)")
    p.add_argument("--noise", type=_fraction, default=0.0, help="oracle label-flip rate in [0, 0.5)")
    p.add_argument("--constant", type=_probability, default=0.5, help="probability returned by --scorer constant")
    p.add_argument("--scheme", choices=("state_relation", "action"), default="state_relation",
                   help="query scheme (default state_relation)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taskverify", description="Verify multi-step tasks against event traces.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _global_flags(p, suppress=True)
        return p

    p = add("generate", "generate a synthetic dataset (dataset.jsonl + stats.json)")
    p.add_argument("--out", required=True, help="output directory")
    for split in SPLITS:
        p.add_argument(f"--{split.replace('_', '-')}", type=_nonneg_int, default=None, dest=split,
                       help=f"number of {split} samples")
    p.add_argument("--holdout-frac", type=_fraction, default=0.25, help="fraction of compositions held out")
    p.add_argument("--holdout-pairs", type=_nonneg_int, default=6, help="(action, object) pairs held out")
    p.add_argument("--dim", type=_positive_int, default=64, help="frame feature dimension")
    p.add_argument("--frame-noise", type=float, default=0.1, help="Gaussian frame noise")

    p = add("train", "train a parametric scorer")
    p.add_argument("--data", required=True, help="dataset.jsonl")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--split", default="train", help="split to train on (default train)")
    p.add_argument("--epochs", type=_positive_int, default=50)
    p.add_argument("--lr", type=_positive_float, default=1e-3)
    p.add_argument("--batch", type=_positive_int, default=64)
    p.add_argument("--init-scale", type=_positive_float, default=0.01)
    p.add_argument("--scheme", choices=("state_relation", "action"), default="state_relation")
    p.add_argument("--loss-out", help="write the per-epoch loss trace here (JSON)")

    p = add("verify", "verify one trace against a task graph or description")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="task graph in DOT form")
    src.add_argument("--description", help="task description")
    p.add_argument("--trace", required=True,
                   help="JSON or JSON-lines file; the first record is a trace or a sample holding one")
    p.add_argument("--alignment-csv", help="where to write the alignment CSV (default: next to the trace)")
    _scorer_flags(p)

    p = add("evaluate", "evaluate a scorer on a dataset")
    p.add_argument("--data", required=True, help="dataset.jsonl")
    p.add_argument("--out", required=True, help="output directory for metrics.json / metrics.csv")
    p.add_argument("--splits", nargs="+", help="restrict to these splits")
    p.add_argument("--parse", action="store_true", help="rebuild graphs from descriptions")
    p.add_argument("--detection", action="store_true", help="also write the query-detection confusion CSV")
    p.add_argument("--sweep", type=_positive_int, nargs="+", metavar="K", help="also sweep these window sizes")
    _scorer_flags(p)

    p = add("parse", "parse a task description and print its DOT graph")
    p.add_argument("text", help="task description")
    p.add_argument("--scheme", choices=("state_relation", "action"), default="state_relation")

    p = add("align", "align an N x S log-score CSV and print the alignment")
    p.add_argument("scores", help="CSV file with one row per query and one column per segment")

    p = add("ged", "graph edit distance between two DOT graphs")
    p.add_argument("graph1")
    p.add_argument("graph2")
    return parser


# helpers

def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}")


def _read_graph(path, strict):
    return parse_dot(_read_text(path), strict=strict)


def _read_trace(path) -> Trace:
    text = _read_text(path).strip()
    if not text:
        raise errors.EmptyTrace(f"{path} is empty")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = json.loads(text.splitlines()[0])
    if "trace" in doc:
        return Trace.from_json(doc["trace"], trace_id=doc.get("id", Path(path).stem))
    return Trace.from_json(doc, trace_id=Path(path).stem)


def _make_scorer(args):
    if args.scorer == "oracle":
        return OracleScorer(noise=args.noise, seed=args.seed)
    if args.scorer == "constant":
        return ConstantScorer(args.constant)
    if not args.checkpoint:
        raise UsageError("--scorer parametric needs --checkpoint")
    if not Path(args.checkpoint).exists():
        raise UsageError(f"checkpoint {args.checkpoint} does not exist")
    return ParametricScorer.load(args.checkpoint)


def _read_score_csv(path) -> np.ndarray:
    rows = []
    for row in csv.reader(_read_text(path).splitlines()):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            rows.append([float(x) for x in row])
        except ValueError:
            continue  # header line
    if not rows:
        raise UsageError(f"{path} holds no score rows")
    if len({len(r) for r in rows}) != 1:
        raise UsageError(f"{path}: rows have different lengths")
    return np.array(rows)


# commands

def cmd_generate(args, out):
    sizes = {s: getattr(args, s) for s in SPLITS if getattr(args, s) is not None}
    if not sizes:
        raise UsageError("give at least one split size, e.g. --train 500")
    cfg = DatasetConfig(
        sizes=sizes,
        seed=args.seed,
        trace=TraceConfig(d=args.dim, noise=args.frame_noise),
        holdout_composition_frac=args.holdout_frac,
        holdout_pairs=args.holdout_pairs,
    )
    ds = build_dataset(cfg)
    data_path, stats_path = write_dataset(ds, args.out)
    stats = ds.stats()
    print(f"wrote {stats['n_samples']} samples to {data_path}", file=out)
    for name, st in stats["splits"].items():
        print(f"  {name}: {st['n']} samples ({st['positive']} positive), "
              f"mean sub-tasks {st['mean_subtasks']:.2f}, mean extensions {st['mean_extensions']:.2f}", file=out)
    print(f"stats: {stats_path}", file=out)
    return EXIT_OK


def cmd_train(args, out):
    from taskverify.training import train

    samples = [s for s in read_samples(args.data) if s.split == args.split]
    if not samples:
        raise errors.EmptyDataset(f"no samples in split {args.split!r}")
    d = samples[0].trace.frames.shape[1]
    init = ParametricScorer.initialized(d, seed=args.seed, scale=args.init_scale)
    res = train(samples, init, lr=args.lr, epochs=args.epochs, batch=args.batch, seed=args.seed,
                k=args.window_k, cap=args.extension_cap, scheme=args.scheme)
    res.scorer.save(args.out)
    if args.loss_out:
        Path(args.loss_out).write_text(json.dumps({"epoch_loss": res.epoch_loss, "skipped": res.skipped}) + "\n")
    print(f"trained on {len(samples) - len(res.skipped)} samples for {args.epochs} epochs; "
          f"final loss {res.epoch_loss[-1]:.6f}", file=out)
    print(f"checkpoint: {args.out}", file=out)
    return EXIT_OK


def cmd_verify(args, out):
    if args.graph:
        g = _read_graph(args.graph, args.strict_vocab)
    else:
        g = parse_description(args.description, strict=args.strict_vocab)
    g = g.to_scheme(args.scheme)
    trace = _read_trace(args.trace)
    scorer = _make_scorer(args)
    segtrace = segment(trace, args.window_k)
    v = verify(g, segtrace, scorer, threshold=args.threshold, cap=args.extension_cap)
    scores = scorer.log_score_matrix(g.nodes, segtrace)
    csv_path = Path(args.alignment_csv) if args.alignment_csv else Path(args.trace).with_suffix(".alignment.csv")
    csv_path.write_text(v.to_csv(scores), encoding="utf-8")
    print(f"probability: {v.probability:.6f}", file=out)
    print(f"threshold: {v.threshold:.6f}", file=out)
    print(f"label: {'verified' if v.label else 'not verified'}", file=out)
    print("best extension: " + " ".join(str(i) for i in v.best_extension), file=out)
    print("alignment: " + " ".join(f"{j}->{t}" for j, t in sorted(v.query_segments.items())), file=out)
    if v.truncated:
        print(f"note: extensions truncated at {args.extension_cap}", file=out)
    print(f"alignment csv: {csv_path}", file=out)
    return EXIT_OK if v.label else EXIT_NOT_VERIFIED


def cmd_evaluate(args, out):
    from taskverify.evaluation import evaluate, sweep_window, write_report

    samples = read_samples(args.data)
    if args.splits:
        samples = [s for s in samples if s.split in set(args.splits)]
    scorer = _make_scorer(args)
    report = evaluate(samples, scorer, threshold=args.threshold, k=args.window_k, cap=args.extension_cap,
                      scheme=args.scheme, parse=args.parse, detection=args.detection)
    paths = write_report(report, args.out)
    for name, c in report.per_split.items():
        print(f"{name}: accuracy {c.accuracy:.4f} f1 {c.f1:.4f} support {c.support}", file=out)
    print(f"overall: accuracy {report.overall.accuracy:.4f} f1 {report.overall.f1:.4f} "
          f"support {report.overall.support}", file=out)
    if args.sweep:
        sw = sweep_window(samples, scorer, args.sweep, threshold=args.threshold, cap=args.extension_cap,
                          scheme=args.scheme, parse=args.parse)
        p = Path(args.out) / "sweep.csv"
        p.write_text(sw.to_csv(), encoding="utf-8")
        paths.append(p)
        for k, rep in sw.reports.items():
            print(f"k={k}: accuracy {rep.overall.accuracy:.4f} f1 {rep.overall.f1:.4f} "
                  f"too few segments {len(rep.too_few_segments)}", file=out)
    for p in paths:
        print(f"wrote {p}", file=out)
    return EXIT_OK


def cmd_parse(args, out):
    g = parse_description(args.text, strict=args.strict_vocab, scheme=args.scheme)
    out.write(graph_to_dot(g))
    return EXIT_OK


def cmd_align(args, out):
    al = align_dp(_read_score_csv(args.scores))
    print("pairs: " + " ".join(f"({j},{t})" for j, t in enumerate(al.assignment)), file=out)
    print(f"score: {al.score!r}", file=out)
    return EXIT_OK


def cmd_ged(args, out):
    g1 = _read_graph(args.graph1, args.strict_vocab)
    g2 = _read_graph(args.graph2, args.strict_vocab)
    print(ged(g1, g2), file=out)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "verify": cmd_verify,
    "evaluate": cmd_evaluate,
    "parse": cmd_parse,
    "align": cmd_align,
    "ged": cmd_ged,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:  # --help
            return EXIT_OK if e.code == 0 else EXIT_ERROR
        return COMMANDS[args.command](args, out)
    except OSError as e:
        print(f"error: {type(e).__name__}: {e.filename}: {e.strerror}", file=err)
        return EXIT_ERROR
    except (errors.TaskVerifyError, ValueError, json.JSONDecodeError, KeyError) as e:
        reason = " ".join(str(e).split())
        print(f"error: {type(e).__name__}: {reason}", file=err)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
