"""Metrics: accuracy/F1 per split and difficulty bucket, query-detection
reports, and window-size sweeps.

Samples whose graph has more nodes than their trace has segments cannot be
aligned; they are counted as negative predictions rather than dropped, so
reports for different window sizes cover the same samples.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from taskverify import vocab
from taskverify.aligner import DEFAULT_K, DEFAULT_THRESHOLD, segment, verify
from taskverify.datagen import difficulty_of
from taskverify.dsl import query_subtask
from taskverify.errors import EmptyDataset, TooFewSegments
from taskverify.graph import DEFAULT_CAP
from taskverify.scorer import query_truth
from taskverify.semparse import parse_description

FOOTER = "samples with fewer segments than queries are counted as negative predictions"


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def add(self, label: bool, pred: bool) -> None:
        if pred and label:
            self.tp += 1
        elif pred:
            self.fp += 1
        elif label:
            self.fn += 1
        else:
            self.tn += 1

    @property
    def support(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.support if self.support else 0.0

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "support": self.support,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
        }


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    split: str
    label: bool
    pred: bool
    probability: Optional[float]  # None when the sample could not be aligned
    complexity: int
    ordering: int


@dataclass
class MetricsReport:
    overall: Counts
    per_split: dict
    per_complexity: dict
    per_ordering: dict
    predictions: list
    config: dict = field(default_factory=dict)
    detection: Optional["DetectionReport"] = None

    @property
    def too_few_segments(self) -> list:
        return [p.sample_id for p in self.predictions if p.probability is None]

    def to_json(self) -> dict:
        out = {
            "config": self.config,
            "overall": self.overall.to_json(),
            "per_split": {k: v.to_json() for k, v in self.per_split.items()},
            "per_complexity": {str(k): v.to_json() for k, v in self.per_complexity.items()},
            "per_ordering": {str(k): v.to_json() for k, v in self.per_ordering.items()},
            "too_few_segments": self.too_few_segments,
            "note": FOOTER,
        }
        if self.detection is not None:
            out["detection"] = self.detection.to_json()
        return out

    def rows(self):
        yield "overall", "all", self.overall
        for group, table in (("split", self.per_split), ("complexity", self.per_complexity),
                             ("ordering", self.per_ordering)):
            for key, c in table.items():
                yield group, key, c

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "key", "accuracy", "f1", "precision", "recall", "support"])
        for group, key, c in self.rows():
            w.writerow([group, key, repr(c.accuracy), repr(c.f1), repr(c.precision), repr(c.recall), c.support])
        buf.write(f"# {FOOTER}: {len(self.too_few_segments)}\n")
        return buf.getvalue()


def _bucket(preds, key) -> dict:
    out = {}
    for p in preds:
        out.setdefault(key(p), Counts()).add(p.label, p.pred)
    return dict(sorted(out.items()))


def summarize(preds, config: Optional[dict] = None) -> MetricsReport:
    """Aggregate predictions; the result does not depend on their order."""
    overall = Counts()
    for p in preds:
        overall.add(p.label, p.pred)
    return MetricsReport(
        overall=overall,
        per_split=_bucket(preds, lambda p: p.split),
        per_complexity=_bucket(preds, lambda p: p.complexity),
        per_ordering=_bucket(preds, lambda p: p.ordering),
        predictions=sorted(preds, key=lambda p: p.sample_id),
        config=dict(config or {}),
    )


def sample_graph(sample, scheme: str = "state_relation", parse: bool = False):
    g = parse_description(sample.description) if parse else sample.graph
    return g.to_scheme(scheme)


def predict(sample, scorer, threshold: float = DEFAULT_THRESHOLD, k: int = DEFAULT_K, cap: int = DEFAULT_CAP,
            scheme: str = "state_relation", parse: bool = False):
    """Returns ``(Prediction, Verdict or None)``."""
    g = sample_graph(sample, scheme, parse)
    d = difficulty_of(g)
    try:
        v = verify(g, sample.trace, scorer, threshold=threshold, cap=cap, k=k)
    except TooFewSegments:
        return Prediction(sample.id, sample.split, bool(sample.label), False, None, d.complexity, d.ordering), None
    pred = Prediction(sample.id, sample.split, bool(sample.label), v.label, v.probability, d.complexity, d.ordering)
    return pred, v


def evaluate(
    samples,
    scorer,
    threshold: float = DEFAULT_THRESHOLD,
    k: int = DEFAULT_K,
    cap: int = DEFAULT_CAP,
    scheme: str = "state_relation",
    parse: bool = False,
    detection: bool = False,
) -> MetricsReport:
    """Verify every sample and aggregate the decisions.

    With ``parse`` the graph is rebuilt from the description instead of
    taken from the sample. With ``detection`` the report also carries the
    per-sub-task detection counts of the aligned (query, segment) pairs.
    """
    samples = list(samples)
    if not samples:
        raise EmptyDataset("nothing to evaluate")
    preds, verdicts = [], []
    for s in samples:
        p, v = predict(s, scorer, threshold, k, cap, scheme, parse)
        preds.append(p)
        verdicts.append(v)
    config = {"threshold": threshold, "k": k, "extension_cap": cap, "scheme": scheme, "parse": parse,
              "scorer": _describe(scorer)}
    report = summarize(preds, config)
    if detection:
        det = DetectionReport()
        for s, v in zip(samples, verdicts):
            if v is not None:
                _add_detection(det, sample_graph(s, scheme, parse), segment(s.trace, k), v, scorer, 0.5)
        report.detection = det
    return report


def _describe(scorer) -> str:
    return type(scorer).__name__ if not hasattr(scorer, "noise") else f"{type(scorer).__name__}(noise={scorer.noise})"


# query detection

CLASSES = ("heat", "clean", "slice", "cool", "place", "pick")
assert set(CLASSES) == set(vocab.ACTIONS)


@dataclass
class DetectionReport:
    per_class: dict = field(default_factory=lambda: {c: Counts() for c in CLASSES})

    @property
    def n_pairs(self) -> int:
        return sum(c.support for c in self.per_class.values())

    def to_json(self) -> dict:
        return {c: self.per_class[c].to_json() for c in CLASSES}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "tp", "fp", "fn", "tn", "precision", "recall", "support"])
        for c in CLASSES:
            n = self.per_class[c]
            w.writerow([c, n.tp, n.fp, n.fn, n.tn, repr(n.precision), repr(n.recall), n.support])
        return buf.getvalue()


def _add_detection(det, g, segtrace, verdict, scorer, threshold):
    for node, t in zip(verdict.best_extension, verdict.best_alignment.assignment):
        q = g.nodes[node]
        seg = segtrace.segments[t]
        truth = query_truth(q, seg)
        det.per_class[query_subtask(q).action].add(truth, scorer.score(q, seg) >= threshold)


def detection_report(
    samples,
    scorer,
    threshold: float = 0.5,
    k: int = DEFAULT_K,
    cap: int = DEFAULT_CAP,
    scheme: str = "state_relation",
    align_scorer=None,
) -> DetectionReport:
    """Compare scorer decisions with annotations on aligned (query, segment) pairs.

    Pairs come from the best alignment of each sample. By default the
    alignment is chosen by ``scorer`` itself; ``align_scorer`` fixes it with a
    reference scorer instead, which keeps the pair selection independent of
    the scorer being measured.
    """
    det = DetectionReport()
    chooser = align_scorer or scorer
    for s in samples:
        g = s.graph.to_scheme(scheme)
        segtrace = segment(s.trace, k)
        try:
            v = verify(g, segtrace, chooser, cap=cap)
        except TooFewSegments:
            continue
        _add_detection(det, g, segtrace, v, scorer, threshold)
    return det


# window sweeps

@dataclass
class SweepResult:
    reports: dict  # k -> MetricsReport

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "group", "key", "accuracy", "f1", "precision", "recall", "support", "too_few_segments"])
        for k, rep in self.reports.items():
            n_short = len(rep.too_few_segments)
            for group, key, c in rep.rows():
                w.writerow([k, group, key, repr(c.accuracy), repr(c.f1), repr(c.precision), repr(c.recall),
                            c.support, n_short])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {str(k): rep.to_json() for k, rep in self.reports.items()}


def sweep_window(samples, scorer, ks, threshold: float = DEFAULT_THRESHOLD, cap: int = DEFAULT_CAP,
                 scheme: str = "state_relation", parse: bool = False) -> SweepResult:
    samples = list(samples)
    return SweepResult({int(k): evaluate(samples, scorer, threshold, int(k), cap, scheme, parse) for k in ks})


def write_report(report: MetricsReport, out_dir, stem: str = "metrics") -> list:
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / f"{stem}.json", out_dir / f"{stem}.csv"]
    paths[0].write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths[1].write_text(report.to_csv(), encoding="utf-8")
    if report.detection is not None:
        p = out_dir / f"{stem}_confusion.csv"
        p.write_text(report.detection.to_csv(), encoding="utf-8")
        paths.append(p)
    return paths
