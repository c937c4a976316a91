import csv
import io
import json
import random

import pytest

from taskverify.datagen import DatasetConfig, build_dataset
from taskverify.errors import EmptyDataset
from taskverify.evaluation import (
    CLASSES,
    Counts,
    detection_report,
    evaluate,
    summarize,
    sweep_window,
    write_report,
)
from taskverify.scorer import ConstantScorer, OracleScorer


def test_counts_edge_cases():
    c = Counts()
    assert c.f1 == 0.0 and c.accuracy == 0.0
    c.add(True, False)
    assert c.precision == 0.0 and c.recall == 0.0 and c.f1 == 0.0
    c.add(True, True)
    c.add(False, True)
    c.add(False, False)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 1, 1)
    assert c.f1 == pytest.approx(0.5) and c.accuracy == 0.5


def test_oracle_is_perfect_everywhere(small_dataset):
    rep = evaluate(small_dataset.samples, OracleScorer())
    assert rep.overall.accuracy == 1.0 and rep.overall.f1 == 1.0
    for c in rep.per_split.values():
        assert c.accuracy == 1.0
    assert rep.too_few_segments == []


def test_parsed_graphs_give_the_same_report(small_dataset):
    a = evaluate(small_dataset.samples, OracleScorer())
    b = evaluate(small_dataset.samples, OracleScorer(), parse=True)
    assert a.overall == b.overall


def test_constant_half_predicts_everything_positive(small_dataset):
    rep = evaluate(small_dataset.samples, ConstantScorer(0.5))
    assert rep.overall.fn == 0 and rep.overall.tn == 0
    pos = sum(s.label for s in small_dataset.samples)
    assert rep.overall.f1 == pytest.approx(2 * pos / (pos + len(small_dataset.samples)))


def test_flip_noise_degrades():
    ds = build_dataset(DatasetConfig(sizes={"train": 300}, seed=5))
    clean = evaluate(ds.samples, OracleScorer()).overall.accuracy
    noisy = evaluate(ds.samples, OracleScorer(noise=0.1)).overall
    assert 0.5 < noisy.accuracy < clean
    rep = evaluate(ds.samples, OracleScorer(noise=0.1))
    low = rep.per_complexity[min(rep.per_complexity)].accuracy
    high = rep.per_complexity[max(rep.per_complexity)].accuracy
    assert low >= high


def test_report_is_order_invariant_and_partitions(small_dataset):
    samples = list(small_dataset.samples)
    a = evaluate(samples, OracleScorer(noise=0.2, seed=1))
    random.Random(0).shuffle(samples)
    b = evaluate(samples, OracleScorer(noise=0.2, seed=1))
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()
    for table in (a.per_split, a.per_complexity, a.per_ordering):
        assert sum(c.support for c in table.values()) == a.overall.support == len(samples)


def test_summarize_of_permuted_predictions(small_dataset):
    rep = evaluate(small_dataset.samples, OracleScorer(noise=0.2))
    preds = list(rep.predictions)
    again = summarize(preds[::-1], rep.config)
    assert again.to_json() == rep.to_json()


def test_short_traces_count_as_negative(small_dataset):
    rep = evaluate(small_dataset.samples, OracleScorer(), k=400)
    assert rep.too_few_segments
    short = {p.sample_id for p in rep.predictions if p.probability is None}
    assert all(not p.pred for p in rep.predictions if p.sample_id in short)
    assert rep.overall.support == len(small_dataset.samples)
    assert "fewer segments" in rep.to_csv().splitlines()[-1]


def test_sweep_matches_evaluate(small_dataset):
    sw = sweep_window(small_dataset.samples, OracleScorer(noise=0.1), [20])
    assert sw.reports[20].to_json() == evaluate(small_dataset.samples, OracleScorer(noise=0.1), k=20).to_json()
    rows = list(csv.reader(io.StringIO(sw.to_csv())))
    assert rows[0][0] == "k" and rows[1][0] == "20"


def test_detection_report_oracle(small_dataset):
    det = detection_report(small_dataset.samples, OracleScorer())
    for c in CLASSES:
        n = det.per_class[c]
        assert n.fp == 0 and n.fn == 0
    assert det.n_pairs > 0
    assert [r.split(",")[0] for r in det.to_csv().splitlines()] == ["class", *CLASSES]


def test_detection_recall_under_flip_noise():
    ds = build_dataset(DatasetConfig(sizes={"train": 2800}, seed=11))
    positives = [s for s in ds.samples if s.label]
    det = detection_report(positives, OracleScorer(noise=0.1, seed=4), align_scorer=OracleScorer())
    for c in CLASSES:
        n = det.per_class[c]
        assert n.support >= 500, (c, n.support)
        assert abs(n.recall - 0.9) <= 0.03, (c, n.recall)


def test_write_report(tmp_path, small_dataset):
    rep = evaluate(small_dataset.samples, OracleScorer(), detection=True)
    paths = write_report(rep, tmp_path)
    assert [p.name for p in paths] == ["metrics.json", "metrics.csv", "metrics_confusion.csv"]
    doc = json.loads(paths[0].read_text())
    assert doc["overall"]["f1"] == 1.0 and "detection" in doc


def test_empty():
    with pytest.raises(EmptyDataset):
        evaluate([], OracleScorer())
