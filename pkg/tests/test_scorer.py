import json

import numpy as np
import pytest

from taskverify.aligner import Event, Segment, Trace, segment
from taskverify.dsl import parse_query
from taskverify.errors import (
    CheckpointMismatch,
    DimensionMismatch,
    MissingAnnotations,
    UnknownVocabulary,
    ValidationError,
)
from taskverify.scorer import OracleScorer, ParametricScorer, QueryEncoder, oracle_score, parametric_score


def _seg(events, index=0, trace_id="t"):
    tr = Trace(np.zeros((20, 4)), events, trace_id)
    return segment(tr, 20).segments[index]


HOT = parse_query("StateQuery(apple,hot)")


def test_oracle_examples():
    cfg = OracleScorer()
    assert oracle_score(cfg, HOT, _seg([Event(0, 10, "heat", "apple")])) == 0.99
    assert oracle_score(cfg, HOT, _seg([Event(0, 10, "clean", "apple")])) == 0.01
    place = parse_query("RelationQuery(apple,plate,in)")
    assert cfg.score(place, _seg([Event(0, 10, "place", "apple", "plate")])) == 0.99
    assert cfg.score(place, _seg([Event(0, 10, "place", "apple", "bowl")])) == 0.01
    assert cfg.score(parse_query("ActionQuery(heat,apple)"), _seg([Event(0, 10, "heat", "apple")])) == 0.99


def test_oracle_needs_annotations():
    seg = Segment(0, 0, 20, np.zeros((20, 4)), None, "t")
    with pytest.raises(MissingAnnotations):
        OracleScorer().score(HOT, seg)


def test_oracle_config_validation():
    with pytest.raises(ValidationError):
        OracleScorer(true_prob=0.2, false_prob=0.4)
    with pytest.raises(ValidationError):
        OracleScorer(noise=0.5)


def test_oracle_noise_reproducible_and_near_rate():
    segs = [_seg([Event(0, 10, "heat", "apple")], trace_id=f"t{i}") for i in range(4000)]
    a = [OracleScorer(noise=0.1, seed=5).score(HOT, s) for s in segs]
    b = [OracleScorer(noise=0.1, seed=5).score(HOT, s) for s in segs]
    c = [OracleScorer(noise=0.1, seed=6).score(HOT, s) for s in segs]
    assert a == b and a != c
    rate = np.mean([x == 0.01 for x in a])
    assert abs(rate - 0.1) < 0.015


def test_zero_params_score_half():
    sc = ParametricScorer(8)
    rng = np.random.default_rng(0)
    for q in ("StateQuery(egg,cold)", "RelationQuery(apple,shelf,on)", "ActionQuery(place,cup,cabinet)"):
        assert parametric_score(sc, parse_query(q), rng.normal(size=8)) == 0.5


def test_parametric_errors():
    sc = ParametricScorer(8)
    with pytest.raises(DimensionMismatch):
        sc.score(HOT, np.zeros(9))
    with pytest.raises(UnknownVocabulary):
        sc.score(parse_query("StateQuery(pineapple,hot)", strict=False), np.zeros(8))
    with pytest.raises(DimensionMismatch):
        ParametricScorer(8, params={"State/W": np.zeros((2, 2))})


def test_scores_clamped():
    sc = ParametricScorer(4)
    sc.params["State/b"][:] = 1e4
    assert parametric_score(sc, HOT, np.zeros(4)) == pytest.approx(1 - 1e-8)
    sc.params["State/b"][:] = -1e4
    assert parametric_score(sc, HOT, np.zeros(4)) == pytest.approx(1e-8)


def test_logit_gradient_matches_finite_differences():
    """d logit / d W for the rows the query selects."""
    rng = np.random.default_rng(1)
    sc = ParametricScorer.initialized(6, seed=2, scale=0.3)
    q = parse_query("RelationQuery(apple,plate,in)")
    f = rng.normal(size=6)
    idx = sc.encoder.indices(q)
    h = 1e-5
    W = sc.params["Relation/W"]
    for r in idx:
        for c in range(6):
            old = W[r, c]
            W[r, c] = old + h
            up = float(sc.logits(q, f))
            W[r, c] = old - h
            down = float(sc.logits(q, f))
            W[r, c] = old
            fd = (up - down) / (2 * h)
            assert abs(fd - f[c]) <= 1e-4 * max(abs(f[c]), 1e-8)


def test_per_type_isolation():
    sc = ParametricScorer.initialized(8, seed=0, scale=0.5)
    f = np.random.default_rng(0).normal(size=8)
    rel = parse_query("RelationQuery(apple,plate,in)")
    act = parse_query("ActionQuery(heat,apple)")
    before = (sc.score(rel, f), sc.score(act, f))
    for k in sc.params:
        if k.startswith("State/"):
            sc.params[k] += 3.0
    assert (sc.score(rel, f), sc.score(act, f)) == before


def test_checkpoint_round_trip_and_rejection(tmp_path):
    sc = ParametricScorer.initialized(8, seed=4)
    p = tmp_path / "ck.json"
    sc.save(p)
    back = ParametricScorer.load(p)
    assert all(np.array_equal(sc.params[k], back.params[k]) for k in sc.params)
    with pytest.raises(CheckpointMismatch):
        ParametricScorer.load(p, d=16)
    small = QueryEncoder({qt: tuple(slot[:2] for slot in slots) for qt, slots in QueryEncoder().slots.items()})
    with pytest.raises(CheckpointMismatch):
        ParametricScorer.load(p, encoder=small)
    doc = json.loads(p.read_text())
    doc["vocab_hash"] = "0" * 16
    p.write_text(json.dumps(doc))
    with pytest.raises(CheckpointMismatch):
        ParametricScorer.load(p)
    assert json.loads(json.dumps(doc))["shapes"]["State/W"][1] == 8
