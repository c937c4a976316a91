import json
from collections import Counter

import numpy as np
import pytest

from taskverify import vocab
from taskverify.aligner import DEFAULT_THRESHOLD, verify
from taskverify.datagen import (
    NEGATIVE_KINDS,
    DatasetConfig,
    TaskSpec,
    build_dataset,
    difficulty_of,
    enumerate_compositions,
    execute_plan,
    make_negative,
    make_positive,
    oracle_label,
    plan_splits,
    read_samples,
    write_dataset,
)
from taskverify.dsl import SubTask
from taskverify.errors import CannotFalsify, IncompatibleActionObject, InfeasibleSplit, ValidationError
from taskverify.scorer import OracleScorer
from taskverify.semparse import parse_description


def spec(*groups, obj="apple"):
    return TaskSpec(tuple(tuple(SubTask(a, obj, "plate" if a == "place" else None) for a in g) for g in groups))


def test_taskspec_rules():
    s = spec(["heat"], ["clean"])
    assert s.name == "heat_then_clean(apple)"
    assert s.difficulty.complexity == 2 and s.difficulty.ordering == 1
    assert spec(["clean", "cool"]).name == "clean_and_cool(apple)"
    with pytest.raises(IncompatibleActionObject):
        spec(["heat"], obj="book")
    with pytest.raises(ValidationError):
        spec(["place"], ["pick"])
    with pytest.raises(ValidationError):
        spec(["heat"], ["heat"])
    with pytest.raises(ValidationError):
        TaskSpec(((SubTask("heat", "apple"), SubTask("clean", "egg")),))


def test_compositions_respect_limits():
    comps = enumerate_compositions()
    assert len(comps) == len(set(comps))
    for c in comps:
        sizes = [len(g) for g in c]
        assert 1 <= sum(sizes) <= 6 and max(sizes) <= 3
        assert sum(a * b for a, b in zip(sizes, sizes[1:])) <= 5


def test_execute_plan_heat_then_clean():
    tr = execute_plan(spec(["heat"], ["clean"]), 0, trace_id="x")
    assert [e.action for e in sorted(tr.events, key=lambda e: e.start)] == ["heat", "clean"]
    single = execute_plan(spec(["slice"]), 1)
    assert len(single.events) == 1 and 10 <= len(single) <= 18


def test_execute_plan_block_lengths_and_channels():
    tr = execute_plan(spec(["heat", "clean"], ["pick"], ["place"]), 3)
    for e in tr.events:
        assert 10 <= e.end - e.start <= 18
    evs = sorted(tr.events, key=lambda e: e.start)
    for a, b in zip(evs, evs[1:]):
        assert 40 <= b.start - a.end <= 48


def test_diamond_extensions_sampled_uniformly():
    s = spec(["heat"], ["clean", "slice"], ["place"])
    first = Counter()
    for seed in range(1000):
        tr = execute_plan(s, seed)
        order = [e.action for e in sorted(tr.events, key=lambda e: e.start)]
        first[order[1]] += 1
    assert abs(first["clean"] / 1000 - 0.5) <= 0.05


def test_substitution_example():
    pos = make_positive(spec(["heat"], ["clean"]), np.random.default_rng(0), "train", "p", style="then")
    assert oracle_label(pos.graph, pos.trace)
    neg = make_negative(pos, "substituted", np.random.default_rng(1))
    assert neg.label is False and neg.trace is pos.trace
    assert not verify(neg.graph, neg.trace, OracleScorer()).label
    actions = [q.args[1] for q in parse_description(neg.description).nodes if q.qtype.value == "State"]
    assert "apple" in neg.description and actions != ["hot", "clean"]


@pytest.mark.parametrize("kind", NEGATIVE_KINDS)
def test_every_negative_kind_fails_the_oracle(kind):
    pos = make_positive(spec(["heat"], ["clean"], ["slice"]), np.random.default_rng(2), "train", "p")
    neg = make_negative(pos, kind, np.random.default_rng(3))
    assert neg.negative_kind == kind
    v = verify(neg.graph, neg.trace, OracleScorer())
    assert v.probability < DEFAULT_THRESHOLD and not v.label
    assert neg.graph.nodes[0].args[0] == "apple"  # target object kept
    assert parse_description(neg.description) == neg.graph


def test_reordered_inverts_then():
    pos = make_positive(spec(["heat"], ["clean"]), np.random.default_rng(0), "train", "p", style="then")
    neg = make_negative(pos, "reordered", np.random.default_rng(0))
    assert [q.args[1] for q in neg.graph.nodes] == ["clean", "hot"]


def test_cannot_falsify():
    pos = make_positive(spec(["heat", "clean"]), np.random.default_rng(0), "train", "p")
    with pytest.raises(CannotFalsify):
        make_negative(pos, "reordered", np.random.default_rng(0))
    with pytest.raises(CannotFalsify):
        make_negative(pos, "trace_shuffled", np.random.default_rng(0))
    full = spec(["heat", "clean", "cool"], ["slice", "pick"], ["place"])
    pos = make_positive(full, np.random.default_rng(0), "train", "p")
    with pytest.raises(CannotFalsify):
        make_negative(pos, "substituted", np.random.default_rng(0))


def test_dataset_soundness_and_bookkeeping(small_dataset):
    for s in small_dataset.samples:
        assert oracle_label(s.graph, s.trace) == s.label
        assert s.difficulty == difficulty_of(s.graph)
        assert parse_description(s.description) == s.graph
        assert s.graph.nodes[0].args[0] in vocab.OBJECTS


def test_balance_and_kinds(small_dataset):
    for name, st in small_dataset.stats()["splits"].items():
        assert st["positive"] == st["negative"] or abs(st["positive"] - st["negative"]) == 1
    kinds = {s.negative_kind for s in small_dataset.samples if not s.label}
    assert kinds == set(NEGATIVE_KINDS)


def test_split_disjointness(small_dataset):
    ds = small_dataset
    train_comps = {s.task.split("(")[0] for s in ds.split("train") if s.label}
    novel = {s.task.split("(")[0] for s in ds.split("novel_tasks") if s.label}
    assert novel and not novel & train_comps

    def pairs(samples):
        return {(q.args[1], q.args[0]) for s in samples for q in s.graph.to_scheme("action").nodes}

    train_pairs = {(o, a) for a, o in pairs(ds.split("train"))}
    held = ds.plan.heldout_pairs
    assert not held & {(a, o) for o, a in train_pairs}
    for s in ds.split("novel_steps"):
        if s.label:
            sp = {(q.args[0], q.args[1]) for q in s.graph.to_scheme("action").nodes}
            assert sp & held


def test_abstraction_split_uses_abstract_templates(small_dataset):
    for s in small_dataset.split("abstraction"):
        assert s.abstract
        for word in ("microwave", "fridge", "sinkbasin", "knife"):
            assert word not in s.description


def test_default_difficulty_mix_mean_subtasks():
    ds = build_dataset(DatasetConfig(sizes={"train": 200}, seed=1))
    assert abs(ds.stats()["mean_subtasks"] - 4.6) <= 1.0


def test_byte_identical_files(tmp_path):
    cfg = DatasetConfig(sizes={"train": 10, "novel_tasks": 4}, seed=9)
    a = write_dataset(build_dataset(cfg), tmp_path / "a")
    b = write_dataset(build_dataset(cfg), tmp_path / "b")
    assert a[0].read_bytes() == b[0].read_bytes()
    assert a[1].read_bytes() == b[1].read_bytes()
    samples = read_samples(a[0])
    assert [s.id for s in samples] == [f"train-{i:05d}" for i in range(10)] + [f"novel_tasks-{i:05d}" for i in range(4)]
    first = json.loads(a[0].read_text().splitlines()[0])
    assert list(first) == ["id", "split", "label", "negative_kind", "task", "description", "style", "abstract",
                           "graph", "difficulty", "trace"]
    assert set(first["trace"]) == {"frames", "events"}


def test_generation_is_per_sample_independent():
    big = build_dataset(DatasetConfig(sizes={"train": 12}, seed=2))
    small = build_dataset(DatasetConfig(sizes={"train": 5}, seed=2))
    assert [s.description for s in small.samples] == [s.description for s in big.samples[:5]]


def test_infeasible_holdout():
    with pytest.raises(InfeasibleSplit):
        plan_splits(DatasetConfig(sizes={"train": 5, "novel_steps": 5}, holdout_pairs=1000))
