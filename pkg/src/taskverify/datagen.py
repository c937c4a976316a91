"""Synthetic task-verification data: tasks, executed traces, descriptions and
labelled splits.

A task is an ordered list of groups of sub-tasks on one target object; every
sub-task of a group precedes every sub-task of the next group. A trace
executes one uniformly chosen linear extension of the task graph: each
sub-task is a block of 10-18 frames and consecutive blocks are separated by
navigation frames. Frame features are a one-hot action channel, object and
receptacle channels, and Gaussian noise.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from taskverify import vocab
from taskverify.aligner import DEFAULT_K, Event, Trace, verify
from taskverify.dsl import SubTask, TaskGraph, parse_dot, graph_to_dot
from taskverify.errors import (
    CannotFalsify,
    IncompatibleActionObject,
    InfeasibleSplit,
    TooFewSegments,
    ValidationError,
)
from taskverify.graph import count_extensions, linear_extensions
from taskverify.scorer import OracleScorer
from taskverify.semparse.grammar import groups_to_graph, parse_groups, render_description

SPLITS = ("train", "val", "novel_tasks", "novel_steps", "abstraction")
NEGATIVE_KINDS = ("reordered", "substituted", "trace_shuffled", "trace_dropped")

_ACTION_RANK = {a: i for i, a in enumerate(vocab.ACTIONS)}


@dataclass(frozen=True)
class TaskSpec:
    groups: tuple  # tuple of tuples of SubTask, in temporal order

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if not groups or not all(groups):
            raise ValidationError("a task needs at least one non-empty group")
        objs = {st.object for g in groups for st in g}
        if len(objs) != 1:
            raise ValidationError("a task has exactly one target object")
        obj = next(iter(objs))
        if obj not in vocab.OBJECT_ACTIONS:
            raise ValidationError(f"unknown object {obj!r}")
        for st in self.sub_tasks:
            if st.action not in vocab.ACTIONS:
                raise ValidationError(f"unknown action {st.action!r}")
            if st.action not in vocab.OBJECT_ACTIONS[obj]:
                raise IncompatibleActionObject(f"{st.action}({obj}) is not afforded")
            if (st.action == "place") != (st.receptacle is not None):
                raise ValidationError(f"{st}: only place takes a receptacle")
            if st.receptacle is not None and (st.receptacle not in vocab.RECEPTACLES or st.receptacle == obj):
                raise ValidationError(f"{st}: bad receptacle")
        actions = [st.action for st in self.sub_tasks]
        if len(set(actions)) != len(actions):
            raise ValidationError("repeated sub-task action")
        level = {st.action: i for i, g in enumerate(groups) for st in g}
        if "pick" in level and "place" in level and level["pick"] >= level["place"]:
            raise ValidationError("pick must precede place")

    @property
    def object(self) -> str:
        return self.groups[0][0].object

    @property
    def sub_tasks(self) -> tuple:
        return tuple(st for g in self.groups for st in g)

    @property
    def edges(self) -> tuple:
        return self.graph().edges

    @property
    def composition(self) -> tuple:
        return tuple(tuple(st.action for st in g) for g in self.groups)

    @property
    def name(self) -> str:
        return composition_name(self.composition) + f"({self.object})"

    @property
    def difficulty(self) -> "Difficulty":
        return Difficulty(len(self.sub_tasks), len(self.edges))

    def graph(self, scheme: str = "state_relation") -> TaskGraph:
        return groups_to_graph(self.groups, scheme)


@dataclass(frozen=True)
class Difficulty:
    complexity: int
    ordering: int


def composition_name(comp) -> str:
    return "_then_".join("_and_".join(g) for g in comp)


def difficulty_of(g: TaskGraph) -> Difficulty:
    return Difficulty(g.n_nodes, len(g.edges))


def enumerate_compositions(max_complexity: int = 6, max_group: int = 3, max_ordering: int = 5) -> list:
    """All ordered groupings of distinct actions allowed as tasks."""
    out = []
    for n in range(1, max_complexity + 1):
        for subset in itertools.combinations(vocab.ACTIONS, n):
            for comp in _ordered_partitions(sorted(subset, key=_ACTION_RANK.get), max_group):
                sizes = [len(g) for g in comp]
                if sum(a * b for a, b in zip(sizes, sizes[1:])) > max_ordering:
                    continue
                level = {a: i for i, g in enumerate(comp) for a in g}
                if "pick" in level and "place" in level and level["pick"] >= level["place"]:
                    continue
                out.append(comp)
    return sorted(set(out), key=lambda c: (sum(map(len, c)), c))


def _ordered_partitions(items, max_group):
    if not items:
        yield ()
        return
    for k in range(1, min(max_group, len(items)) + 1):
        for first in itertools.combinations(items, k):
            rest = [a for a in items if a not in first]
            for tail in _ordered_partitions(rest, max_group):
                yield (tuple(first),) + tail


class FeatureLayout:
    """Channel indices inside a d-dimensional frame vector."""

    def __init__(self, d: int = 64):
        self.d = d
        self.action = {a: i for i, a in enumerate(vocab.ACTIONS)}
        self.nav = len(vocab.ACTIONS)
        base = self.nav + 1
        self.object = {o: base + i for i, o in enumerate(vocab.OBJECTS)}
        base += len(vocab.OBJECTS)
        self.receptacle = {r: base + i for i, r in enumerate(vocab.RECEPTACLES)}
        self.used = base + len(vocab.RECEPTACLES)
        if d < self.used:
            raise ValidationError(f"feature dimension must be at least {self.used}, got {d}")

    def subtask_frame(self, st: SubTask) -> np.ndarray:
        x = np.zeros(self.d)
        x[self.action[st.action]] = 1.0
        x[self.object[st.object]] = 1.0
        if st.receptacle is not None:
            x[self.receptacle[st.receptacle]] = 1.0
        return x

    def nav_frame(self) -> np.ndarray:
        x = np.zeros(self.d)
        x[self.nav] = 1.0
        return x


@dataclass(frozen=True)
class TraceConfig:
    d: int = 64
    duration: tuple = (10, 18)  # frames per sub-task, inclusive
    nav: Optional[tuple] = (40, 48)  # navigation frames between sub-tasks; None disables
    noise: float = 0.1


def _block_trace(blocks, gaps, layout: FeatureLayout, noise: float, rng, trace_id: str = "") -> Trace:
    """Assemble a trace from (subtask, length) blocks and navigation gap lengths.

    ``gaps`` has one entry per boundary between consecutive blocks.
    """
    rows, events = [], []
    t = 0
    for i, (st, length) in enumerate(blocks):
        if i and gaps[i - 1]:
            rows.append(np.tile(layout.nav_frame(), (gaps[i - 1], 1)))
            t += gaps[i - 1]
        rows.append(np.tile(layout.subtask_frame(st), (length, 1)))
        events.append(Event(t, t + length, st.action, st.object, st.receptacle))
        t += length
    clean = np.vstack(rows)
    return Trace(clean + rng.normal(0.0, noise, clean.shape), events, trace_id)


def execute_plan(spec: TaskSpec, rng, cfg: TraceConfig = TraceConfig(), trace_id: str = "") -> Trace:
    """Execute a uniformly random linear extension of ``spec`` as a trace."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    layout = FeatureLayout(cfg.d)
    subtasks = spec.sub_tasks
    exts = linear_extensions(spec.graph())
    order = exts[int(rng.integers(len(exts)))]
    lo, hi = cfg.duration
    blocks = [(subtasks[i], int(rng.integers(lo, hi + 1))) for i in order]
    gaps = [0 if cfg.nav is None else int(rng.integers(cfg.nav[0], cfg.nav[1] + 1)) for _ in blocks[1:]]
    return _block_trace(blocks, gaps, layout, cfg.noise, rng, trace_id)


def _pieces(trace: Trace) -> list:
    """Cut a trace into consecutive (frames, event) pieces; event is None for
    navigation stretches."""
    evs = sorted(trace.events, key=lambda e: e.start)
    out, t = [], 0
    for e in evs:
        if e.start > t:
            out.append((trace.frames[t:e.start], None))
        out.append((trace.frames[e.start:e.end], e))
        t = e.end
    if t < len(trace):
        out.append((trace.frames[t:], None))
    return out


def _reassemble(pieces, trace_id: str) -> Trace:
    rows, events = [], []
    t = 0
    for frames, e in pieces:
        rows.append(frames)
        if e is not None:
            events.append(Event(t, t + len(frames), e.action, e.object, e.receptacle))
        t += len(frames)
    return Trace(np.vstack(rows), events, trace_id)


@dataclass
class Sample:
    id: str
    description: str
    graph: TaskGraph
    trace: Trace
    label: bool
    split: str
    difficulty: Difficulty
    task: str = ""
    negative_kind: Optional[str] = None
    style: str = "then"
    abstract: bool = False

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "split": self.split,
            "label": self.label,
            "negative_kind": self.negative_kind,
            "task": self.task,
            "description": self.description,
            "style": self.style,
            "abstract": self.abstract,
            "graph": graph_to_dot(self.graph),
            "difficulty": {"complexity": self.difficulty.complexity, "ordering": self.difficulty.ordering},
            "trace": self.trace.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Sample":
        return cls(
            id=d["id"],
            description=d["description"],
            graph=parse_dot(d["graph"]),
            trace=Trace.from_json(d["trace"], d["id"]),
            label=bool(d["label"]),
            split=d["split"],
            difficulty=Difficulty(**d["difficulty"]),
            task=d.get("task", ""),
            negative_kind=d.get("negative_kind"),
            style=d.get("style", "then"),
            abstract=bool(d.get("abstract", False)),
        )


_NOISELESS = OracleScorer()


def oracle_label(g: TaskGraph, trace: Trace, k: int = DEFAULT_K) -> bool:
    """Noiseless-oracle verdict; too few segments counts as not verified."""
    try:
        return verify(g, trace, _NOISELESS, k=k).label
    except TooFewSegments:
        return False


def _styles_for(groups, abstract: bool):
    styles = ["then"]
    if len(groups) >= 2:
        styles += ["before", "after"]
        if len(groups[0]) == 1 and groups[0][0].action != "place":
            styles.append("prefix")
    if abstract and len(groups) == 1 and all(st.action != "place" for st in groups[0]):
        styles.append("goal")
    return styles


def make_positive(spec: TaskSpec, rng, split: str, sample_id: str, cfg: TraceConfig = TraceConfig(),
                  abstract: bool = False, style: Optional[str] = None) -> Sample:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    groups = [list(g) for g in spec.groups]
    if style is None:
        styles = _styles_for(groups, abstract)
        style = styles[int(rng.integers(len(styles)))]
    desc = render_description(groups, style=style, abstract=abstract)
    g = spec.graph()
    trace = execute_plan(spec, rng, cfg, sample_id)
    return Sample(sample_id, desc, g, trace, True, split, difficulty_of(g), spec.name, None, style, abstract)


def _relabel(sample: Sample, groups, trace: Trace, kind: str) -> Sample:
    style = sample.style if sample.style in _styles_for(groups, sample.abstract) else "then"
    desc = render_description(groups, style=style, abstract=sample.abstract)
    g = groups_to_graph(groups)
    name = composition_name(tuple(tuple(st.action for st in grp) for grp in groups)) + f"({groups[0][0].object})"
    return Sample(sample.id, desc, g, trace, False, sample.split, difficulty_of(g), name, kind, style, sample.abstract)


def make_negative(sample: Sample, kind: str, rng, max_tries: int = 20, k: int = DEFAULT_K,
                  noise: float = TraceConfig.noise) -> Sample:
    """Falsify a positive sample by altering its description or its trace.

    The target object is kept. The result is checked with the noiseless
    oracle; candidates it still verifies are rejected and redrawn.
    """
    if kind not in NEGATIVE_KINDS:
        raise ValueError(f"unknown negative kind {kind!r}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    groups = parse_groups(sample.description)
    obj = groups[0][0].object
    flat = [st for grp in groups for st in grp]
    layout_d = sample.trace.frames.shape[1]

    for _ in range(max_tries):
        if kind == "reordered":
            if len(groups) < 2:
                raise CannotFalsify("an unordered task cannot be reordered")
            perm = list(rng.permutation(len(groups)))
            if perm == sorted(perm):
                perm = perm[::-1]
            cand = _relabel(sample, [groups[i] for i in perm], sample.trace, kind)
        elif kind == "substituted":
            present = {st.action for st in flat}
            pool = sorted(vocab.OBJECT_ACTIONS[obj] - present, key=_ACTION_RANK.get)
            if not pool:
                raise CannotFalsify(f"no substitute action left for {obj}")
            new_action = pool[int(rng.integers(len(pool)))]
            recep = None
            if new_action == "place":
                receps = sorted(r for r in vocab.RECEPTACLES if r != obj)
                recep = receps[int(rng.integers(len(receps)))]
            gi = int(rng.integers(len(groups)))
            si = int(rng.integers(len(groups[gi])))
            new_groups = [list(grp) for grp in groups]
            new_groups[gi][si] = SubTask(new_action, obj, recep)
            cand = _relabel(sample, new_groups, sample.trace, kind)
        elif kind == "trace_shuffled":
            if not sample.graph.edges:
                raise CannotFalsify("any order realizes an unordered task")
            pieces = _pieces(sample.trace)
            slots = [i for i, (_, e) in enumerate(pieces) if e is not None]
            perm = list(rng.permutation(len(slots)))
            if perm == sorted(perm):
                perm = perm[::-1]
            moved = list(pieces)
            for dst, src in zip(slots, perm):
                moved[dst] = pieces[slots[src]]
            cand = replace(sample, trace=_reassemble(moved, sample.trace.trace_id), label=False, negative_kind=kind)
        else:  # trace_dropped; navigation around the dropped block is kept
            pieces = _pieces(sample.trace)
            slots = [i for i, (_, e) in enumerate(pieces) if e is not None]
            drop = slots[int(rng.integers(len(slots)))]
            if len(pieces) == 1:
                frames = pieces[0][0]
                nav = np.tile(FeatureLayout(layout_d).nav_frame(), (len(frames), 1))
                trace = Trace(nav + rng.normal(0.0, noise, nav.shape), [], sample.trace.trace_id)
            else:
                trace = _reassemble(pieces[:drop] + pieces[drop + 1:], sample.trace.trace_id)
            cand = replace(sample, trace=trace, label=False, negative_kind=kind)
        if not oracle_label(cand.graph, cand.trace, k):
            return cand
    raise CannotFalsify(f"could not falsify {sample.id} with {kind} in {max_tries} tries")


# ----------------------------------------------------------------------------
# dataset construction


DEFAULT_COMPLEXITY_WEIGHTS = {1: 0.05, 2: 0.08, 3: 0.12, 4: 0.2, 5: 0.25, 6: 0.3}


@dataclass
class DatasetConfig:
    sizes: dict = field(default_factory=lambda: {"train": 500, "val": 100, "novel_tasks": 100,
                                                  "novel_steps": 100, "abstraction": 100})
    seed: int = 0
    trace: TraceConfig = TraceConfig()
    max_complexity: int = 6
    max_group: int = 3
    max_ordering: int = 5
    complexity_weights: dict = field(default_factory=lambda: dict(DEFAULT_COMPLEXITY_WEIGHTS))
    holdout_composition_frac: float = 0.25
    holdout_pairs: int = 6
    negative_kinds: tuple = NEGATIVE_KINDS

    def to_json(self) -> dict:
        return {
            "sizes": dict(self.sizes),
            "seed": self.seed,
            "trace": {"d": self.trace.d, "duration": list(self.trace.duration),
                      "nav": None if self.trace.nav is None else list(self.trace.nav),
                      "noise": self.trace.noise},
            "max_complexity": self.max_complexity,
            "max_group": self.max_group,
            "max_ordering": self.max_ordering,
            "complexity_weights": {str(k): v for k, v in sorted(self.complexity_weights.items())},
            "holdout_composition_frac": self.holdout_composition_frac,
            "holdout_pairs": self.holdout_pairs,
            "negative_kinds": list(self.negative_kinds),
        }


@dataclass
class SplitPlan:
    """Held-out compositions and (action, object) pairs that define the test splits."""

    train_compositions: list
    novel_compositions: list
    heldout_pairs: frozenset

    def train_pairs(self) -> frozenset:
        return frozenset((a, o) for o, acts in vocab.OBJECT_ACTIONS.items() for a in acts) - self.heldout_pairs


def plan_splits(cfg: DatasetConfig) -> SplitPlan:
    rng = np.random.default_rng([cfg.seed, 999])
    comps = enumerate_compositions(cfg.max_complexity, cfg.max_group, cfg.max_ordering)
    train, novel = [], []
    by_n = {}
    for c in comps:
        by_n.setdefault(sum(map(len, c)), []).append(c)
    for n, cs in sorted(by_n.items()):
        cs = [cs[i] for i in rng.permutation(len(cs))]
        n_hold = int(round(cfg.holdout_composition_frac * len(cs))) if n > 1 else 0
        n_hold = min(n_hold, len(cs) - 1)
        if cfg.sizes.get("novel_tasks") and n > 1 and len(cs) >= 2:
            n_hold = max(n_hold, 1)
        novel += cs[:n_hold]
        train += cs[n_hold:]
    if cfg.sizes.get("novel_tasks") and not novel:
        raise InfeasibleSplit("no composition can be held out for novel_tasks")

    pairs = sorted((a, o) for o, acts in vocab.OBJECT_ACTIONS.items() for a in acts)
    held = set()
    if cfg.sizes.get("novel_steps"):
        order = [pairs[i] for i in rng.permutation(len(pairs))]
        for a, o in order:
            if len(held) >= cfg.holdout_pairs:
                break
            trial = held | {(a, o)}
            # every action and object must stay trainable
            if all(any((a2, o2) not in trial for o2 in vocab.OBJECT_ACTIONS if a2 in vocab.OBJECT_ACTIONS[o2])
                   for a2 in vocab.ACTIONS) and \
               all(any((a2, o2) not in trial for a2 in acts) for o2, acts in vocab.OBJECT_ACTIONS.items()):
                held = trial
        if len(held) < cfg.holdout_pairs:
            raise InfeasibleSplit(f"cannot hold out {cfg.holdout_pairs} (action, object) pairs")
    return SplitPlan(train, novel, frozenset(held))


def _objects_for(comp, allowed_pairs=None, need_any=None):
    actions = [a for g in comp for a in g]
    out = []
    for o, acts in vocab.OBJECT_ACTIONS.items():
        if not set(actions) <= acts:
            continue
        if allowed_pairs is not None and any((a, o) not in allowed_pairs for a in actions):
            continue
        if need_any is not None and not any((a, o) in need_any for a in actions):
            continue
        out.append(o)
    return out


def _draw_spec(rng, comps, weights, allowed_pairs=None, need_any=None, max_tries=200) -> TaskSpec:
    by_n = {}
    for c in comps:
        if _objects_for(c, allowed_pairs, need_any):
            by_n.setdefault(sum(map(len, c)), []).append(c)
    if not by_n:
        raise InfeasibleSplit("no task satisfies the split constraints")
    levels = sorted(by_n)
    w = np.array([weights.get(n, 0.0) for n in levels], dtype=float)
    if w.sum() <= 0:
        w = np.ones(len(levels))
    n = levels[int(rng.choice(len(levels), p=w / w.sum()))]
    comp = by_n[n][int(rng.integers(len(by_n[n])))]
    objs = _objects_for(comp, allowed_pairs, need_any)
    obj = objs[int(rng.integers(len(objs)))]
    groups = []
    for grp in comp:
        sts = []
        for a in grp:
            recep = None
            if a == "place":
                receps = sorted(r for r in vocab.RECEPTACLES if r != obj)
                recep = receps[int(rng.integers(len(receps)))]
            sts.append(SubTask(a, obj, recep))
        groups.append(tuple(sts))
    return TaskSpec(tuple(groups))


def generate_sample(cfg: DatasetConfig, plan: SplitPlan, split: str, index: int) -> Sample:
    """Sample ``index`` of ``split``; depends only on (seed, split, index)."""
    rng = np.random.default_rng([cfg.seed, SPLITS.index(split), index])
    train_pairs = plan.train_pairs()
    if split in ("train", "val", "abstraction"):
        comps, allowed, need = plan.train_compositions, train_pairs, None
    elif split == "novel_tasks":
        comps, allowed, need = plan.novel_compositions, train_pairs, None
    elif split == "novel_steps":
        comps, allowed, need = plan.train_compositions, None, plan.heldout_pairs
    else:
        raise ValueError(f"unknown split {split!r}")
    abstract = split == "abstraction"
    sid = f"{split}-{index:05d}"
    positive = index % 2 == 0
    kinds = list(cfg.negative_kinds)
    start = (index // 2) % len(kinds)
    for _ in range(50):
        spec = _draw_spec(rng, comps, cfg.complexity_weights, allowed, need)
        sample = make_positive(spec, rng, split, sid, cfg.trace, abstract=abstract)
        if not oracle_label(sample.graph, sample.trace):
            continue  # not expected with navigation gaps >= k; redraw
        if positive:
            return sample
        for kind in kinds[start:] + kinds[:start]:
            try:
                return make_negative(sample, kind, rng, noise=cfg.trace.noise)
            except CannotFalsify:
                continue
    raise InfeasibleSplit(f"could not generate {sid}")


@dataclass
class Dataset:
    samples: list
    config: DatasetConfig
    plan: Optional[SplitPlan] = None

    def split(self, name: str) -> list:
        return [s for s in self.samples if s.split == name]

    def stats(self) -> dict:
        return dataset_stats(self.samples)


def build_dataset(cfg: DatasetConfig) -> Dataset:
    for name in cfg.sizes:
        if name not in SPLITS:
            raise ValidationError(f"unknown split {name!r}")
    plan = plan_splits(cfg)
    samples = []
    for split in SPLITS:
        for i in range(cfg.sizes.get(split, 0)):
            samples.append(generate_sample(cfg, plan, split, i))
    return Dataset(samples, cfg, plan)


def dataset_stats(samples) -> dict:
    def mean(xs):
        xs = list(xs)
        return float(np.mean(xs)) if xs else 0.0

    out = {"n_samples": len(samples), "splits": {}}
    groups = {}
    for s in samples:
        groups.setdefault(s.split, []).append(s)
    for name in [n for n in SPLITS if n in groups]:
        ss = groups[name]
        pos = [s for s in ss if s.label]
        out["splits"][name] = {
            "n": len(ss),
            "positive": len(pos),
            "negative": len(ss) - len(pos),
            "negative_kinds": dict(sorted(Counter(s.negative_kind for s in ss if not s.label).items())),
            "mean_subtasks": mean(s.difficulty.complexity for s in ss),
            "mean_ordering": mean(s.difficulty.ordering for s in ss),
            "mean_extensions": mean(count_extensions(s.graph) for s in ss),
            "mean_description_words": mean(len(s.description.replace(",", " ").split()) for s in ss),
            "mean_trace_frames": mean(len(s.trace) for s in ss),
            "tasks": len({s.task for s in ss}),
        }
    out["mean_subtasks"] = mean(s.difficulty.complexity for s in samples)
    out["mean_extensions"] = mean(count_extensions(s.graph) for s in samples)
    out["mean_description_words"] = mean(len(s.description.replace(",", " ").split()) for s in samples)
    return out


def write_dataset(ds: Dataset, out_dir) -> tuple:
    """Write ``dataset.jsonl`` and ``stats.json``; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / "dataset.jsonl"
    with open(data_path, "w", encoding="utf-8", newline="\n") as fh:
        for s in ds.samples:
            fh.write(json.dumps(s.to_json(), separators=(",", ":")) + "\n")
    stats = {"config": ds.config.to_json(), **ds.stats()}
    if ds.plan is not None:
        stats["heldout_pairs"] = sorted(list(p) for p in ds.plan.heldout_pairs)
        stats["novel_compositions"] = sorted(composition_name(c) for c in ds.plan.novel_compositions)
    stats_path = out_dir / "stats.json"
    stats_path.write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return data_path, stats_path


def read_samples(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [Sample.from_json(json.loads(line)) for line in fh if line.strip()]
