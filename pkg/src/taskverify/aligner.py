"""Segmentation, constrained query-to-segment alignment and verification.

An alignment pairs each of ``N`` ordered queries with its own segment out of
``S`` such that the pairing respects query order. Equivalently it is a
strictly increasing assignment ``t_0 < t_1 < ... < t_{N-1}``; its score is
the sum of the chosen log-probabilities. The verification probability of a
task graph is ``sigmoid(best_score / N)``, maximized over every linear
extension of the graph.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from taskverify.dsl import SubTask
from taskverify.errors import EmptyTrace, SizeLimitExceeded, TooFewSegments, ValidationError
from taskverify.graph import DEFAULT_CAP, linear_extensions

DEFAULT_K = 20
FPS = 2.5
EPS = 1e-8
LOG_EPS = math.log(EPS)
BRUTEFORCE_MAX_S = 14


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


# positive iff the geometric mean of the aligned probabilities is >= 0.5
DEFAULT_THRESHOLD = sigmoid(math.log(0.5))


@dataclass(frozen=True)
class Event:
    """A sub-task occupying frames ``[start, end)`` of a trace."""

    start: int
    end: int
    action: str
    object: str
    receptacle: Optional[str] = None

    @property
    def subtask(self) -> SubTask:
        return SubTask(self.action, self.object, self.receptacle)

    def to_json(self) -> dict:
        d = {"start": self.start, "end": self.end, "action": self.action, "object": self.object}
        if self.receptacle is not None:
            d["receptacle"] = self.receptacle
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Event":
        return cls(int(d["start"]), int(d["end"]), d["action"], d["object"], d.get("receptacle"))


@dataclass
class Trace:
    """Raw frame sequence ``frames`` of shape (T, d) with its annotated events."""

    frames: np.ndarray
    events: list = field(default_factory=list)
    trace_id: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=float)
        if self.frames.ndim != 2:
            raise ValidationError("frames must be a (T, d) array")

    def __len__(self) -> int:
        return self.frames.shape[0]

    def to_json(self, decimals: int = 4) -> dict:
        return {
            "frames": np.round(self.frames, decimals).tolist(),
            "events": [e.to_json() for e in self.events],
        }

    @classmethod
    def from_json(cls, d: dict, trace_id: str = "") -> "Trace":
        frames = np.asarray(d["frames"], dtype=float)
        if frames.size == 0:
            frames = frames.reshape(0, 0)
        return cls(frames, [Event.from_json(e) for e in d.get("events", [])], trace_id)


@dataclass(frozen=True)
class Segment:
    index: int
    start: int
    end: int  # exclusive, in original frames (before padding)
    frames: np.ndarray  # (k, d), zero-padded at the tail
    annotations: Optional[frozenset] = None
    trace_id: str = ""

    @property
    def n_padded(self) -> int:
        return self.frames.shape[0] - (self.end - self.start)

    @property
    def features(self) -> np.ndarray:
        return self.frames.mean(axis=0)


@dataclass(frozen=True)
class SegmentedTrace:
    segments: tuple
    k: int
    trace_id: str = ""

    def __len__(self) -> int:
        return len(self.segments)

    @property
    def features(self) -> np.ndarray:
        """Mean-pooled segment features, shape (S, d)."""
        return np.stack([s.features for s in self.segments])


def segment(trace, k: int = DEFAULT_K) -> SegmentedTrace:
    """Split a trace into ``ceil(T / k)`` non-overlapping windows of ``k`` frames.

    The final window is zero-padded. An event is annotated on every window
    whose frame range it intersects.
    """
    if k < 1:
        raise ValidationError("window size k must be positive")
    if not isinstance(trace, Trace):
        trace = Trace(np.asarray(trace, dtype=float))
    T = len(trace)
    if T == 0:
        raise EmptyTrace("cannot segment an empty trace")
    d = trace.frames.shape[1]
    annotated = trace.events is not None
    segs = []
    for i, start in enumerate(range(0, T, k)):
        end = min(start + k, T)
        frames = trace.frames[start:end]
        if end - start < k:
            frames = np.vstack([frames, np.zeros((k - (end - start), d))])
        ann = None
        if annotated:
            ann = frozenset(e.subtask for e in trace.events if e.start < end and e.end > start)
        segs.append(Segment(i, start, end, frames, ann, trace.trace_id))
    return SegmentedTrace(tuple(segs), k, trace.trace_id)


def segment_seconds(k: int = DEFAULT_K, fps: float = FPS) -> float:
    return k / fps


@dataclass(frozen=True)
class Alignment:
    """Binary (N, S) matrix ``z`` with one segment per query row."""

    z: np.ndarray
    score: float

    @property
    def assignment(self) -> tuple:
        return tuple(int(np.flatnonzero(row)[0]) for row in self.z)

    @classmethod
    def from_assignment(cls, ts, scores) -> "Alignment":
        scores = np.asarray(scores, dtype=float)
        z = np.zeros(scores.shape, dtype=np.int8)
        for j, t in enumerate(ts):
            z[j, t] = 1
        return cls(z, math.fsum(float(scores[j, t]) for j, t in enumerate(ts)))


def constraint_violations(z) -> list:
    """Check a 0/1 matrix against the alignment constraints.

    Returns a list of human-readable violations (empty when valid):
    at most one query per segment, exactly one segment per query, and if
    query ``v`` sits on segment ``tbar`` then every earlier query ``u < v``
    uses no segment ``t >= tbar``.
    """
    z = np.asarray(z)
    bad = []
    if not np.isin(z, (0, 1)).all():
        bad.append("entries not in {0,1}")
        return bad
    for t, c in enumerate(z.sum(axis=0)):
        if c > 1:
            bad.append(f"segment {t} has {c} queries")
    for j, r in enumerate(z.sum(axis=1)):
        if r != 1:
            bad.append(f"query {j} has {r} segments")
    N, S = z.shape
    for v in range(N):
        for tbar in range(S):
            if z[v, tbar] != 1:
                continue
            for u in range(v):
                if z[u, tbar:].any():
                    bad.append(f"query {u} is aligned at or after segment {tbar} of later query {v}")
    return bad


def _check_scores(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise ValidationError("score matrix must be 2-D")
    if not np.isfinite(scores).all():
        raise ValidationError("score matrix has non-finite entries")
    if (scores > 0).any():
        raise ValidationError("log-scores must be <= 0")
    N, S = scores.shape
    if N < 1:
        raise ValidationError("score matrix has no queries")
    if N > S:
        raise TooFewSegments(f"{N} queries cannot be aligned to {S} segments")
    return scores


def align_dp(scores) -> Alignment:
    """Best order-preserving alignment by dynamic programming.

    ``best[j][t]`` is the best score of queries ``j..N-1`` on segments
    ``t..S-1``: either pair query ``j`` with segment ``t`` or skip the
    segment. Ties go to the earliest segment.
    """
    scores = _check_scores(scores)
    N, S = scores.shape
    if N == S:
        return Alignment.from_assignment(range(N), scores)
    s = scores.tolist()
    ninf = -math.inf
    best = [[ninf] * (S + 1) for _ in range(N + 1)]
    best[N] = [0.0] * (S + 1)
    for j in range(N - 1, -1, -1):
        row, nxt = best[j], best[j + 1]
        sj = s[j]
        # need S - t >= N - j segments left
        for t in range(S - (N - j), -1, -1):
            take = sj[t] + nxt[t + 1]
            skip = row[t + 1]
            row[t] = take if take >= skip else skip
    ts = []
    t = 0
    for j in range(N):
        while True:
            if S - t == N - j or s[j][t] + best[j + 1][t + 1] >= best[j][t + 1]:
                ts.append(t)
                t += 1
                break
            t += 1
    return Alignment.from_assignment(ts, scores)


def align_bruteforce(scores, max_segments: int = BRUTEFORCE_MAX_S) -> Alignment:
    """Exhaustive search over every strictly increasing assignment.

    This is the 0/1 integer program's feasible set enumerated directly;
    used as an oracle for :func:`align_dp`.
    """
    scores = _check_scores(scores)
    N, S = scores.shape
    if S > max_segments:
        raise SizeLimitExceeded(f"brute force limited to {max_segments} segments, got {S}")
    best_ts, best = None, -math.inf
    for ts in itertools.combinations(range(S), N):
        total = math.fsum(float(scores[j, t]) for j, t in enumerate(ts))
        if best_ts is None or total > best:
            best_ts, best = ts, total
    return Alignment.from_assignment(best_ts, scores)


def log_score_matrix(scorer, queries, segtrace: SegmentedTrace) -> np.ndarray:
    """(N, S) log-probabilities clamped to ``[log EPS, 0]``."""
    if hasattr(scorer, "log_score_matrix"):
        m = np.asarray(scorer.log_score_matrix(queries, segtrace), dtype=float)
    else:
        m = np.array([[math.log(max(scorer.score(q, seg), EPS)) for seg in segtrace.segments] for q in queries])
    return np.clip(m, LOG_EPS, 0.0)


@dataclass
class Verdict:
    probability: float
    label: bool
    best_extension: tuple
    best_alignment: Alignment
    threshold: float
    extensions: list = field(default_factory=list)
    alignments: list = field(default_factory=list)
    truncated: bool = False

    @property
    def n_queries(self) -> int:
        return len(self.best_extension)

    @property
    def query_segments(self) -> dict:
        """query id -> aligned segment index for the winning extension."""
        return dict(zip(self.best_extension, self.best_alignment.assignment))

    def alignment_rows(self, scores: Optional[np.ndarray] = None):
        for x, (ext, al) in enumerate(zip(self.extensions, self.alignments)):
            for row, (q, t) in enumerate(zip(ext, al.assignment)):
                yield x, q, t, (None if scores is None else float(scores[q, t]))

    def to_csv(self, scores: np.ndarray) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["extension_index", "query_id", "segment_index", "log_score"])
        for x, q, t, s in self.alignment_rows(scores):
            w.writerow([x, q, t, repr(s)])
        return buf.getvalue()


def decide(probability: float, threshold: float) -> bool:
    # probabilities equal to the threshold up to rounding count as positive
    return probability >= threshold - 1e-12


def verify_scores(
    scores,
    extensions,
    threshold: float = DEFAULT_THRESHOLD,
    truncated: bool = False,
) -> Verdict:
    """Verify from a precomputed (N, S) log-score matrix indexed by node id."""
    scores = np.asarray(scores, dtype=float)
    N, S = scores.shape
    if N > S:
        raise TooFewSegments(f"{N} queries cannot be aligned to {S} segments")
    best_i, alignments = None, []
    for i, ext in enumerate(extensions):
        al = align_dp(scores[list(ext)])
        alignments.append(al)
        if best_i is None or al.score > alignments[best_i].score:
            best_i = i
    best = alignments[best_i]
    p = sigmoid(best.score / N)
    return Verdict(
        probability=p,
        label=decide(p, threshold),
        best_extension=tuple(extensions[best_i]),
        best_alignment=best,
        threshold=threshold,
        extensions=[tuple(e) for e in extensions],
        alignments=alignments,
        truncated=truncated,
    )


def verify(
    g,
    trace,
    scorer,
    threshold: float = DEFAULT_THRESHOLD,
    cap: int = DEFAULT_CAP,
    k: int = DEFAULT_K,
) -> Verdict:
    """Decide whether ``trace`` realizes the task graph ``g``.

    ``trace`` may be a raw :class:`Trace` (segmented with window ``k``) or an
    already segmented one.
    """
    segtrace = trace if isinstance(trace, SegmentedTrace) else segment(trace, k)
    if g.n_nodes > len(segtrace):
        raise TooFewSegments(f"{g.n_nodes} queries cannot be aligned to {len(segtrace)} segments")
    exts = linear_extensions(g, cap)
    scores = log_score_matrix(scorer, g.nodes, segtrace)
    return verify_scores(scores, exts, threshold, exts.truncated)
