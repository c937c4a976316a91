"""Query scorers: ``score(query, segment) -> probability``.

Two implementations share the contract:

* :class:`OracleScorer` reads the segment's ground-truth annotations and
  returns ``true_prob``/``false_prob``, optionally flipping the answer with a
  seeded per-(query, segment) coin.
* :class:`ParametricScorer` keeps one linear-logistic encoder per query type.
  A query is one-hot encoded per argument position (``u``) and a segment is
  mean-pooled over its frames (``f``); the logit is
  ``u @ W @ f + u @ v + f @ c + b``.
"""

from __future__ import annotations

import hashlib
import json
import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from taskverify import vocab
from taskverify.aligner import EPS
from taskverify.dsl import Query, QueryType, query_subtask
from taskverify.errors import (
    CheckpointMismatch,
    DimensionMismatch,
    MissingAnnotations,
    UnknownVocabulary,
    ValidationError,
)

LOGIT_MAX = math.log((1 - EPS) / EPS)
CHECKPOINT_FORMAT = "taskverify-parametric-scorer"
CHECKPOINT_VERSION = 1


class Scorer:
    """Base class; subclasses implement :meth:`score`."""

    def score(self, query: Query, segment) -> float:
        raise NotImplementedError

    def log_score_matrix(self, queries, segtrace) -> np.ndarray:
        return np.log(
            np.maximum([[self.score(q, seg) for seg in segtrace.segments] for q in queries], EPS)
        )


def query_truth(query: Query, segment) -> bool:
    if segment.annotations is None:
        raise MissingAnnotations(f"segment {segment.index} carries no annotations")
    return query_subtask(query) in segment.annotations


@dataclass(frozen=True)
class OracleScorer(Scorer):
    true_prob: float = 0.99
    false_prob: float = 0.01
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.false_prob < self.true_prob < 1:
            raise ValidationError("need 0 < false_prob < true_prob < 1")
        if not 0 <= self.noise < 0.5:
            raise ValidationError("noise must be in [0, 0.5)")

    def flipped(self, query: Query, segment) -> bool:
        if self.noise == 0:
            return False
        key = [
            self.seed,
            zlib.crc32(query.text.encode()),
            zlib.crc32(segment.trace_id.encode()),
            segment.index,
        ]
        return bool(np.random.default_rng(key).random() < self.noise)

    def score(self, query: Query, segment) -> float:
        truth = query_truth(query, segment)
        if self.flipped(query, segment):
            truth = not truth
        return self.true_prob if truth else self.false_prob


@dataclass(frozen=True)
class ConstantScorer(Scorer):
    p: float = 0.5

    def score(self, query, segment) -> float:
        return self.p


def oracle_score(cfg: OracleScorer, query: Query, segment) -> float:
    return cfg.score(query, segment)


# argument slots of each query type -> vocabulary of that slot
def default_slots() -> dict:
    objects = tuple(sorted(vocab.OBJECTS))
    receps = tuple(sorted(vocab.RECEPTACLES))
    return {
        QueryType.STATE: (objects, tuple(sorted(vocab.STATES))),
        QueryType.RELATION: (objects, receps, tuple(sorted(vocab.RELATIONS))),
        # ActionQuery's receptacle slot is optional
        QueryType.ACTION: (tuple(sorted(vocab.ACTIONS)), objects, receps),
    }


class QueryEncoder:
    """Per-type one-hot layout: each argument slot gets its own block."""

    def __init__(self, slots=None):
        self.slots = slots or default_slots()
        self.offsets = {}
        self.sizes = {}
        for qt, slot_vocab in self.slots.items():
            offs, n = [], 0
            for words in slot_vocab:
                offs.append((n, {w: i for i, w in enumerate(words)}))
                n += len(words)
            self.offsets[qt] = offs
            self.sizes[qt] = n

    def indices(self, query: Query) -> np.ndarray:
        offs = self.offsets[query.qtype]
        out = []
        for pos, arg in enumerate(query.args):
            base, table = offs[pos]
            if arg not in table:
                raise UnknownVocabulary(f"{query.text}: {arg!r} not in the {query.qtype.value} vocabulary")
            out.append(base + table[arg])
        return np.asarray(out, dtype=np.intp)

    def to_json(self) -> dict:
        return {qt.value: [list(words) for words in slot] for qt, slot in self.slots.items()}

    @classmethod
    def from_json(cls, d: dict) -> "QueryEncoder":
        return cls({QueryType(k): tuple(tuple(w) for w in v) for k, v in d.items()})

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]


PARAM_NAMES = ("W", "v", "c", "b")


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


class ParametricScorer(Scorer):
    """One linear-logistic encoder per query type.

    ``params`` maps ``"<Type>/<name>"`` to arrays: ``W`` (V, d), ``v`` (V,),
    ``c`` (d,) and ``b`` (1,). Parameter blocks of different types are
    disjoint, so training one type never moves another type's scores.
    """

    def __init__(self, d: int, encoder: QueryEncoder = None, params: dict = None):
        self.d = int(d)
        self.encoder = encoder or QueryEncoder()
        if params is None:
            params = self.zero_params()
        self.params = {k: np.array(v, dtype=float) for k, v in params.items()}
        for k, shape in self.shapes().items():
            if self.params.get(k) is None or self.params[k].shape != shape:
                raise DimensionMismatch(f"parameter {k} should have shape {shape}")

    def shapes(self) -> dict:
        out = {}
        for qt in QueryType:
            V = self.encoder.sizes[qt]
            out.update({
                f"{qt.value}/W": (V, self.d),
                f"{qt.value}/v": (V,),
                f"{qt.value}/c": (self.d,),
                f"{qt.value}/b": (1,),
            })
        return out

    def zero_params(self) -> dict:
        return {k: np.zeros(s) for k, s in self.shapes().items()}

    @classmethod
    def initialized(cls, d: int, seed: int = 0, scale: float = 0.01, encoder: QueryEncoder = None):
        enc = encoder or QueryEncoder()
        sc = cls(d, enc)
        rng = np.random.default_rng(seed)
        for k in sorted(sc.params):
            sc.params[k] = rng.normal(0.0, scale, sc.params[k].shape)
        return sc

    def copy(self) -> "ParametricScorer":
        return ParametricScorer(self.d, self.encoder, {k: v.copy() for k, v in self.params.items()})

    def _check_features(self, feats: np.ndarray) -> np.ndarray:
        feats = np.asarray(feats, dtype=float)
        if feats.shape[-1] != self.d:
            raise DimensionMismatch(f"segment features have dimension {feats.shape[-1]}, scorer expects {self.d}")
        return feats

    def logits(self, query: Query, feats: np.ndarray) -> np.ndarray:
        """Raw logits of ``query`` against features of shape (..., d)."""
        feats = self._check_features(feats)
        idx = self.encoder.indices(query)
        t = query.qtype.value
        p = self.params
        w = p[f"{t}/W"][idx].sum(axis=0) + p[f"{t}/c"]
        return feats @ w + p[f"{t}/v"][idx].sum() + p[f"{t}/b"][0]

    def score(self, query: Query, segment) -> float:
        return parametric_score(self, query, segment)

    def log_score_matrix(self, queries, segtrace) -> np.ndarray:
        feats = segtrace.features
        ell = np.stack([self.logits(q, feats) for q in queries])
        return _log_sigmoid(np.clip(ell, -LOGIT_MAX, LOGIT_MAX))

    # checkpoints
    def save(self, path) -> None:
        doc = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "d": self.d,
            "vocab_hash": self.encoder.hash(),
            "vocab": self.encoder.to_json(),
            "shapes": {k: list(s) for k, s in self.shapes().items()},
            "params": {k: self.params[k].tolist() for k in sorted(self.params)},
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path, d: int = None, encoder: QueryEncoder = None) -> "ParametricScorer":
        """Load a checkpoint; reject it if its vocabulary or ``d`` differ
        from the expected ones (defaults: the built-in vocabulary)."""
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
            raise CheckpointMismatch("not a supported scorer checkpoint")
        expected = encoder or QueryEncoder()
        stored = QueryEncoder.from_json(doc["vocab"])
        if stored.hash() != doc["vocab_hash"] or stored.hash() != expected.hash():
            raise CheckpointMismatch("checkpoint vocabulary does not match")
        if d is not None and doc["d"] != d:
            raise CheckpointMismatch(f"checkpoint has d={doc['d']}, expected {d}")
        return cls(doc["d"], expected, {k: np.asarray(v, dtype=float) for k, v in doc["params"].items()})


def parametric_score(scorer: ParametricScorer, query: Query, segment) -> float:
    """``sigmoid(logit)`` clamped to ``[EPS, 1 - EPS]``."""
    feats = segment.features if hasattr(segment, "features") else np.asarray(segment, dtype=float)
    ell = float(scorer.logits(query, feats))
    ell = min(max(ell, -LOGIT_MAX), LOGIT_MAX)
    return 1.0 / (1.0 + math.exp(-ell))
