"""Query DSL and the line-oriented DOT dialect used to exchange task graphs.

A query is a typed symbolic operator whose truth in a trace segment is
estimated by a scorer::

    StateQuery(apple,hot)
    RelationQuery(apple,plate,in)
    ActionQuery(place,apple,plate)

A task graph serializes one node per line followed by one edge per line::

    Step 0: StateQuery(apple,hot)
    Step 1: StateQuery(apple,clean)
    Step 0 -> Step 1

The parser also accepts comma-separated items and the ``→`` arrow.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import NamedTuple, Optional

from taskverify import vocab
from taskverify.errors import (
    ArityMismatch,
    DanglingEdge,
    DotSyntaxError,
    InvalidVocabulary,
    UnknownQueryType,
    ValidationError,
)
from taskverify.graph import topological_order

IDENT = re.compile(r"[a-z0-9_]+\Z")


class QueryType(enum.Enum):
    STATE = "State"
    RELATION = "Relation"
    ACTION = "Action"

    @property
    def keyword(self) -> str:
        return self.value + "Query"

    @classmethod
    def from_keyword(cls, word: str) -> "QueryType":
        for qt in cls:
            if qt.keyword == word:
                return qt
        raise UnknownQueryType(f"unknown query type {word!r}")


_ARITY = {
    QueryType.STATE: (2, 2),
    QueryType.RELATION: (3, 3),
    QueryType.ACTION: (2, 3),
}


@dataclass(frozen=True)
class Query:
    qtype: QueryType
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        lo, hi = _ARITY[self.qtype]
        if not lo <= len(self.args) <= hi:
            raise ArityMismatch(
                f"{self.qtype.keyword} takes {lo if lo == hi else f'{lo}-{hi}'} "
                f"arguments, got {len(self.args)}: {self.args}"
            )
        for a in self.args:
            if not isinstance(a, str) or not IDENT.match(a):
                raise ValidationError(f"invalid identifier {a!r}")

    @property
    def text(self) -> str:
        return f"{self.qtype.keyword}({','.join(self.args)})"

    def __str__(self) -> str:
        return self.text

    def check_vocabulary(self) -> None:
        """Raise InvalidVocabulary if a state/relation/action name is unknown."""
        if self.qtype is QueryType.STATE:
            if self.args[1] not in vocab.STATES:
                raise InvalidVocabulary(f"unknown state {self.args[1]!r}")
        elif self.qtype is QueryType.RELATION:
            if self.args[2] not in vocab.RELATIONS:
                raise InvalidVocabulary(f"unknown relation {self.args[2]!r}")
        elif self.args[0] not in vocab.ACTIONS:
            raise InvalidVocabulary(f"unknown action {self.args[0]!r}")


_QUERY_RE = re.compile(r"^\s*([A-Za-z]+)\s*\((.*)\)\s*$")


def parse_query(text: str, strict: bool = True) -> Query:
    m = _QUERY_RE.match(text)
    if m is None:
        raise DotSyntaxError(f"not a query: {text!r}")
    qtype = QueryType.from_keyword(m.group(1))
    body = m.group(2).strip()
    args = [a.strip().lower() for a in body.split(",")] if body else []
    q = Query(qtype, tuple(args))
    if strict:
        q.check_vocabulary()
    return q


class SubTask(NamedTuple):
    """One object interaction, e.g. ``heat(apple)`` or ``place(apple, plate)``."""

    action: str
    object: str
    receptacle: Optional[str] = None

    def __str__(self) -> str:
        inner = self.object if self.receptacle is None else f"{self.object},{self.receptacle}"
        return f"{self.action}({inner})"


SCHEMES = ("state_relation", "action")


def subtask_query(st: SubTask, scheme: str = "state_relation") -> Query:
    """Canonical query for a sub-task under a query scheme.

    ``pick`` becomes ``StateQuery(obj,picked)`` and ``place`` becomes
    ``RelationQuery(obj,recep,in|on)``; under the ``action`` scheme every
    sub-task is an ``ActionQuery``.
    """
    if scheme == "action":
        args = (st.action, st.object) if st.receptacle is None else (st.action, st.object, st.receptacle)
        return Query(QueryType.ACTION, args)
    if scheme != "state_relation":
        raise ValueError(f"unknown query scheme {scheme!r}")
    if st.action == "place":
        if st.receptacle is None:
            raise ArityMismatch(f"place({st.object}) needs a receptacle")
        rel = vocab.RECEPTACLES.get(st.receptacle, "in")
        return Query(QueryType.RELATION, (st.object, st.receptacle, rel))
    try:
        state = vocab.ACTION_STATE[st.action]
    except KeyError:
        raise InvalidVocabulary(f"unknown action {st.action!r}") from None
    return Query(QueryType.STATE, (st.object, state))


def query_subtask(q: Query) -> SubTask:
    """Inverse of :func:`subtask_query`; the event a query asks about."""
    if q.qtype is QueryType.STATE:
        obj, state = q.args
        try:
            return SubTask(vocab.STATE_ACTION[state], obj)
        except KeyError:
            raise InvalidVocabulary(f"unknown state {state!r}") from None
    if q.qtype is QueryType.RELATION:
        return SubTask("place", q.args[0], q.args[1])
    return SubTask(*q.args)


@dataclass(frozen=True)
class TaskGraph:
    """DAG of queries. Node ids are the positions in ``nodes``; edges are
    kept sorted so that equality is structural."""

    nodes: tuple
    edges: tuple = ()

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if not nodes:
            raise ValidationError("task graph needs at least one node")
        n = len(nodes)
        seen = set()
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise DanglingEdge(f"edge {u}->{v} references a missing node (n={n})")
            if (u, v) in seen:
                raise ValidationError(f"duplicate edge {u}->{v}")
            seen.add((u, v))
        edges = tuple(sorted(seen))
        topological_order(n, edges)  # raises CycleDetected (self-edges included)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def map_queries(self, fn) -> "TaskGraph":
        return TaskGraph(tuple(fn(q) for q in self.nodes), self.edges)

    def to_scheme(self, scheme: str) -> "TaskGraph":
        """Re-express every node under another query scheme."""
        return self.map_queries(lambda q: subtask_query(query_subtask(q), scheme))

    def __str__(self) -> str:
        return graph_to_dot(self)


def graph_to_dot(g: TaskGraph) -> str:
    lines = [f"Step {i}: {q.text}" for i, q in enumerate(g.nodes)]
    lines += [f"Step {u} -> Step {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


_NODE_RE = re.compile(r"^Step\s+(\d+)\s*:\s*(.+)$")
_EDGE_RE = re.compile(r"^Step\s+(\d+)\s*(?:->|→)\s*Step\s+(\d+)$")


def _split_items(text: str):
    depth = 0
    buf = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise DotSyntaxError("unbalanced ')'")
        if depth == 0 and ch in ",\n;":
            yield "".join(buf).strip()
            buf = []
        else:
            buf.append(ch)
    if depth != 0:
        raise DotSyntaxError("unbalanced '('")
    yield "".join(buf).strip()


def parse_dot(text: str, strict: bool = True) -> TaskGraph:
    nodes = {}
    edges = []
    for item in _split_items(text):
        if not item:
            continue
        m = _EDGE_RE.match(item)
        if m:
            edges.append((int(m.group(1)), int(m.group(2))))
            continue
        m = _NODE_RE.match(item)
        if m is None:
            raise DotSyntaxError(f"cannot parse item {item!r}")
        i = int(m.group(1))
        if i in nodes:
            raise DotSyntaxError(f"node {i} declared twice")
        nodes[i] = parse_query(m.group(2), strict=strict)
    if not nodes:
        raise DotSyntaxError("no nodes")
    if sorted(nodes) != list(range(len(nodes))):
        raise DotSyntaxError(f"node ids must be 0..{len(nodes) - 1}, got {sorted(nodes)}")
    if len(set(edges)) != len(edges):
        raise DotSyntaxError("duplicate edge")
    return TaskGraph(tuple(nodes[i] for i in range(len(nodes))), tuple(edges))
