"""Symbolic task verification: parse task descriptions into query graphs and
align them against segmented event traces."""

from taskverify.dsl import Query, QueryType, SubTask, TaskGraph, graph_to_dot, parse_dot, parse_query
from taskverify.graph import count_extensions, linear_extensions
from taskverify.aligner import Alignment, SegmentedTrace, Trace, Event, Verdict, align_bruteforce, align_dp, segment, verify
from taskverify.semparse import ged, parse_description
from taskverify.scorer import OracleScorer, ParametricScorer

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "Event",
    "OracleScorer",
    "ParametricScorer",
    "Query",
    "QueryType",
    "SegmentedTrace",
    "SubTask",
    "TaskGraph",
    "Trace",
    "Verdict",
    "align_bruteforce",
    "align_dp",
    "count_extensions",
    "ged",
    "graph_to_dot",
    "linear_extensions",
    "parse_description",
    "parse_dot",
    "parse_query",
    "segment",
    "verify",
]
