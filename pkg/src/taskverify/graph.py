"""DAG utilities: validation, topological order and linear extensions.

Functions take either a :class:`~taskverify.dsl.TaskGraph` or anything with
``n_nodes`` and ``edges`` attributes; nodes are ``0..n_nodes-1``.
"""

from __future__ import annotations

import heapq

from taskverify.errors import CycleDetected, SizeLimitExceeded

DEFAULT_CAP = 64
MAX_COUNT_NODES = 16


class Extensions(list):
    """List of linear extensions (tuples of node ids) with a truncation flag."""

    def __init__(self, items=(), truncated: bool = False):
        super().__init__(items)
        self.truncated = truncated


def _preds(n, edges):
    preds = [set() for _ in range(n)]
    for u, v in edges:
        preds[v].add(u)
    return preds


def topological_order(n: int, edges) -> list:
    """Smallest-id-first topological order; raises CycleDetected."""
    indeg = [0] * n
    succ = [[] for _ in range(n)]
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1
    heap = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(order) != n:
        stuck = sorted(set(range(n)) - set(order))
        raise CycleDetected(f"edge set has a cycle through nodes {stuck}")
    return order


def linear_extensions(g, cap: int = DEFAULT_CAP) -> Extensions:
    """All linear extensions of ``g`` in lexicographic order, at most ``cap``.

    The result's ``truncated`` attribute is True when more extensions exist.
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    n = g.n_nodes
    edges = list(g.edges)
    topological_order(n, edges)
    succ = [[] for _ in range(n)]
    indeg = [0] * n
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1

    out = Extensions()
    prefix = []
    placed = [False] * n

    def rec():
        if len(prefix) == n:
            if len(out) >= cap:
                out.truncated = True
                return False
            out.append(tuple(prefix))
            return True
        for v in range(n):
            if placed[v] or indeg[v]:
                continue
            placed[v] = True
            prefix.append(v)
            for w in succ[v]:
                indeg[w] -= 1
            keep_going = rec()
            for w in succ[v]:
                indeg[w] += 1
            prefix.pop()
            placed[v] = False
            if not keep_going:
                return False
        return True

    rec()
    return out


def count_extensions(g) -> int:
    """Exact number of linear extensions by dynamic programming over downsets."""
    n = g.n_nodes
    if n > MAX_COUNT_NODES:
        raise SizeLimitExceeded(f"count_extensions supports up to {MAX_COUNT_NODES} nodes, got {n}")
    topological_order(n, g.edges)
    pred_mask = [0] * n
    for u, v in g.edges:
        pred_mask[v] |= 1 << u
    full = (1 << n) - 1
    ways = [0] * (1 << n)
    ways[0] = 1
    for mask in range(full + 1):
        w = ways[mask]
        if not w:
            continue
        for v in range(n):
            bit = 1 << v
            if not mask & bit and pred_mask[v] & mask == pred_mask[v]:
                ways[mask | bit] += w
    return ways[full]


def satisfies_order(sequence, edges) -> bool:
    pos = {v: i for i, v in enumerate(sequence)}
    return all(pos[u] < pos[v] for u, v in edges)
