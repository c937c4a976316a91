"""Exact graph edit distance between small task graphs.

Unit costs: inserting, deleting or relabelling a node costs 1, inserting or
deleting a directed edge costs 1. Node labels are query texts; edges carry
no labels, so an edge whose endpoints are both kept is free.
"""

from __future__ import annotations

from collections import Counter

from taskverify.errors import SizeLimitExceeded

MAX_NODES = 8


def _labels(g):
    return [q.text if hasattr(q, "text") else str(q) for q in g.nodes]


def _label_bound(rem1, rem2):
    common = sum((Counter(rem1) & Counter(rem2)).values())
    return max(len(rem1), len(rem2)) - common


def ged(g1, g2, max_nodes: int = MAX_NODES) -> int:
    """Minimum unit-cost edit distance, by branch and bound over node maps."""
    n1, n2 = g1.n_nodes, g2.n_nodes
    if max(n1, n2) > max_nodes:
        raise SizeLimitExceeded(f"exact GED limited to {max_nodes} nodes, got {max(n1, n2)}")
    lab1, lab2 = _labels(g1), _labels(g2)
    e1 = set(g1.edges)
    e2 = set(g2.edges)

    best = n1 + len(e1) + n2 + len(e2)
    mapping = [None] * n1  # g2 node id, or -1 for deleted
    used = [False] * n2

    def finish_cost():
        # g2 edges touching an inserted node
        image = {v for v in mapping if v is not None and v >= 0}
        return (n2 - len(image)) + sum(1 for u, v in e2 if u not in image or v not in image)

    def step_cost(i, target):
        cost = 0
        if target < 0:
            cost += 1
        elif lab1[i] != lab2[target]:
            cost += 1
        for j in range(i):
            tj = mapping[j]
            for a, b, ta, tb in ((i, j, target, tj), (j, i, tj, target)):
                has1 = (a, b) in e1
                if ta < 0 or tb < 0:
                    cost += has1
                else:
                    cost += has1 != ((ta, tb) in e2)
        return cost

    def rec(i, cost):
        nonlocal best
        if i == n1:
            total = cost + finish_cost()
            if total < best:
                best = total
            return
        rem2 = [lab2[v] for v in range(n2) if not used[v]]
        if cost + _label_bound(lab1[i:], rem2) >= best:
            return
        for v in range(n2):
            if used[v]:
                continue
            c = step_cost(i, v)
            used[v] = True
            mapping[i] = v
            rec(i + 1, cost + c)
            used[v] = False
        c = step_cost(i, -1)
        mapping[i] = -1
        rec(i + 1, cost + c)
        mapping[i] = None

    rec(0, 0)
    return best
