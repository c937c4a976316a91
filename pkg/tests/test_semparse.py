import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from taskverify.datagen import TaskSpec, enumerate_compositions
from taskverify.dsl import SubTask, TaskGraph, parse_dot, parse_query
from taskverify.errors import NoTemplateMatch, SizeLimitExceeded, UnknownObject, ValidationError
from taskverify.semparse import ged, parse_description
from taskverify.semparse.grammar import (
    RENDER_STYLES,
    load_templates,
    render_description,
)


def edges_as_text(g):
    return {(g.nodes[u].text, g.nodes[v].text) for u, v in g.edges}


def test_two_step_example():
    g = parse_description("apple is heated, then cleaned in a sinkbasin")
    assert [q.text for q in g.nodes] == ["StateQuery(apple,hot)", "StateQuery(apple,clean)"]
    assert g.edges == ((0, 1),)


def test_fork_example():
    g = parse_description("apple is heated in a microwave, then cleaned in a sinkbasin, then sliced, "
                          "and placed in a plate")
    assert sorted(q.text for q in g.nodes) == sorted([
        "StateQuery(apple,hot)", "StateQuery(apple,clean)", "StateQuery(apple,sliced)",
        "RelationQuery(apple,plate,in)"])
    assert edges_as_text(g) == {
        ("StateQuery(apple,hot)", "StateQuery(apple,clean)"),
        ("StateQuery(apple,clean)", "StateQuery(apple,sliced)"),
        ("StateQuery(apple,clean)", "RelationQuery(apple,plate,in)"),
    }


def test_abstract_and():
    g = parse_description("apple is heated and cleaned")
    assert {q.text for q in g.nodes} == {"StateQuery(apple,hot)", "StateQuery(apple,clean)"}
    assert g.edges == ()


def test_after_reverses():
    g = parse_description("apple is cleaned in a SinkBasin after cooling in a Fridge")
    assert edges_as_text(g) == {("StateQuery(apple,cold)", "StateQuery(apple,clean)")}
    a = parse_description("apple is cooled, then cleaned")
    b = parse_description("apple is cleaned after cooling")
    assert a == b


def test_goal_and_prefix_forms():
    g = parse_description("hot, clean apple")
    assert {q.text for q in g.nodes} == {"StateQuery(apple,hot)", "StateQuery(apple,clean)"} and not g.edges
    g = parse_description("sliced apple is heated, then placed on a countertop")
    assert [q.text for q in g.nodes] == ["StateQuery(apple,sliced)", "StateQuery(apple,hot)",
                                         "RelationQuery(apple,countertop,on)"]
    assert g.edges == ((0, 1), (1, 2))


def test_action_scheme():
    g = parse_description("apple is picked up, then placed in a bowl", scheme="action")
    assert [q.text for q in g.nodes] == ["ActionQuery(pick,apple)", "ActionQuery(place,apple,bowl)"]


def test_errors():
    with pytest.raises(NoTemplateMatch):
        parse_description("apple is juggled")
    with pytest.raises(NoTemplateMatch):
        parse_description("")
    with pytest.raises(NoTemplateMatch):
        parse_description("apple is then heated")
    with pytest.raises(UnknownObject):
        parse_description("pineapple is heated")
    g = parse_description("pineapple is heated", strict=False)
    assert g.nodes[0].text == "StateQuery(pineapple,hot)"
    with pytest.raises(UnknownObject):
        parse_description("apple is placed in a spaceship")


def test_template_file_validation(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("full\theated then cooled\theat\n")
    with pytest.raises(ValidationError):
        load_templates(p)
    p.write_text("full\theated\tjuggle\n")
    with pytest.raises(ValidationError):
        load_templates(p)
    p.write_text("# comment\nfull\twarmed up\theat\n")
    (t,) = load_templates(p)
    assert t.action == "heat" and t.pattern == "warmed up"


def _specs(max_n=6):
    """One TaskSpec per composition, on an object affording every action."""
    for comp in enumerate_compositions(max_complexity=max_n):
        groups = [[SubTask(a, "apple", "plate" if a == "place" else None) for a in g] for g in comp]
        yield TaskSpec(tuple(tuple(g) for g in groups))


def test_every_composition_round_trips_in_every_style():
    n = 0
    for spec in _specs():
        g = spec.graph()
        for abstract in (False, True):
            for style in RENDER_STYLES:
                try:
                    text = render_description(spec.groups, style=style, abstract=abstract)
                except ValidationError:
                    continue  # style not applicable to this shape
                parsed = parse_description(text)
                assert parsed == g, text
                assert ged(parsed, g) == 0
                n += 1
    assert n > 10000


def test_then_equals_reversed_after_for_two_groups():
    for a, b in itertools.permutations(["heat", "clean", "slice", "cool"], 2):
        x = parse_description(render_description([[SubTask(a, "apple")], [SubTask(b, "apple")]], "then"))
        y = parse_description(render_description([[SubTask(a, "apple")], [SubTask(b, "apple")]], "after"))
        assert x == y


def test_node_multiset_and_edge_count_match_composition():
    for spec in _specs(4):
        g = parse_description(render_description(spec.groups))
        assert sorted(q.text for q in g.nodes) == sorted(q.text for q in spec.graph().nodes)
        assert len(g.edges) == spec.difficulty.ordering


# graph edit distance

def to_nx(g):
    G = nx.DiGraph()
    for i, q in enumerate(g.nodes):
        G.add_node(i, label=q.text)
    G.add_edges_from(g.edges)
    return G


def nx_ged(g1, g2):
    return nx.graph_edit_distance(to_nx(g1), to_nx(g2), node_match=lambda a, b: a["label"] == b["label"])


def enumerated_ged(g1, g2):
    """Every partial injection of g1's nodes into g2's; unmapped g1 nodes are
    deleted, unmatched g2 nodes inserted, edges fixed up at unit cost."""
    n1, n2 = g1.n_nodes, g2.n_nodes
    e1, e2 = set(g1.edges), set(g2.edges)
    best = None
    for image in itertools.product(range(-1, n2), repeat=n1):
        used = [t for t in image if t >= 0]
        if len(used) != len(set(used)):
            continue
        cost = 0
        for i, t in enumerate(image):
            cost += 1 if t < 0 else int(g1.nodes[i].text != g2.nodes[t].text)
        cost += n2 - len(used)
        mapped = set()
        for u, v in e1:
            if image[u] >= 0 and image[v] >= 0 and (image[u], image[v]) in e2:
                mapped.add((image[u], image[v]))
            else:
                cost += 1
        cost += len(e2 - mapped)
        best = cost if best is None else min(best, cost)
    return best


LABELS = ["StateQuery(apple,hot)", "StateQuery(apple,clean)", "StateQuery(apple,sliced)",
          "RelationQuery(apple,plate,in)"]


@st.composite
def small_graphs(draw, max_nodes=4):
    n = draw(st.integers(1, max_nodes))
    nodes = tuple(parse_query(draw(st.sampled_from(LABELS))) for _ in range(n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u < v]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    perm = draw(st.permutations(range(n)))
    return TaskGraph(tuple(nodes[perm.index(i)] for i in range(n)), tuple((perm[u], perm[v]) for u, v in edges))


@settings(max_examples=40)
@given(small_graphs(), small_graphs())
def test_ged_matches_independent_oracles(g1, g2):
    d = ged(g1, g2)
    assert d == enumerated_ged(g1, g2)
    assert d == nx_ged(g1, g2)
    assert d == ged(g2, g1)


@given(small_graphs())
def test_ged_identity_and_insertion(g):
    assert ged(g, g) == 0
    bigger = TaskGraph(g.nodes + (parse_query("StateQuery(apple,cold)"),), g.edges)
    assert ged(g, bigger) == 1


def test_ged_small_pair():
    g1 = parse_dot("Step 0: StateQuery(apple,hot)\nStep 1: StateQuery(apple,clean)\nStep 0 -> Step 1\n")
    g2 = parse_dot("Step 0: StateQuery(apple,hot)\nStep 1: StateQuery(apple,cold)\n")
    assert ged(g1, g2) == 2  # relabel one node, delete one edge


def test_ged_size_limit():
    big = TaskGraph(tuple(parse_query("StateQuery(apple,hot)") for _ in range(9)), ())
    with pytest.raises(SizeLimitExceeded):
        ged(big, big)
