from taskverify.semparse.ged import ged
from taskverify.semparse.grammar import (
    Grammar,
    default_grammar,
    groups_to_graph,
    load_templates,
    parse_description,
    parse_groups,
    render_description,
)

__all__ = [
    "Grammar",
    "default_grammar",
    "ged",
    "groups_to_graph",
    "load_templates",
    "parse_description",
    "parse_groups",
    "render_description",
]
