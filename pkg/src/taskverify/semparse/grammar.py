"""Template grammar mapping task descriptions to task graphs.

A description is a subject followed by clauses joined by ordering
specifiers::

    [adjectives] <object> is <clause> (<specifier> <clause>)*
    <adjective>, <adjective> ... <object>          # goal-oriented, unordered

Each clause must match one line of the template file. Specifiers build
ordering groups: ``and`` (or a bare comma) adds the clause to the current
group, ``then``/``before`` open the next group, and ``X after Y`` puts the
groups of ``Y`` before those of ``X``. Every node of a group precedes every
node of the next group.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from taskverify import vocab
from taskverify.dsl import IDENT, SubTask, TaskGraph, subtask_query
from taskverify.errors import NoTemplateMatch, UnknownObject, ValidationError

ARTICLES = frozenset({"a", "an", "the"})
SPECIFIERS = frozenset({"and", "then", "before", "after", ","})
FORMS = ("full", "full_gerund", "abstract", "abstract_gerund", "goal", "alias")


@dataclass(frozen=True)
class Template:
    form: str
    pattern: str
    action: str
    regex: re.Pattern

    def render(self, receptacle: Optional[str] = None) -> str:
        text = self.pattern
        if "{recep}" in text:
            if receptacle is None:
                raise ValidationError(f"template {self.pattern!r} needs a receptacle")
            text = text.replace("{rel}", vocab.RECEPTACLES.get(receptacle, "in"))
            text = text.replace("{recep}", receptacle)
        return text


def _normalize_tokens(text: str) -> list:
    text = text.lower().strip().rstrip(".")
    text = text.replace(",", " , ")
    return [t for t in text.split() if t not in ARTICLES]


def _compile(pattern: str) -> re.Pattern:
    parts = []
    for tok in _normalize_tokens(pattern):
        if tok == "{recep}":
            parts.append(r"(?P<recep>[a-z0-9_]+)")
        elif tok == "{rel}":
            parts.append(r"(?:in|on)")
        else:
            parts.append(re.escape(tok))
    return re.compile(" ".join(parts) + r"\Z")


def load_templates(path=None) -> tuple:
    """Read a template file (``form TAB pattern TAB action`` per line)."""
    if path is None:
        text = resources.files("taskverify.semparse").joinpath("templates.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ValidationError(f"template line {lineno}: expected 3 tab-separated columns")
        form, pattern, action = (c.strip() for c in cols)
        if form not in FORMS:
            raise ValidationError(f"template line {lineno}: unknown form {form!r}")
        if action not in vocab.ACTIONS:
            raise ValidationError(f"template line {lineno}: unknown action {action!r}")
        if SPECIFIERS & set(_normalize_tokens(pattern)):
            raise ValidationError(f"template line {lineno}: pattern contains a specifier word")
        out.append(Template(form, pattern, action, _compile(pattern)))
    return tuple(out)


@dataclass(frozen=True)
class Grammar:
    templates: tuple
    objects: frozenset = frozenset(vocab.OBJECTS)
    receptacles: frozenset = frozenset(vocab.RECEPTACLES)

    def for_form(self, form: str, action: str) -> Template:
        for t in self.templates:
            if t.form == form and t.action == action:
                return t
        raise NoTemplateMatch(f"no {form} template for action {action!r}")

    def match_clause(self, tokens, goal: bool = False):
        text = " ".join(tokens)
        for t in self.templates:
            if (t.form == "goal") != goal:
                continue
            m = t.regex.match(text)
            if m:
                return t, m.groupdict().get("recep")
        raise NoTemplateMatch(f"no template matches {text!r}")


_DEFAULT: Optional[Grammar] = None


def default_grammar() -> Grammar:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Grammar(load_templates())
    return _DEFAULT


def _chunks(tokens):
    """Split into alternating (clause tokens, specifier) runs."""
    clauses, specs = [], []
    cur = []
    spec_run = []
    for tok in tokens:
        if tok in SPECIFIERS:
            if cur:
                clauses.append(cur)
                cur = []
            spec_run.append(tok)
        else:
            if spec_run:
                if not clauses:
                    raise NoTemplateMatch(f"description starts with specifier {spec_run[0]!r}")
                specs.append(_strongest(spec_run))
                spec_run = []
            cur.append(tok)
    if spec_run:
        raise NoTemplateMatch(f"dangling specifier {spec_run[-1]!r}")
    if cur:
        clauses.append(cur)
    return clauses, specs


def _strongest(run):
    for word in ("after", "before", "then"):
        if word in run:
            return word
    return "and"


def _check_ident(name, kind, allowed, strict):
    if not IDENT.match(name):
        raise NoTemplateMatch(f"invalid {kind} name {name!r}")
    if strict and name not in allowed:
        raise UnknownObject(f"unknown {kind} {name!r}")


def parse_groups(text: str, grammar: Optional[Grammar] = None, strict: bool = True) -> list:
    """Parse a description into temporally ordered groups of sub-tasks."""
    grammar = grammar or default_grammar()
    tokens = _normalize_tokens(text)
    if not tokens:
        raise NoTemplateMatch("empty description")

    if "is" not in tokens:
        # goal-oriented: "hot, clean apple"
        obj = tokens[-1]
        _check_ident(obj, "object", grammar.objects, strict)
        adjectives, specs = _chunks(tokens[:-1])
        if not adjectives or any(s != "and" for s in specs):
            raise NoTemplateMatch(f"no template matches {text!r}")
        group = [SubTask(grammar.match_clause(a, goal=True)[0].action, obj) for a in adjectives]
        return [group]

    split = tokens.index("is")
    subject, rest = tokens[:split], tokens[split + 1:]
    if not subject or not rest:
        raise NoTemplateMatch(f"no template matches {text!r}")
    obj = subject[-1]
    _check_ident(obj, "object", grammar.objects, strict)

    prefix = []
    if len(subject) > 1:
        adjectives, specs = _chunks(subject[:-1])
        if any(s != "and" for s in specs):
            raise NoTemplateMatch(f"bad adjective list in {text!r}")
        prefix = [SubTask(grammar.match_clause(a, goal=True)[0].action, obj) for a in adjectives]

    clauses, specs = _chunks(rest)
    subtasks = []
    for c in clauses:
        tpl, recep = grammar.match_clause(c)
        if recep is not None:
            _check_ident(recep, "receptacle", grammar.receptacles, strict)
        subtasks.append(SubTask(tpl.action, obj, recep))

    # blocks separated by "after" run in reverse textual order
    blocks = [[[subtasks[0]]]]
    for spec, st in zip(specs, subtasks[1:]):
        if spec == "after":
            blocks.append([[st]])
        elif spec in ("then", "before"):
            blocks[-1].append([st])
        else:
            blocks[-1][-1].append(st)
    groups = [g for block in reversed(blocks) for g in block]
    if prefix:
        groups.insert(0, prefix)
    return groups


def groups_to_graph(groups, scheme: str = "state_relation") -> TaskGraph:
    nodes = []
    edges = []
    prev = []
    for group in groups:
        ids = list(range(len(nodes), len(nodes) + len(group)))
        nodes.extend(subtask_query(st, scheme) for st in group)
        edges.extend((u, v) for u in prev for v in ids)
        prev = ids
    return TaskGraph(tuple(nodes), tuple(edges))


def parse_description(
    text: str,
    grammar: Optional[Grammar] = None,
    strict: bool = True,
    scheme: str = "state_relation",
) -> TaskGraph:
    """Translate a templated task description into a task graph.

    >>> print(parse_description("apple is heated, then cleaned in a sinkbasin"), end="")
    Step 0: StateQuery(apple,hot)
    Step 1: StateQuery(apple,clean)
    Step 0 -> Step 1
    """
    return groups_to_graph(parse_groups(text, grammar, strict), scheme)


def _join(clauses):
    if len(clauses) == 1:
        return clauses[0]
    if len(clauses) == 2:
        return f"{clauses[0]} and {clauses[1]}"
    return ", ".join(clauses[:-1]) + f", and {clauses[-1]}"


RENDER_STYLES = ("then", "before", "after", "prefix", "goal")


def render_description(groups, style: str = "then", abstract: bool = False, grammar: Optional[Grammar] = None) -> str:
    """Render ordered groups of sub-tasks (one target object) as a description.

    ``style`` picks the phrasing: ``then`` chains groups with ", then";
    ``before`` and ``after`` use those specifiers at group boundaries;
    ``prefix`` moves a leading single-step group into an adjective
    ("sliced apple is ..."); ``goal`` lists adjectives ("hot, clean apple")
    and needs a single group without placement.
    """
    grammar = grammar or default_grammar()
    groups = [list(g) for g in groups]
    objs = {st.object for g in groups for st in g}
    if len(objs) != 1:
        raise ValidationError("a description has exactly one target object")
    obj = objs.pop()
    part = "abstract" if abstract else "full"

    def clause(st, gerund=False):
        form = part + ("_gerund" if gerund else "")
        return grammar.for_form(form, st.action).render(st.receptacle)

    def phrase(group, gerund=False):
        return _join([clause(st, gerund) for st in group])

    if style == "goal":
        if len(groups) != 1 or any(st.action == "place" for st in groups[0]):
            raise ValidationError("goal style needs one unordered group without placement")
        adjs = [grammar.for_form("goal", st.action).render() for st in groups[0]]
        return f"{', '.join(adjs)} {obj}"

    if style == "prefix":
        first = groups[0]
        if len(groups) < 2 or len(first) != 1 or first[0].action == "place":
            raise ValidationError("prefix style needs a leading single-step group")
        adj = grammar.for_form("goal", first[0].action).render()
        return f"{adj} {obj} is " + ", then ".join(phrase(g) for g in groups[1:])

    if len(groups) == 1 or style == "then":
        return f"{obj} is " + ", then ".join(phrase(g) for g in groups)

    if style == "before":
        head = f"{phrase(groups[0])} before {phrase(groups[1], gerund=True)}"
        tail = "".join(f", then {phrase(g)}" for g in groups[2:])
        return f"{obj} is {head}{tail}"

    if style == "after":
        earlier = ", then ".join(phrase(g, gerund=True) for g in groups[:-1])
        return f"{obj} is {phrase(groups[-1])} after {earlier}"

    raise ValueError(f"unknown style {style!r}")
