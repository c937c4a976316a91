"""Closed vocabularies shared by the parser, the generator and the scorers."""

ACTIONS = ("heat", "clean", "slice", "cool", "place", "pick")
STATES = ("hot", "cold", "clean", "sliced", "picked")
RELATIONS = ("in", "on")

# state reached by each state-changing action; `place` is a relation instead
ACTION_STATE = {
    "heat": "hot",
    "cool": "cold",
    "clean": "clean",
    "slice": "sliced",
    "pick": "picked",
}
STATE_ACTION = {s: a for a, s in ACTION_STATE.items()}

_ALL = frozenset(ACTIONS)

# target object -> actions it affords; heat(book) never occurs
OBJECT_ACTIONS = {
    "apple": _ALL,
    "tomato": _ALL,
    "potato": _ALL,
    "bread": frozenset({"heat", "cool", "slice", "pick", "place"}),
    "lettuce": frozenset({"cool", "clean", "slice", "pick", "place"}),
    "egg": frozenset({"heat", "cool", "clean", "pick", "place"}),
    "mug": frozenset({"heat", "cool", "clean", "pick", "place"}),
    "cup": frozenset({"heat", "cool", "clean", "pick", "place"}),
    "plate": frozenset({"clean", "pick", "place"}),
    "book": frozenset({"pick", "place"}),
}
OBJECTS = tuple(OBJECT_ACTIONS)

# receptacle -> relation used by RelationQuery
RECEPTACLES = {
    "plate": "in",
    "bowl": "in",
    "pan": "in",
    "pot": "in",
    "cabinet": "in",
    "countertop": "on",
    "diningtable": "on",
    "shelf": "on",
}

# appliance mentioned by full (non-abstract) descriptions
APPLIANCES = {
    "heat": "microwave",
    "cool": "fridge",
    "clean": "sinkbasin",
    "slice": "knife",
}
