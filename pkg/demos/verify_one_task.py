"""Walk one task through the whole pipeline.

A description is parsed into a task graph, a synthetic trace is generated
for it, and the trace is verified with the annotation-reading scorer. Then
the trace is tampered with (one sub-task block dropped) and verified again.

    python3 demos/verify_one_task.py
"""

import numpy as np

from taskverify.aligner import segment, verify
from taskverify.datagen import TaskSpec, execute_plan, make_negative, make_positive
from taskverify.dsl import SubTask, graph_to_dot
from taskverify.graph import linear_extensions
from taskverify.scorer import OracleScorer
from taskverify.semparse import parse_description

text = "apple is heated in a microwave, then cleaned in a sinkbasin and sliced with a knife, then placed in a plate"
g = parse_description(text)
print(text)
print(graph_to_dot(g))
print("orders that satisfy the graph:", list(linear_extensions(g)))

spec = TaskSpec((
    (SubTask("heat", "apple"),),
    (SubTask("clean", "apple"), SubTask("slice", "apple")),
    (SubTask("place", "apple", "plate"),),
))
trace = execute_plan(spec, np.random.default_rng(7), trace_id="demo")
print(f"\ntrace: {len(trace)} frames, {len(segment(trace))} segments of 20 frames")
for e in sorted(trace.events, key=lambda e: e.start):
    print(f"  frames {e.start:3d}-{e.end:3d}  {e.action}({e.object}{', ' + e.receptacle if e.receptacle else ''})")

scorer = OracleScorer()
v = verify(g, trace, scorer)
print(f"\nverify: p={v.probability:.4f} -> {'verified' if v.label else 'not verified'}")
print("  chosen order:", v.best_extension, " query -> segment:", dict(sorted(v.query_segments.items())))

pos = make_positive(spec, np.random.default_rng(7), "train", "demo", style="then")
neg = make_negative(pos, "trace_dropped", np.random.default_rng(1))
v = verify(neg.graph, neg.trace, scorer)
print(f"\nwith one block dropped: p={v.probability:.4f} -> {'verified' if v.label else 'not verified'}")

noisy = OracleScorer(noise=0.1, seed=3)
v = verify(g, trace, noisy)
print(f"original trace, scorer flipping 10% of answers: p={v.probability:.4f}")
