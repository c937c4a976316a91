"""State+Relation queries against Action queries on the same data.

Each task graph can be posed either as checks on the resulting object
state (``StateQuery``/``RelationQuery``) or as checks for the action
itself (``ActionQuery``). This trains one scorer per scheme with identical
settings and reports held-out F1 for both. The synthetic features encode
events and objects equally well for both schemes, so no gap is expected
here; the point is that the comparison runs end to end.

    python3 demos/query_comparison.py [--lr 3e-2]
"""

import argparse

from taskverify.datagen import DatasetConfig, build_dataset
from taskverify.evaluation import evaluate
from taskverify.scorer import ParametricScorer
from taskverify.training import train

ap = argparse.ArgumentParser()
ap.add_argument("--lr", type=float, default=3e-2)
ap.add_argument("--epochs", type=int, default=50)
args = ap.parse_args()

ds = build_dataset(DatasetConfig(sizes={"train": 500, "val": 200, "novel_tasks": 200, "novel_steps": 200}, seed=5))
init = ParametricScorer.initialized(ds.config.trace.d, seed=0, scale=0.01)
for scheme in ("state_relation", "action"):
    res = train(ds.split("train"), init, lr=args.lr, epochs=args.epochs, seed=0, scheme=scheme)
    cells = []
    for split in ("val", "novel_tasks", "novel_steps"):
        rep = evaluate(ds.split(split), res.scorer, scheme=scheme)
        cells.append(f"{split} F1 {rep.overall.f1:.3f}")
    print(f"{scheme:>15}: " + ", ".join(cells))
