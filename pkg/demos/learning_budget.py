"""How far does the parametric scorer get with 400 optimizer steps?

500 training samples at batch 64 give 8 steps per epoch, so 50 epochs are
400 Adam steps. Adam moves each parameter by roughly ``lr`` per step, so at
lr 1e-3 no weight can travel much further than 0.4. The one-hot segment
features have amplitude 1, which caps how far a logit can move. This
script trains the same model at several learning rates and prints
held-out F1 along with the best F1 any threshold could reach.

    python3 demos/learning_budget.py [--lrs 1e-3 1e-2 3e-2]
"""

import argparse
import time

import numpy as np

from taskverify.datagen import DatasetConfig, build_dataset
from taskverify.evaluation import evaluate
from taskverify.scorer import ParametricScorer
from taskverify.training import train


def best_threshold_f1(preds):
    ps = np.array([p.probability if p.probability is not None else 0.0 for p in preds])
    ys = np.array([p.label for p in preds])
    best = 0.0
    for t in np.unique(ps):
        pred = ps >= t
        tp = np.sum(pred & ys)
        if tp:
            prec, rec = tp / pred.sum(), tp / ys.sum()
            best = max(best, 2 * prec * rec / (prec + rec))
    return best


ap = argparse.ArgumentParser()
ap.add_argument("--lrs", type=float, nargs="+", default=[1e-3, 1e-2, 3e-2])
ap.add_argument("--epochs", type=int, default=50)
args = ap.parse_args()

ds = build_dataset(DatasetConfig(sizes={"train": 500, "val": 200, "novel_tasks": 200}, seed=5))
init = ParametricScorer.initialized(ds.config.trace.d, seed=0, scale=0.01)
print(f"{'lr':>8} {'loss':>7} {'val F1':>7} {'novel F1':>8} {'val best-t F1':>13} {'max |W|':>8} {'secs':>5}")
for lr in args.lrs:
    t0 = time.perf_counter()
    res = train(ds.split("train"), init, lr=lr, epochs=args.epochs, batch=64, seed=0)
    secs = time.perf_counter() - t0
    val = evaluate(ds.split("val"), res.scorer)
    novel = evaluate(ds.split("novel_tasks"), res.scorer)
    wmax = max(np.abs(v).max() for k, v in res.scorer.params.items() if k.endswith("/W"))
    print(f"{lr:8.0e} {res.epoch_loss[-1]:7.4f} {val.overall.f1:7.3f} {novel.overall.f1:8.3f} "
          f"{best_threshold_f1(val.predictions):13.3f} {wmax:8.3f} {secs:5.0f}")
