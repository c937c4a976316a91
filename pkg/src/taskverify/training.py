"""Training the parametric scorer by alternating alignment and gradient steps.

Each mini-batch runs two steps:

1. with parameters frozen, pick the best extension and alignment of every
   sample (the same search :func:`taskverify.aligner.verify` performs);
2. with those choices frozen, take one Adam step on the mean binary
   cross-entropy between ``p = sigmoid(mean aligned log-score)`` and the label.

Gradients flow only through the score entries selected in step 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from taskverify.aligner import DEFAULT_K, segment, verify_scores
from taskverify.errors import EmptyDataset, NonFiniteLoss, TooFewSegments
from taskverify.graph import DEFAULT_CAP, linear_extensions
from taskverify.scorer import LOGIT_MAX, ParametricScorer


class Adam:
    """Adam over a dict of arrays, updated in place."""

    def __init__(self, params: dict, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for k in sorted(params):
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


@dataclass
class Prepared:
    """A sample reduced to what training needs."""

    queries: tuple
    features: np.ndarray  # (S, d) mean-pooled segments
    extensions: list
    label: float
    sample_id: str = ""


def prepare(sample, k: int = DEFAULT_K, cap: int = DEFAULT_CAP, scheme: str = "state_relation") -> Prepared:
    g = sample.graph.to_scheme(scheme)
    seg = segment(sample.trace, k)
    if g.n_nodes > len(seg):
        raise TooFewSegments(f"{sample.id}: {g.n_nodes} queries, {len(seg)} segments")
    return Prepared(g.nodes, seg.features, list(linear_extensions(g, cap)), float(sample.label), sample.id)


def _softplus(x: float) -> float:
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def logit_matrix(scorer: ParametricScorer, prep: Prepared) -> np.ndarray:
    return np.stack([scorer.logits(q, prep.features) for q in prep.queries])


def score_matrix(scorer: ParametricScorer, prep: Prepared) -> np.ndarray:
    ell = logit_matrix(scorer, prep)
    if not np.isfinite(ell).all():
        raise NonFiniteLoss(f"{prep.sample_id}: non-finite logits; parameters have diverged")
    ell = np.clip(ell, -LOGIT_MAX, LOGIT_MAX)
    return -np.logaddexp(0.0, -ell)


def alignment_step(scorer: ParametricScorer, prep: Prepared) -> list:
    """Step 1: the (node, segment) pairs of the best extension's alignment."""
    v = verify_scores(score_matrix(scorer, prep), prep.extensions)
    return [(node, t) for node, t in zip(v.best_extension, v.best_alignment.assignment)]


def pairs_loss_and_grad(scorer: ParametricScorer, prep: Prepared, pairs, want_grad: bool = True):
    """BCE of one sample with the alignment frozen to ``pairs``.

    Returns ``(loss, grads)``; ``grads`` has the keys of ``scorer.params``
    (or is None when ``want_grad`` is false).
    """
    n = len(pairs)
    ells = np.array([float(scorer.logits(prep.queries[j], prep.features[t])) for j, t in pairs])
    clipped = np.abs(ells) >= LOGIT_MAX
    ells = np.clip(ells, -LOGIT_MAX, LOGIT_MAX)
    m = float(np.mean(-np.logaddexp(0.0, -ells)))
    y = prep.label
    loss = y * _softplus(-m) + (1 - y) * _softplus(m)
    if not want_grad:
        return loss, None
    dm = float(_sigmoid(m)) - y
    dell = dm * (1.0 - _sigmoid(ells)) / n
    dell[clipped] = 0.0
    grads = {key: np.zeros_like(val) for key, val in scorer.params.items()}
    for (j, t), g in zip(pairs, dell):
        if g == 0.0:
            continue
        q = prep.queries[j]
        f = prep.features[t]
        name = q.qtype.value
        idx = scorer.encoder.indices(q)
        # repeated indices accumulate
        np.add.at(grads[f"{name}/W"], idx, g * f)
        np.add.at(grads[f"{name}/v"], idx, g)
        grads[f"{name}/c"] += g * f
        grads[f"{name}/b"] += g
    return loss, grads


def sample_loss(scorer: ParametricScorer, prep: Prepared) -> float:
    """Full per-sample loss: BCE of the max-over-extensions probability."""
    return pairs_loss_and_grad(scorer, prep, alignment_step(scorer, prep), want_grad=False)[0]


def sample_loss_and_grad(scorer: ParametricScorer, prep: Prepared):
    return pairs_loss_and_grad(scorer, prep, alignment_step(scorer, prep))


@dataclass
class TrainResult:
    scorer: ParametricScorer
    epoch_loss: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def train(
    samples,
    scorer: ParametricScorer,
    lr: float = 1e-3,
    epochs: int = 50,
    batch: int = 64,
    seed: int = 0,
    k: int = DEFAULT_K,
    cap: int = DEFAULT_CAP,
    scheme: str = "state_relation",
    log=None,
) -> TrainResult:
    """Train a copy of ``scorer``; the argument is left untouched.

    Samples whose graph has more nodes than the trace has segments are
    skipped and listed in ``TrainResult.skipped``.
    """
    prepared, skipped = [], []
    for s in samples:
        try:
            prepared.append(prepare(s, k, cap, scheme))
        except TooFewSegments:
            skipped.append(s.id)
    if not prepared:
        raise EmptyDataset("no trainable samples")
    model = scorer.copy()
    opt = Adam(model.params, lr=lr)
    rng = np.random.default_rng(seed)
    result = TrainResult(model, [], skipped)
    for epoch in range(epochs):
        order = rng.permutation(len(prepared))
        total = 0.0
        for start in range(0, len(order), batch):
            chunk = [prepared[i] for i in order[start:start + batch]]
            # step 1: alignments under frozen parameters
            frozen = [alignment_step(model, p) for p in chunk]
            # step 2: one Adam step on the mean loss with alignments frozen
            grads = {key: np.zeros_like(v) for key, v in model.params.items()}
            batch_loss = 0.0
            for p, pairs in zip(chunk, frozen):
                loss, g = pairs_loss_and_grad(model, p, pairs)
                batch_loss += loss
                for key in grads:
                    grads[key] += g[key]
            if not math.isfinite(batch_loss):
                raise NonFiniteLoss(f"epoch {epoch}, batch at {start}: loss {batch_loss}")
            for key in grads:
                grads[key] /= len(chunk)
            opt.step(model.params, grads)
            total += batch_loss
        result.epoch_loss.append(total / len(prepared))
        if log is not None:
            log(f"epoch {epoch + 1}/{epochs} loss {result.epoch_loss[-1]:.6f}")
    return result
