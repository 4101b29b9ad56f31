"""Training loop, uncertainty-aware prediction and evaluation metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import opinions as op
from .data import MultiViewDataset
from .dirichlet import (
    CauchySchwarz,
    DimensionError,
    DivergenceKind,
    Holder,
    HolderExponent,
    JensenShannonMC,
    KL,
    UnsupportedError,
)
from .loss import AnnealSchedule, LossBreakdown, lambda_at, total_loss
from .network import MlpConfig, MultiViewModel, build_model, model_backward, model_forward


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-4
    divergence: str = "holder"  # holder | kl | cs | js
    gamma: float = 1.7
    t_anneal: int = 10
    lr_decay: float = 0.5
    lr_decay_every: int | None = None  # default: epochs // 2
    use_pseudo: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.divergence == "holder" and not self.gamma > 1.0:
            raise ValueError("gamma must be > 1 for the Hölder divergence")

    def kind(self) -> DivergenceKind:
        return divergence_kind(self.divergence, self.gamma)


def divergence_kind(name: str, gamma: float = 1.7, samples: int = 100_000, seed: int = 0) -> DivergenceKind:
    name = name.lower()
    if name == "holder":
        return Holder(HolderExponent(gamma))
    if name == "kl":
        return KL()
    if name in ("cs", "cauchy-schwarz"):
        return CauchySchwarz()
    if name in ("js", "js-mc"):
        return JensenShannonMC(samples, seed)
    raise ValueError(f"unknown divergence {name!r}")


class Adam:
    """Adam with bias correction and decoupled weight decay."""

    def __init__(self, params: list[np.ndarray], beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.0):
        self.params = params
        self.beta1, self.beta2, self.eps, self.weight_decay = beta1, beta2, eps, weight_decay
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray], lr: float) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            if self.weight_decay:
                p -= lr * self.weight_decay * p


def default_architecture(ds: MultiViewDataset, hidden: Sequence[int] = (16,), seed: int = 0) -> list[MlpConfig]:
    return [MlpConfig(d, tuple(hidden), ds.num_classes, seed + i) for i, d in enumerate(ds.view_dims)]


def train(ds: MultiViewDataset, arch: Sequence[MlpConfig], cfg: TrainConfig,
          pseudo_hidden: Sequence[int] = ()):
    """Train a multi-view model; returns ``(model, history)``.

    ``history`` holds the sample-weighted mean LossBreakdown of each epoch.
    """
    kind = cfg.kind()
    if isinstance(kind, JensenShannonMC):
        raise UnsupportedError("JS-MC divergence is evaluation-only and cannot drive training")
    arch = list(arch)
    if len(arch) != ds.num_views:
        raise DimensionError(f"{len(arch)} view configs for {ds.num_views} views")
    for c, d in zip(arch, ds.view_dims):
        if c.input_dim != d or c.num_classes != ds.num_classes:
            raise DimensionError(f"config {c} does not match view dim {d} / K={ds.num_classes}")
    model = build_model(arch, tuple(pseudo_hidden) if cfg.use_pseudo else None)
    params = model.parameter_arrays()
    opt = Adam(params, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay)
    schedule = AnnealSchedule(cfg.t_anneal)
    decay_every = cfg.lr_decay_every or max(1, cfg.epochs // 2)
    rng = np.random.default_rng(cfg.seed)
    history = []
    for epoch in range(cfg.epochs):
        lam = lambda_at(schedule, epoch)
        lr = cfg.learning_rate * cfg.lr_decay ** (epoch // decay_every)
        order = rng.permutation(ds.n)
        sums = None
        for start in range(0, ds.n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            fp = model_forward(model, [v[rows] for v in ds.views])
            res = total_loss(fp.view_evidence, fp.pseudo_evidence, ds.labels[rows], lam, kind)
            grads = model_backward(model, fp, res.view_grads, res.pseudo_grad)
            opt.step(grads, lr)
            b = res.breakdown
            w = rows.size
            vec = np.array([b.fused, b.pseudo, *b.per_view]) * w
            sums = vec if sums is None else sums + vec
        sums /= ds.n
        history.append(LossBreakdown(float(sums[0]), float(sums[1]), [float(x) for x in sums[2:]]))
    return model, history


@dataclass
class Prediction:
    fused_beliefs: np.ndarray  # (n, K)
    fused_uncertainty: np.ndarray  # (n,)
    view_beliefs: list[np.ndarray]
    view_uncertainty: list[np.ndarray]
    pseudo_beliefs: np.ndarray | None
    pseudo_uncertainty: np.ndarray | None


def predict(model: MultiViewModel, x_views) -> Prediction:
    """Batched opinions; fused = views folded left to right, then pseudo."""
    fp = model_forward(model, x_views)
    vb, vu = zip(*(op.opinions_from_evidence(e) for e in fp.view_evidence))
    bs, us = list(vb), list(vu)
    pb = pu = None
    if fp.pseudo_evidence is not None:
        pb, pu = op.opinions_from_evidence(fp.pseudo_evidence)
        bs.append(pb)
        us.append(pu)
    fb, fu, _ = op.combine_all_arrays(bs, us)
    return Prediction(fb, fu, list(vb), list(vu), pb, pu)


def predict_with_uncertainty(model: MultiViewModel, x_views):
    """Single-sample opinions: ``(fused, per_view, pseudo)``; pseudo is None
    when the model has no pseudo-view net."""
    p = predict(model, [np.asarray(x, dtype=float)[None, :] for x in x_views])
    fused = op.Opinion(p.fused_beliefs[0], float(p.fused_uncertainty[0]))
    views = [op.Opinion(b[0], float(u[0])) for b, u in zip(p.view_beliefs, p.view_uncertainty)]
    pseudo = None if p.pseudo_beliefs is None else op.Opinion(p.pseudo_beliefs[0], float(p.pseudo_uncertainty[0]))
    return fused, views, pseudo


def confusion_matrix(pred, true, k: int) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (np.asarray(true, dtype=int), np.asarray(pred, dtype=int)), 1)
    return cm


def macro_scores(cm: np.ndarray) -> dict:
    """Macro precision, recall and F1 from a confusion matrix.

    A class never predicted (or absent) scores 0 for that ratio. Macro F1 is
    the mean of per-class F1 values.
    """
    cm = np.asarray(cm, dtype=float)
    tp = np.diag(cm)
    pred_tot = cm.sum(axis=0)
    true_tot = cm.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(pred_tot > 0, tp / pred_tot, 0.0)
        rec = np.where(true_tot > 0, tp / true_tot, 0.0)
        f1 = np.where(prec + rec > 0, 2 * prec * rec / (prec + rec), 0.0)
    return {
        "accuracy": float(tp.sum() / cm.sum()),
        "precision": float(prec.mean()),
        "recall": float(rec.mean()),
        "f1": float(f1.mean()),
    }


@dataclass
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_view_accuracy: list[float]
    pseudo_accuracy: float | None
    fused_accuracy: float
    mean_uncertainty: float

    def to_json(self) -> dict:
        return asdict(self)


def evaluate(model: MultiViewModel, ds: MultiViewDataset) -> Metrics:
    """Metrics from fused-belief argmax (ties go to the lowest class index)."""
    if ds.n == 0:
        raise ValueError("empty dataset")
    p = predict(model, ds.views)
    pred = np.argmax(p.fused_beliefs, axis=1)
    scores = macro_scores(confusion_matrix(pred, ds.labels, ds.num_classes))
    per_view = [float(np.mean(np.argmax(b, axis=1) == ds.labels)) for b in p.view_beliefs]
    pseudo = None if p.pseudo_beliefs is None else float(np.mean(np.argmax(p.pseudo_beliefs, axis=1) == ds.labels))
    return Metrics(
        accuracy=scores["accuracy"],
        precision=scores["precision"],
        recall=scores["recall"],
        f1=scores["f1"],
        per_view_accuracy=per_view,
        pseudo_accuracy=pseudo,
        fused_accuracy=scores["accuracy"],
        mean_uncertainty=float(p.fused_uncertainty.mean()),
    )


def clustering_accuracy(pred_labels, true_labels) -> float:
    """Best-permutation match rate, solved as an assignment problem."""
    pred = np.asarray(pred_labels)
    true = np.asarray(true_labels)
    if pred.size == 0:
        raise ValueError("clustering_accuracy needs at least one label")
    if pred.shape != true.shape:
        raise DimensionError("pred and true label arrays differ in length")
    ps, pi = np.unique(pred, return_inverse=True)
    ts, ti = np.unique(true, return_inverse=True)
    counts = np.zeros((ps.size, ts.size), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    rows, cols = linear_sum_assignment(counts, maximize=True)
    return float(counts[rows, cols].sum() / pred.size)
