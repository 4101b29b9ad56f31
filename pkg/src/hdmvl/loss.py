"""Training objective: fused, pseudo-view and per-view evidential terms.

Each term is the negated expected log-likelihood of the label under the
Dirichlet plus an annealed divergence between the label-removed Dirichlet and
the uniform one:

    psi(S) - psi(a_y) + lambda * D[Dir(a_tilde) || Dir(1, ..., 1)]

The loss is minimized. All functions here are batched over rows; reported
values are batch means and gradients are gradients of those means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import opinions as op
from .dirichlet import (
    CauchySchwarz,
    DimensionError,
    DirichletParams,
    DivergenceKind,
    Holder,
    HolderExponent,
    JensenShannonMC,
    KL,
    UnsupportedError,
)
from .specfun import DomainError, digamma, log_gamma, trigamma


@dataclass(frozen=True)
class AnnealSchedule:
    t_anneal: int = 10

    def __post_init__(self):
        if self.t_anneal < 1:
            raise ValueError("t_anneal must be >= 1")


def lambda_at(schedule: AnnealSchedule, epoch: float) -> float:
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return min(1.0, epoch / schedule.t_anneal)


@dataclass
class LossBreakdown:
    fused: float
    pseudo: float
    per_view: list[float] = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.fused + self.pseudo + sum(self.per_view)

    def to_json(self) -> dict:
        return {"fused": self.fused, "pseudo": self.pseudo, "per_view": list(self.per_view),
                "total": self.total}


def _labels(labels, n, k):
    y = np.asarray(labels, dtype=int).reshape(-1)
    if y.size == 1 and n > 1:
        y = np.full(n, int(y[0]))
    if y.size != n:
        raise DimensionError(f"{y.size} labels for {n} rows")
    if np.any((y < 0) | (y >= k)):
        raise DimensionError(f"label out of range for K={k}")
    return y


def _rows(a):
    a = np.asarray(a, dtype=float)
    return a[None, :] if a.ndim == 1 else a


def adjusted_concentration(a, label):
    """Replace the label's concentration with 1 (its evidence removed)."""
    single = isinstance(a, DirichletParams) or np.ndim(a) == 1
    arr = _rows(a.concentration if isinstance(a, DirichletParams) else a).copy()
    y = _labels(label, arr.shape[0], arr.shape[1])
    arr[np.arange(arr.shape[0]), y] = 1.0
    if single:
        return DirichletParams(arr[0]) if isinstance(a, DirichletParams) else arr[0]
    return arr


def _log_norm_rows(a):
    return log_gamma(a).sum(axis=1) - log_gamma(a.sum(axis=1))


def uniform_divergence(a_tilde, kind: DivergenceKind):
    """Row-wise D[Dir(a_tilde) || uniform] and its gradient w.r.t. a_tilde."""
    if isinstance(kind, CauchySchwarz):
        kind = Holder(HolderExponent(2.0))
    if isinstance(kind, Holder):
        g = kind.exponent.gamma
        # q is uniform (theta_q = 0): its term is the constant F(0) = -lnΓ(K)
        k = a_tilde.shape[1]
        scaled = g * (a_tilde - 1.0) + 1.0
        value = (_log_norm_rows(scaled) / g - _log_norm_rows(a_tilde)
                 - float(log_gamma(float(k))) / kind.exponent.conjugate)
        grad = (digamma(scaled) - digamma(scaled.sum(axis=1))[:, None]) - (
            digamma(a_tilde) - digamma(a_tilde.sum(axis=1))[:, None]
        )
        return value, grad
    if isinstance(kind, KL):
        k = a_tilde.shape[1]
        s = a_tilde.sum(axis=1)
        diff = a_tilde - 1.0
        value = (log_gamma(s) - log_gamma(a_tilde).sum(axis=1) - log_gamma(float(k))
                 + (diff * (digamma(a_tilde) - digamma(s)[:, None])).sum(axis=1))
        grad = diff * trigamma(a_tilde) - (trigamma(s) * diff.sum(axis=1))[:, None]
        return value, grad
    if isinstance(kind, JensenShannonMC):
        raise UnsupportedError("the Monte Carlo JS divergence cannot be used in the training loss")
    raise TypeError(f"unknown divergence kind {kind!r}")


def evidential_terms(a, labels, lam: float, kind: DivergenceKind):
    """Per-row evidential term values (n,) and gradients w.r.t. a (n, K)."""
    a = _rows(a)
    if np.any(~(a >= 1.0)):
        raise DomainError("concentrations must be >= 1 (a = evidence + 1)")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    n, k = a.shape
    y = _labels(labels, n, k)
    idx = np.arange(n)
    s = a.sum(axis=1)
    value = digamma(s) - digamma(a[idx, y])
    grad = np.repeat(trigamma(s)[:, None], k, axis=1)
    grad[idx, y] -= trigamma(a[idx, y])
    if lam > 0:
        a_tilde = a.copy()
        a_tilde[idx, y] = 1.0
        reg, reg_grad = uniform_divergence(a_tilde, kind)
        reg_grad[idx, y] = 0.0
        value = value + lam * reg
        grad = grad + lam * reg_grad
    return value, grad


def evidential_term(a, label: int, lam: float, kind: DivergenceKind):
    """Single-sample form: ``(value, grad_wrt_a)``."""
    arr = a.concentration if isinstance(a, DirichletParams) else np.asarray(a, dtype=float)
    v, g = evidential_terms(arr[None, :], [label], lam, kind)
    return float(v[0]), g[0]


@dataclass
class LossResult:
    breakdown: LossBreakdown
    view_grads: list[np.ndarray]
    pseudo_grad: np.ndarray | None
    fused_beliefs: np.ndarray
    fused_uncertainty: np.ndarray


def total_loss(view_evidence, pseudo_evidence, labels, lam: float, kind: DivergenceKind) -> LossResult:
    """Batch-mean loss and gradients w.r.t. every evidence array.

    The fused opinion combines the view opinions left to right, then the
    pseudo-view opinion (when ``pseudo_evidence`` is given). Its Dirichlet
    is recovered with ``a = 1 + K b / u`` and the fused gradient is
    propagated back through the fusion rule.
    """
    evs = [_rows(e) for e in view_evidence]
    if not evs:
        raise DimensionError("need at least one view")
    all_evs = evs + ([_rows(pseudo_evidence)] if pseudo_evidence is not None else [])
    n, k = all_evs[0].shape
    if any(e.shape != (n, k) for e in all_evs):
        raise DimensionError(f"evidence shapes disagree: {[e.shape for e in all_evs]}")
    y = _labels(labels, n, k)

    grads = []
    per_view = []
    for e in all_evs:
        v, g = evidential_terms(e + 1.0, y, lam, kind)
        per_view.append(float(v.mean()))
        grads.append(g / n)

    bs, us = zip(*(op.opinions_from_evidence(e) for e in all_evs))
    fb, fu, trail = op.combine_all_arrays(list(bs), list(us))
    a_fused = op.dirichlet_from_opinion_arrays(fb, fu)
    v, ga = evidential_terms(a_fused, y, lam, kind)
    fused = float(v.mean())
    gb, gu = op.dirichlet_from_opinion_arrays_backward(fb, fu, ga / n)
    gbs, gus = op.combine_all_arrays_backward(list(bs), list(us), trail, gb, gu)
    for i, e in enumerate(all_evs):
        grads[i] = grads[i] + op.opinions_from_evidence_backward(e, gbs[i], gus[i])

    if pseudo_evidence is not None:
        breakdown = LossBreakdown(fused, per_view[-1], per_view[:-1])
        return LossResult(breakdown, grads[:-1], grads[-1], fb, fu)
    return LossResult(LossBreakdown(fused, 0.0, per_view), grads, None, fb, fu)
