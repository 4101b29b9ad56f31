"""Subjective-logic opinions and the reduced Dempster–Shafer combination.

An opinion over K classes is a belief vector ``b`` plus an uncertainty mass
``u`` with ``sum(b) + u == 1``. Evidence ``e >= 0`` maps to an opinion through
the Dirichlet ``a = e + 1``: ``b = e / S``, ``u = K / S`` with ``S = sum(a)``.

The ``*_backward`` helpers are vector-Jacobian products used by the loss to
differentiate through fusion. They work row-wise on ``(n, K)`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .dirichlet import DimensionError, DirichletParams
from .specfun import DomainError

CONFLICT_LIMIT = 1.0 - 1e-12


class TotalConflictError(ArithmeticError):
    """Two opinions are (numerically) in total conflict, C >= 1."""


class SingularOpinionError(ArithmeticError):
    """Opinion with zero uncertainty has no finite Dirichlet."""


@dataclass(frozen=True, eq=False)
class Opinion:
    beliefs: np.ndarray
    uncertainty: float

    def __post_init__(self):
        b = np.asarray(self.beliefs, dtype=float)
        u = float(self.uncertainty)
        if b.ndim != 1 or b.size < 2:
            raise DimensionError(f"beliefs must be a vector with K >= 2, got shape {b.shape}")
        if np.any(b < 0.0) or u < 0.0:
            raise DomainError("opinion masses must be nonnegative")
        if abs(b.sum() + u - 1.0) > 1e-9:
            raise DomainError(f"beliefs + uncertainty must sum to 1, got {b.sum() + u!r}")
        b.setflags(write=False)
        object.__setattr__(self, "beliefs", b)
        object.__setattr__(self, "uncertainty", u)

    @property
    def k(self) -> int:
        return self.beliefs.size

    @classmethod
    def vacuous(cls, k: int) -> "Opinion":
        return cls(np.zeros(k), 1.0)

    def to_json(self) -> dict:
        return {"beliefs": self.beliefs.tolist(), "uncertainty": self.uncertainty}

    @classmethod
    def from_json(cls, obj: dict) -> "Opinion":
        return cls(np.asarray(obj["beliefs"], dtype=float), float(obj["uncertainty"]))


def opinion_from_evidence(e) -> Opinion:
    e = np.asarray(e, dtype=float)
    if np.any(e < 0.0) or not np.all(np.isfinite(e)):
        raise DomainError(f"evidence must be finite and nonnegative, got {e.tolist()}")
    b, u = opinions_from_evidence(e[None, :])
    return Opinion(b[0], float(u[0]))


def dirichlet_from_opinion(o: Opinion) -> DirichletParams:
    if o.uncertainty <= 0.0:
        raise SingularOpinionError("uncertainty is zero: evidence would be infinite")
    return DirichletParams(1.0 + o.k * o.beliefs / o.uncertainty)


def combine_pair(o1: Opinion, o2: Opinion) -> Opinion:
    if o1.k != o2.k:
        raise DimensionError(f"cannot combine opinions with K={o1.k} and K={o2.k}")
    b, u = combine_arrays(o1.beliefs[None, :], np.array([o1.uncertainty]),
                          o2.beliefs[None, :], np.array([o2.uncertainty]))
    return Opinion(b[0], float(u[0]))


def combine_all(opinions: Sequence[Opinion]) -> Opinion:
    """Left fold of :func:`combine_pair` over the list, in order."""
    if len(opinions) == 0:
        raise ValueError("combine_all needs at least one opinion")
    return reduce(combine_pair, opinions)


# Batched array forms: b arrays are (n, K), u arrays are (n,).


def opinions_from_evidence(e: np.ndarray):
    k = e.shape[1]
    s = e.sum(axis=1) + k
    return e / s[:, None], k / s


def opinions_from_evidence_backward(e, gb, gu):
    k = e.shape[1]
    s = e.sum(axis=1) + k
    inner = (gb * e).sum(axis=1)
    return gb / s[:, None] - ((inner + k * gu) / s**2)[:, None]


def conflict(b1, b2):
    """C = sum_{i != j} b1_i b2_j, row-wise."""
    return b1.sum(axis=1) * b2.sum(axis=1) - (b1 * b2).sum(axis=1)


def combine_arrays(b1, u1, b2, u2):
    c = conflict(b1, b2)
    if np.any(c >= CONFLICT_LIMIT):
        raise TotalConflictError(f"total conflict between opinions (C = {c.max():.17g})")
    d = 1.0 - c
    b = (b1 * b2 + b1 * u2[:, None] + b2 * u1[:, None]) / d[:, None]
    u = u1 * u2 / d
    return b, u


def combine_arrays_backward(b1, u1, b2, u2, gb, gu):
    """Vector-Jacobian product of :func:`combine_arrays`."""
    d = 1.0 - conflict(b1, b2)
    num = b1 * b2 + b1 * u2[:, None] + b2 * u1[:, None]
    s = ((gb * num).sum(axis=1) + gu * u1 * u2) / d**2
    gb1 = gb * (b2 + u2[:, None]) / d[:, None] + s[:, None] * (b2.sum(axis=1)[:, None] - b2)
    gb2 = gb * (b1 + u1[:, None]) / d[:, None] + s[:, None] * (b1.sum(axis=1)[:, None] - b1)
    gu1 = ((gb * b2).sum(axis=1) + gu * u2) / d
    gu2 = ((gb * b1).sum(axis=1) + gu * u1) / d
    return gb1, gu1, gb2, gu2


def combine_all_arrays(bs, us):
    """Left fold over lists of (n, K) beliefs and (n,) uncertainties.

    Returns the fused pair and the list of intermediate results needed by
    :func:`combine_all_arrays_backward`.
    """
    trail = [(bs[0], us[0])]
    for b, u in zip(bs[1:], us[1:]):
        trail.append(combine_arrays(trail[-1][0], trail[-1][1], b, u))
    return trail[-1][0], trail[-1][1], trail


def combine_all_arrays_backward(bs, us, trail, gb, gu):
    gbs = [None] * len(bs)
    gus = [None] * len(us)
    for i in range(len(bs) - 1, 0, -1):
        acc_b, acc_u = trail[i - 1]
        g_acc_b, g_acc_u, gbs[i], gus[i] = combine_arrays_backward(acc_b, acc_u, bs[i], us[i], gb, gu)
        gb, gu = g_acc_b, g_acc_u
    gbs[0], gus[0] = gb, gu
    return gbs, gus


def dirichlet_from_opinion_arrays(b, u):
    if np.any(u <= 0.0):
        raise SingularOpinionError("uncertainty is zero: evidence would be infinite")
    k = b.shape[1]
    return 1.0 + k * b / u[:, None]


def dirichlet_from_opinion_arrays_backward(b, u, ga):
    k = b.shape[1]
    gb = k * ga / u[:, None]
    gu = -k * (ga * b).sum(axis=1) / u**2
    return gb, gu
