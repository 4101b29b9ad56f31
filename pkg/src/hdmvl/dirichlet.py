"""Dirichlet distributions: log-normalizer, closed-form divergences, sampling
and numerical oracles for the Hölder pseudo-divergence.

The Hölder conjugate pair is written ``(gamma, conjugate)`` throughout, with
``1/gamma + 1/conjugate = 1``, so that ``alpha`` always means a Dirichlet
concentration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import warnings
from typing import Union

import numpy as np
from scipy import integrate

from .specfun import DomainError, digamma, log_gamma, trigamma


class DimensionError(ValueError):
    """Mismatched or out-of-range dimensions."""


class UnsupportedError(ValueError):
    """Requested method is not available for these inputs."""


@dataclass(frozen=True, eq=False)
class DirichletParams:
    concentration: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.concentration, dtype=float)
        if a.ndim != 1 or a.size < 2:
            raise DimensionError(f"need a 1-D concentration with K >= 2, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
            raise DomainError(f"concentrations must be finite and > 0, got {a.tolist()}")
        a.setflags(write=False)
        object.__setattr__(self, "concentration", a)

    @property
    def k(self) -> int:
        return self.concentration.size

    @property
    def strength(self) -> float:
        return float(self.concentration.sum())

    @property
    def natural(self) -> np.ndarray:
        return self.concentration - 1.0

    @classmethod
    def from_natural(cls, theta) -> "DirichletParams":
        return cls(np.asarray(theta, dtype=float) + 1.0)

    def mean(self) -> np.ndarray:
        return self.concentration / self.strength


def as_dirichlet(p) -> DirichletParams:
    return p if isinstance(p, DirichletParams) else DirichletParams(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class HolderExponent:
    gamma: float
    conjugate: float = field(init=False)

    def __post_init__(self):
        g = float(self.gamma)
        if not math.isfinite(g) or g <= 1.0:
            raise DomainError(f"Hölder exponent must be > 1, got {g}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "conjugate", g / (g - 1.0))


@dataclass(frozen=True)
class Holder:
    exponent: HolderExponent

    @property
    def name(self) -> str:
        return f"holder({self.exponent.gamma:g})"


@dataclass(frozen=True)
class KL:
    name: str = "kl"


@dataclass(frozen=True)
class CauchySchwarz:
    name: str = "cs"


@dataclass(frozen=True)
class JensenShannonMC:
    sample_count: int = 100_000
    seed: int = 0

    @property
    def name(self) -> str:
        return "js-mc"


DivergenceKind = Union[Holder, KL, CauchySchwarz, JensenShannonMC]


def holder(gamma: float) -> Holder:
    return Holder(HolderExponent(gamma))


def log_normalizer(theta) -> float:
    """F(theta) = sum_k lnΓ(theta_k + 1) - lnΓ(sum_k (theta_k + 1))."""
    theta = np.asarray(theta, dtype=float)
    bad = np.flatnonzero(~(theta > -1.0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"natural parameter theta[{i}] = {theta[i]!r} must be > -1")
    a = theta + 1.0
    return float(np.sum(log_gamma(a)) - log_gamma(float(a.sum())))


def _same_k(p: DirichletParams, q: DirichletParams):
    if p.k != q.k:
        raise DimensionError(f"dimension mismatch: K={p.k} vs K={q.k}")


def _scaled(theta, scale, side):
    out = scale * theta
    bad = np.flatnonzero(~(out > -1.0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(
            f"scaled natural parameter {side}[{i}] = {scale:g} * {theta[i]:g} = {out[i]:g} is <= -1"
        )
    return out


def holder_divergence(p, q, h: HolderExponent | float) -> float:
    """Closed-form Hölder pseudo-divergence between two Dirichlets."""
    p, q = as_dirichlet(p), as_dirichlet(q)
    _same_k(p, q)
    if not isinstance(h, HolderExponent):
        h = HolderExponent(h)
    tp, tq = p.natural, q.natural
    fp = log_normalizer(_scaled(tp, h.gamma, "p"))
    fq = log_normalizer(_scaled(tq, h.conjugate, "q"))
    return fp / h.gamma + fq / h.conjugate - log_normalizer(tp + tq)


def holder_divergence_grad_p(p, q, h: HolderExponent) -> np.ndarray:
    """Gradient of ``holder_divergence(p, q, h)`` with respect to p's concentration."""
    p, q = as_dirichlet(p), as_dirichlet(q)
    a_scaled = h.gamma * p.natural + 1.0
    a_joint = p.natural + q.natural + 1.0
    return (digamma(a_scaled) - digamma(a_scaled.sum())) - (digamma(a_joint) - digamma(a_joint.sum()))


def kl_divergence(p, q) -> float:
    """KL(p || q) between Dirichlets, closed form."""
    p, q = as_dirichlet(p), as_dirichlet(q)
    _same_k(p, q)
    ap, aq = p.concentration, q.concentration
    sp, sq = p.strength, q.strength
    return float(
        log_gamma(sp)
        - np.sum(log_gamma(ap))
        - log_gamma(sq)
        + np.sum(log_gamma(aq))
        + np.sum((ap - aq) * (digamma(ap) - digamma(sp)))
    )


def kl_divergence_grad_p(p, q) -> np.ndarray:
    p, q = as_dirichlet(p), as_dirichlet(q)
    diff = p.concentration - q.concentration
    return diff * trigamma(p.concentration) - trigamma(p.strength) * diff.sum()


def log_pdf(p: DirichletParams, x: np.ndarray) -> np.ndarray:
    """Log density at simplex points (rows of x)."""
    a = p.concentration
    return np.log(x) @ (a - 1.0) - log_normalizer(p.natural)


def divergence(kind: DivergenceKind, p, q):
    """Dispatch on divergence kind.

    Returns a float for the closed forms and ``(estimate, stderr)`` for the
    Monte Carlo Jensen–Shannon estimate.
    """
    p, q = as_dirichlet(p), as_dirichlet(q)
    if isinstance(kind, Holder):
        return holder_divergence(p, q, kind.exponent)
    if isinstance(kind, CauchySchwarz):
        return holder_divergence(p, q, HolderExponent(2.0))
    if isinstance(kind, KL):
        return kl_divergence(p, q)
    if isinstance(kind, JensenShannonMC):
        return js_divergence_mc(p, q, kind.sample_count, kind.seed)
    raise TypeError(f"unknown divergence kind {kind!r}")


def divergence_grad_p(kind: DivergenceKind, p, q) -> np.ndarray:
    if isinstance(kind, Holder):
        return holder_divergence_grad_p(p, q, kind.exponent)
    if isinstance(kind, CauchySchwarz):
        return holder_divergence_grad_p(p, q, HolderExponent(2.0))
    if isinstance(kind, KL):
        return kl_divergence_grad_p(p, q)
    raise UnsupportedError(f"{kind!r} has no analytic gradient")


def expected_log_likelihood(a, class_index: int) -> float:
    """E_{mu ~ Dir(a)}[log mu_class] = psi(a_class) - psi(S)."""
    a = as_dirichlet(a)
    if not 0 <= class_index < a.k:
        raise DimensionError(f"class index {class_index} out of range for K={a.k}")
    return float(digamma(a.concentration[class_index]) - digamma(a.strength))


def sample(a, rng_seed: int, n: int) -> np.ndarray:
    """Draw n points from Dir(a) as normalized gamma variates.

    Uses a Philox (counter-based) stream, so output depends only on the seed.
    """
    a = as_dirichlet(a)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(rng_seed))
    g = rng.standard_gamma(a.concentration, size=(n, a.k))
    return g / g.sum(axis=1, keepdims=True)


def js_divergence_mc(p, q, n: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo Jensen–Shannon divergence with its standard error."""
    p, q = as_dirichlet(p), as_dirichlet(q)
    _same_k(p, q)
    xp = np.clip(sample(p, seed, n), 1e-300, None)
    xq = np.clip(sample(q, seed + 1, n), 1e-300, None)

    def log_ratio(x):
        lp, lq = log_pdf(p, x), log_pdf(q, x)
        lm = np.logaddexp(lp, lq) - math.log(2.0)
        return lp - lm, lq - lm

    rp = log_ratio(xp)[0]
    rq = log_ratio(xq)[1]
    est = 0.5 * rp.mean() + 0.5 * rq.mean()
    se = 0.5 * math.sqrt(rp.var(ddof=1) / n + rq.var(ddof=1) / n)
    return float(est), float(se)


# Oracles. These evaluate the three integrals of the Hölder ratio gap directly
# on unnormalized densities mu^theta; the divergence is invariant to rescaling
# p and q, so no normalizing constant is needed.


def _beta_integral(a: float, b: float):
    """∫_0^1 x^a (1 - x)^b dx by adaptive quadrature (algebraic weight)."""
    with warnings.catch_warnings():
        # roundoff at epsrel=1e-13 is expected; err still carries the estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(lambda _x: 1.0, 0.0, 1.0, weight="alg", wvar=(a, b),
                                  epsabs=0.0, epsrel=1e-13, limit=200)
    return val, err


def _simplex_integral(expo: np.ndarray):
    """∫ over the simplex of prod mu_k^expo_k, for K in {2, 3}.

    K=3 uses the barycentric map mu = (s, (1-s) t, (1-s)(1-t)), under which
    the integrand factorizes into two 1-D integrals.
    """
    if expo.size == 2:
        return _beta_integral(expo[0], expo[1])
    a, b, c = expo
    v1, e1 = _beta_integral(a, b + c + 1.0)
    v2, e2 = _beta_integral(b, c)
    return v1 * v2, abs(v1) * e2 + abs(v2) * e1 + e1 * e2


def _ratio_gap(i_pq, i_p, i_q, h):
    return -math.log(i_pq) + math.log(i_p) / h.gamma + math.log(i_q) / h.conjugate


def oracle_holder(p, q, h: HolderExponent | float, method: str = "quadrature",
                  budget: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Numerical Hölder pseudo-divergence, independent of the closed form.

    Returns ``(estimate, error_bound)``. For ``quadrature`` the bound is the
    propagated quadrature error; for ``mc`` it is one standard error.
    """
    p, q = as_dirichlet(p), as_dirichlet(q)
    _same_k(p, q)
    if not isinstance(h, HolderExponent):
        h = HolderExponent(h)
    tp, tq = p.natural, q.natural
    e_pq, e_p, e_q = tp + tq, _scaled(tp, h.gamma, "p"), _scaled(tq, h.conjugate, "q")

    if method == "quadrature":
        if p.k not in (2, 3):
            raise UnsupportedError(f"quadrature oracle supports K in {{2, 3}}, got K={p.k}")
        vals = [_simplex_integral(e) for e in (e_pq, e_p, e_q)]
        est = _ratio_gap(vals[0][0], vals[1][0], vals[2][0], h)
        rel = [err / val for val, err in vals]
        bound = rel[0] + rel[1] / h.gamma + rel[2] / h.conjugate
        # floor for rounding in the log terms
        bound = 1.5 * bound + 1e-12 * (1.0 + abs(est))
        return est, bound

    if method == "mc":
        # Importance sampling from Dir(1 + m), m the componentwise minimum
        # exponent: every weight mu^(e - m) is then bounded by 1. The proposal
        # normalizer cancels in the ratio, so it is left unnormalized.
        m = np.minimum(np.minimum(e_pq, e_p), e_q)
        x = sample(DirichletParams(m + 1.0), seed, budget)
        logx = np.log(np.clip(x, 1e-300, None))
        w = np.exp(logx @ np.stack([e_pq - m, e_p - m, e_q - m], axis=1))
        means = w.mean(axis=0)
        cov = np.cov(w, rowvar=False) / budget
        grad = np.array([-1.0 / means[0], 1.0 / (h.gamma * means[1]), 1.0 / (h.conjugate * means[2])])
        est = _ratio_gap(means[0], means[1], means[2], h)
        return est, float(math.sqrt(max(grad @ cov @ grad, 0.0)))

    raise ValueError(f"unknown oracle method {method!r}")


def oracle_kl(p, q) -> tuple[float, float]:
    """KL(p || q) for K=2 by 1-D quadrature of ∫ p log(p/q)."""
    p, q = as_dirichlet(p), as_dirichlet(q)
    _same_k(p, q)
    if p.k != 2:
        raise UnsupportedError("KL quadrature oracle supports K=2 only")
    (a1, a2), (b1, b2) = p.concentration, q.concentration
    # normalizers by quadrature as well, so nothing here shares code with the closed form
    zp, ep = _beta_integral(a1 - 1.0, a2 - 1.0)
    zq, eq = _beta_integral(b1 - 1.0, b2 - 1.0)

    def weighted(kind):
        return integrate.quad(lambda _x: 1.0, 0.0, 1.0, weight=kind, wvar=(a1 - 1.0, a2 - 1.0),
                              epsabs=0.0, epsrel=1e-13, limit=200)

    # ∫ w(x) [c + d1 log x + d2 log(1-x)] dx with w = x^(a1-1) (1-x)^(a2-1)
    c = math.log(zq) - math.log(zp)
    l1, el1 = weighted("alg-loga")
    l2, el2 = weighted("alg-logb")
    val = c * zp + (a1 - b1) * l1 + (a2 - b2) * l2
    err = abs(c) * ep + abs(a1 - b1) * el1 + abs(a2 - b2) * el2
    est = val / zp
    bound = err / zp + abs(val) * ep / zp**2 + ep / zp + eq / zq
    return est, 1.5 * bound + 1e-12 * (1.0 + abs(est))
