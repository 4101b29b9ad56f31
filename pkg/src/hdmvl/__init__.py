"""Uncertainty-aware multi-view classification with Dirichlet evidence,
Hölder-divergence regularization and Dempster–Shafer fusion."""

from .dirichlet import (
    CauchySchwarz,
    DirichletParams,
    Holder,
    HolderExponent,
    JensenShannonMC,
    KL,
    divergence,
    holder_divergence,
    kl_divergence,
    log_normalizer,
    oracle_holder,
)
from .opinions import Opinion, combine_all, combine_pair, dirichlet_from_opinion, opinion_from_evidence

__version__ = "0.1.0"
