"""Bayesian (B) and inverse-Bayesian (IB) inference over finite spaces."""

from bibkit.core.models import ExplorationPolicy, IBConfig, ThetaSource

from .bayes import (
    Distribution,
    FreeEnergyReport,
    GenerativeModel,
    JointTable,
    LikelihoodTable,
    apply_B,
    bayes_update,
    empirical,
    evidence,
    free_energy,
    joint_from,
    tri_stable_model,
)
from .inverse import (
    BinaryRelation,
    Exploration,
    HypothesisSpace,
    RoughApproximation,
    apply_IB,
    build_relation,
    explore,
    rough_approximation,
)

__all__ = [
    "Distribution",
    "LikelihoodTable",
    "JointTable",
    "FreeEnergyReport",
    "GenerativeModel",
    "bayes_update",
    "apply_B",
    "free_energy",
    "joint_from",
    "evidence",
    "empirical",
    "tri_stable_model",
    "BinaryRelation",
    "RoughApproximation",
    "HypothesisSpace",
    "Exploration",
    "IBConfig",
    "ExplorationPolicy",
    "ThetaSource",
    "build_relation",
    "rough_approximation",
    "apply_IB",
    "explore",
]
