"""Proof-of-Prospect-Theory consensus simulator."""

__version__ = "0.1.0"

from .prospect import Outcome, ProspectParams, prospect_value, value_fn, weight_fn  # noqa: E402
from .ledger import InteractionRecord, PvLedger, accumulate_pv, normalize_columns, pairwise_pv  # noqa: E402
from .election import (  # noqa: E402
    ApplicantSet, ElectionOutcome, GwoConfig, MetricWeights,
    comprehensive, credibility, decentralization, fairness, solve_p1,
)
from .reward import (  # noqa: E402
    NodeEconomics, RewardQuote, node_utility, optimal_reward, rate_bound,
    subjective_prob, willingness,
)

__all__ = [
    "Outcome", "ProspectParams", "prospect_value", "value_fn", "weight_fn",
    "InteractionRecord", "PvLedger", "accumulate_pv", "normalize_columns", "pairwise_pv",
    "ApplicantSet", "ElectionOutcome", "GwoConfig", "MetricWeights",
    "comprehensive", "credibility", "decentralization", "fairness", "solve_p1",
    "NodeEconomics", "RewardQuote", "node_utility", "optimal_reward", "rate_bound",
    "subjective_prob", "willingness",
]
