"""Block-reward quoting: willingness, subjective election probability,
break-even candidate rewards and their median."""

from __future__ import annotations

import json
import math
import statistics
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DomainError, InfeasibleRateError
from .prospect import DEFAULT_PARAMS, ProspectParams, value_fn, weight_fn

DEFAULT_RATE = 0.01
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class NodeEconomics:
    expected_utility: float
    election_prob: float
    rationality: float = DEFAULT_PARAMS.phi
    avg_volume: float = 1.0
    params: ProspectParams = DEFAULT_PARAMS
    node_id: str = ""

    def __post_init__(self):
        if not self.expected_utility >= 0.0:
            raise DomainError(f"expected utility must be >= 0, got {self.expected_utility}")
        if not 0.0 <= self.election_prob <= 1.0:
            raise DomainError(f"election probability {self.election_prob} outside [0, 1]")
        if not self.avg_volume > 0.0:
            raise DomainError(f"average volume must be positive, got {self.avg_volume}")
        if not self.rationality > 0.0:
            raise DomainError(f"rationality must be positive, got {self.rationality}")
        if self.rationality > 1.0:
            warnings.warn(f"rationality {self.rationality} > 1", stacklevel=3)

    @property
    def subjective(self) -> float:
        return subjective_prob(self.election_prob, self.rationality)

    def slope(self, k: float) -> float:
        """d u_i / d R = pi(p_i) - k * theta_i."""
        return self.subjective - k * self.avg_volume


def subjective_prob(p: float, phi_i: float) -> float:
    return weight_fn(p, phi_i)


def node_utility(R: float, econ: NodeEconomics, k: float) -> float:
    """Reward perceived through pi(p_i) minus the commission k * R * theta_i."""
    if R < 0.0 or k < 0.0:
        raise DomainError(f"reward and rate must be non-negative (R={R}, k={k})")
    return econ.subjective * R - k * R * econ.avg_volume


def willingness(R: float, econ: NodeEconomics, k: float) -> float:
    return value_fn(node_utility(R, econ, k), econ.expected_utility, econ.params)


def rate_bound(nodes: Sequence[NodeEconomics]) -> float:
    """Exclusive upper bound on the commission rate: min_i pi(p_i) / theta_i."""
    if not nodes:
        raise DomainError("rate_bound needs at least one node")
    return min(n.subjective / n.avg_volume for n in nodes)


def _binding(nodes: Sequence[NodeEconomics]) -> tuple[int, NodeEconomics]:
    return min(enumerate(nodes), key=lambda t: t[1].subjective / t[1].avg_volume)


def candidate_reward(econ: NodeEconomics, k: float) -> float:
    """Smallest reward at which the node breaks even with its expectation.

    Willingness has a cusp here: its slope in R grows without bound from both
    sides, so this is also where marginal willingness per unit reward peaks.
    """
    s = econ.slope(k)
    if not s > 0.0:
        raise InfeasibleRateError(
            f"node {econ.node_id or '?'}: rate {k} >= pi(p)/theta = "
            f"{econ.subjective / econ.avg_volume}", econ.node_id, econ.subjective / econ.avg_volume)
    return econ.expected_utility / s


def median(values: Sequence[float]) -> float:
    """Median; even counts average the two middle values."""
    if not values:
        raise DomainError("median of an empty sequence")
    return float(statistics.median(values))


@dataclass
class RewardQuote:
    per_node: dict[str, float | str]
    aggregate: float
    commission_rate: float
    rate_bound: float
    feasible_ids: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        body = {
            "k": self.commission_rate,
            "rate_bound": self.rate_bound,
            "per_node": [{"id": i, "candidate": c} for i, c in self.per_node.items()],
            "aggregate": self.aggregate,
        }
        return json.dumps(body, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "RewardQuote":
        body = json.loads(text)
        per = {e["id"]: e["candidate"] for e in body["per_node"]}
        feas = [i for i, c in per.items() if c != INFEASIBLE]
        return cls(per, body["aggregate"], body["k"], body["rate_bound"], feas)


def optimal_reward(
    nodes: Sequence[NodeEconomics], k: float = DEFAULT_RATE, strict: bool = True
) -> RewardQuote:
    """Quote per-node break-even rewards and aggregate them by the median.

    With ``strict`` a rate at or above the bound raises
    :class:`InfeasibleRateError` naming the binding node.  Otherwise nodes with
    non-positive slope are marked ``"infeasible"`` and left out of the median;
    if none remain the aggregate is 0.
    """
    if not nodes:
        raise DomainError("optimal_reward needs at least one node")
    if k < 0.0 or not math.isfinite(k):
        raise DomainError(f"commission rate must be a non-negative number, got {k}")
    ids = [n.node_id or str(i) for i, n in enumerate(nodes)]
    bound = rate_bound(nodes)
    if strict and not k < bound:
        i, node = _binding(nodes)
        raise InfeasibleRateError(
            f"commission rate {k} violates the individual-rationality bound "
            f"k < min pi(p_i)/theta_i = {bound} (binding node {ids[i]})", ids[i], bound)
    per: dict[str, float | str] = {}
    feasible = []
    for nid, n in zip(ids, nodes):
        if n.slope(k) > 0.0:
            per[nid] = candidate_reward(n, k)
            feasible.append(nid)
        else:
            per[nid] = INFEASIBLE
    agg = median([per[i] for i in feasible]) if feasible else 0.0
    return RewardQuote(per, agg, k, bound, feasible)
