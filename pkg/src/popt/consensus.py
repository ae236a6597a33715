"""Round-based consensus driver with PoPT election and PoA / PoT / PoW-model baselines."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import election as el
from .errors import DomainError, PreconditionError
from .ledger import DEFAULT_HORIZON, DEFAULT_LOSS_FACTOR, InteractionRecord, PvLedger
from .prospect import DEFAULT_PARAMS, ProspectParams
from .reward import DEFAULT_RATE, NodeEconomics, RewardQuote, optimal_reward, willingness
from .scenario import SmartGrid

log = logging.getLogger(__name__)

STRATEGIES = ("popt", "poa", "pot", "pow")
PROB_MODES = ("provisional", "prior")
SNAPSHOT_COLUMNS = ("round", "strategy", "N_a", "F", "D", "C", "O", "R_star",
                    "elected_id", "interval_s", "status")

_ROUND_STREAM = 2
_ECON_STREAM = 3


@dataclass(frozen=True)
class RoundConfig:
    strategy: str = "popt"
    weights: el.MetricWeights = el.MetricWeights()
    gwo: el.GwoConfig = el.GwoConfig()
    commission_rate: float = DEFAULT_RATE
    seed: int = 0
    prob_mode: str = "provisional"
    force_apply: bool = False
    pot_fraction: float = 0.1
    pow_mean_interval: float = 600.0
    popt_interval: float = 12.0
    tamper_prob: float = 0.0
    horizon: int = DEFAULT_HORIZON
    loss_factor: float = DEFAULT_LOSS_FACTOR
    expected_utility: tuple[float, float] = (0.5, 1.5)
    avg_volume: tuple[float, float] = (0.5, 1.5)
    rationality: float = DEFAULT_PARAMS.phi
    prospect: ProspectParams = DEFAULT_PARAMS

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise DomainError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.prob_mode not in PROB_MODES:
            raise DomainError(f"unknown prob_mode {self.prob_mode!r}")
        if not 0.0 < self.pot_fraction <= 1.0:
            raise DomainError("pot_fraction must lie in (0, 1]")
        if not 0.0 <= self.tamper_prob <= 1.0:
            raise DomainError("tamper_prob must lie in [0, 1]")
        if self.pow_mean_interval <= 0 or self.popt_interval < 0:
            raise DomainError("intervals must be positive")


@dataclass
class Node:
    id: str
    economics: NodeEconomics
    params: ProspectParams = DEFAULT_PARAMS
    tamper_prob: float = 0.0
    role: str = "ordinary"
    balance: float = 0.0

    @property
    def honest(self) -> bool:
        return self.tamper_prob == 0.0


@dataclass
class Block:
    height: int
    slot: int
    recorder: str | None
    txs: list[InteractionRecord]
    parent: int | None
    integrity: bool = True
    reward: float = 0.0

    def to_dict(self) -> dict:
        return {
            "height": self.height, "slot": self.slot, "recorder": self.recorder,
            "parent": self.parent, "integrity": self.integrity, "reward": self.reward,
            "txs": [dataclasses.asdict(t) for t in self.txs],
        }


@dataclass
class Chain:
    blocks: list[Block] = field(default_factory=lambda: [Block(0, -1, None, [], None)])
    orphans: int = 0
    snapshots: list[dict] = field(default_factory=list)

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    @property
    def total_rewards(self) -> float:
        return math.fsum(b.reward for b in self.blocks)

    def link(self, block: Block, snapshot: dict) -> None:
        if block.parent != self.height or block.height != self.height + 1:
            raise PreconditionError(f"block {block.height} does not extend tip {self.height}")
        if not block.integrity:
            raise PreconditionError("refusing to link a block that failed validation")
        self.blocks.append(block)
        self.snapshots.append(snapshot)

    def write_jsonl(self, dest) -> None:
        own = isinstance(dest, (str, Path))
        fh = open(dest, "w", encoding="utf-8") if own else dest
        try:
            for b in self.blocks:
                fh.write(json.dumps(b.to_dict(), sort_keys=True) + "\n")
        finally:
            if own:
                fh.close()


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_snapshots(rows: Sequence[dict], dest) -> None:
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in SNAPSHOT_COLUMNS])
    finally:
        if own:
            fh.close()


def step_apply(nodes: Sequence[Node], R: float, k: float, force: bool = False) -> list[str]:
    """Ids of nodes that apply: strictly positive willingness at the published (k, R)."""
    applicants = []
    for n in nodes:
        n.role = "ordinary"
        if force or willingness(R, n.economics, k) > 0.0:
            n.role = "applicant"
            applicants.append(n.id)
    return applicants


def baseline_probabilities(strategy: str, apps: el.ApplicantSet, pot_fraction: float = 0.1) -> np.ndarray:
    n = len(apps)
    if strategy in ("poa", "pow"):
        return np.full(n, 1.0 / n)
    if strategy == "pot":
        top = max(1, math.ceil(pot_fraction * n - 1e-9))
        order = np.argsort(-apps.pvs, kind="stable")[:top]
        p = np.zeros(n)
        p[order] = 1.0 / top
        return p
    raise DomainError(f"{strategy!r} is not a baseline strategy")


def sample_index(probs, rng: np.random.Generator) -> int:
    """Categorical draw; zero-probability entries are never returned."""
    cs = np.cumsum(np.asarray(probs, dtype=float))
    if not cs[-1] > 0.0:
        raise DomainError("probabilities sum to zero")
    u = rng.random() * cs[-1]
    return int(min(np.searchsorted(cs, u, side="right"), len(cs) - 1))


def step_elect(
    apps: el.ApplicantSet, cfg: RoundConfig, rng: np.random.Generator, gwo_seed: int | None = None
) -> tuple[el.ElectionOutcome, str]:
    if len(apps) == 0:
        raise PreconditionError("cannot elect from an empty applicant set")
    if cfg.strategy == "popt":
        gwo = cfg.gwo if gwo_seed is None else dataclasses.replace(cfg.gwo, seed=gwo_seed)
        outcome = el.solve_p1(apps, cfg.weights, gwo)
    else:
        p = baseline_probabilities(cfg.strategy, apps, cfg.pot_fraction)
        outcome = el.evaluate(apps, p, cfg.weights)
    return outcome, apps.ids[sample_index(outcome.probabilities, rng)]


def step_interval(strategy: str, rng: np.random.Generator, cfg: RoundConfig = RoundConfig()) -> float:
    """Simulated seconds per block: exponential puzzle time for the PoW model,
    a fixed election overhead otherwise."""
    if strategy == "pow":
        return float(rng.exponential(cfg.pow_mean_interval))
    return float(cfg.popt_interval)


def step_post_validate_link(
    chain: Chain, recorder: Node, txs: Sequence[InteractionRecord], slot: int,
    reward: float, rng: np.random.Generator, snapshot: dict,
) -> str:
    """Recorder packs ``txs``; honest validators accept iff the integrity flag
    holds. Returns ``"linked"`` or ``"orphaned"``."""
    tampered = recorder.tamper_prob > 0.0 and rng.random() < recorder.tamper_prob
    block = Block(chain.height + 1, slot, recorder.id, list(txs), chain.height,
                  integrity=not tampered, reward=reward)
    if not block.integrity:
        chain.orphans += 1
        return "orphaned"
    chain.link(block, snapshot)
    recorder.balance += reward
    return "linked"


def make_nodes(ids: Sequence[str], cfg: RoundConfig, adversaries: dict | None = None) -> list[Node]:
    rng = np.random.default_rng([cfg.seed, _ECON_STREAM])
    adversaries = adversaries or {}
    nodes = []
    for nid in ids:
        econ = NodeEconomics(
            expected_utility=float(rng.uniform(*cfg.expected_utility)),
            election_prob=1.0 / len(ids),
            rationality=cfg.rationality,
            avg_volume=float(rng.uniform(*cfg.avg_volume)),
            params=cfg.prospect,
            node_id=nid,
        )
        nodes.append(Node(nid, econ, params=cfg.prospect, tamper_prob=adversaries.get(nid, cfg.tamper_prob)))
    return nodes


class Simulation:
    """Drives rounds over a smart-grid scenario. Round ``r`` consumes slot ``r``."""

    def __init__(self, cfg: RoundConfig, scenario: SmartGrid, nodes: Sequence[Node] | None = None):
        self.cfg = cfg
        self.scenario = scenario
        self.nodes = list(nodes) if nodes is not None else make_nodes(scenario.seller_ids, cfg)
        self.by_id = {n.id: n for n in self.nodes}
        self.ledger = PvLedger(cfg.horizon, cfg.loss_factor)
        self.ledger.register(self.by_id)
        self.chain = Chain()
        self.rounds: list[dict] = []
        self.quotes: list[RewardQuote] = []

    def _gwo_seed(self, r: int, salt: int) -> int:
        return int(np.random.SeedSequence([self.cfg.seed, r, salt]).generate_state(1)[0])

    def publish(self, r: int, pvs: dict[str, float]) -> RewardQuote:
        """Information contract: election probabilities feed each node's
        subjective probability, then the median break-even reward is quoted."""
        cfg = self.cfg
        if cfg.prob_mode == "provisional":
            ids = [n.id for n in self.nodes]
            gwo = dataclasses.replace(cfg.gwo, seed=self._gwo_seed(r, 1))
            probs = el.solve_p1(el.ApplicantSet(ids, [pvs[i] for i in ids]), cfg.weights, gwo)
            prob_of = dict(zip(ids, probs.probabilities))
        else:
            prob_of = {n.id: 1.0 / len(self.nodes) for n in self.nodes}
        for n in self.nodes:
            p = min(max(float(prob_of[n.id]), 0.0), 1.0)
            n.economics = dataclasses.replace(n.economics, election_prob=p)
        return optimal_reward([n.economics for n in self.nodes], cfg.commission_rate, strict=False)

    def run_round(self, r: int) -> dict:
        cfg = self.cfg
        txs = self.scenario.generate_slot(r)
        if txs:
            self.ledger.ingest(r, txs, self.scenario.params_for)
        else:
            self.ledger.advance(r)
        pvs = self.ledger.accumulated(r)
        rng = np.random.default_rng([cfg.seed, _ROUND_STREAM, r])

        quote = self.publish(r, pvs)
        self.quotes.append(quote)
        R = quote.aggregate
        applicants = step_apply(self.nodes, R, cfg.commission_rate, cfg.force_apply)
        row = {"round": r, "strategy": cfg.strategy, "N_a": len(applicants), "R_star": R}
        if not applicants:
            row.update(status="skipped", interval_s=step_interval(cfg.strategy, rng, cfg))
            self.rounds.append(row)
            return row

        apps = el.ApplicantSet(applicants, [pvs[i] for i in applicants])
        outcome, elected = step_elect(apps, cfg, rng, self._gwo_seed(r, 2))
        recorder = self.by_id[elected]
        recorder.role = "recorder"
        row.update(F=outcome.fairness, D=outcome.decentralization, C=outcome.credibility,
                   O=outcome.comprehensive, elected_id=elected,
                   interval_s=step_interval(cfg.strategy, rng, cfg))
        row["status"] = step_post_validate_link(self.chain, recorder, txs, r, R, rng, dict(row))
        row["probabilities"] = outcome.probabilities
        row["shares"] = outcome.shares
        row["applicants"] = applicants
        self.rounds.append(row)
        log.debug("round %d: N_a=%d elected=%s status=%s", r, len(applicants), elected, row["status"])
        return row

    def run(self, rounds: int) -> Chain:
        for r in range(rounds):
            self.run_round(r)
        return self.chain


def run(rounds: int, cfg: RoundConfig, scenario: SmartGrid, nodes: Sequence[Node] | None = None):
    """Execute ``rounds`` rounds; returns ``(chain, per-round rows)``."""
    sim = Simulation(cfg, scenario, nodes)
    sim.run(rounds)
    return sim.chain, sim.rounds
