"""Smart-grid energy-trading workload: sellers with reference bids, buyer types
with banded bids, and per-slot interaction streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .ledger import InteractionRecord, PvLedger, pairwise_pv
from .prospect import DEFAULT_PARAMS, ProspectParams

PRICE_FLOOR = 0.5  # yuan/kW*h
DEFAULT_BANDS = {"A": (0.5, 0.7), "B": (0.7, 1.0), "C": (1.0, 1.2)}

_PROFILE_STREAM = 0
_SLOT_STREAM = 1


@dataclass(frozen=True)
class TraderProfile:
    id: str
    side: str
    reference_bid: float | None = None
    bid_band: tuple[float, float] | None = None
    lambda_override: float | None = None
    type_tag: str = "custom"

    def __post_init__(self):
        if self.side not in ("seller", "buyer"):
            raise DomainError(f"side must be seller or buyer, got {self.side!r}")
        if self.side == "seller":
            if self.reference_bid is None or self.reference_bid < PRICE_FLOOR:
                raise DomainError(f"{self.id}: reference bid must be >= {PRICE_FLOOR}")
        else:
            if self.bid_band is None:
                raise DomainError(f"{self.id}: buyers need a bid band")
            lo, hi = self.bid_band
            if lo > hi or lo < PRICE_FLOOR:
                raise DomainError(f"{self.id}: invalid bid band {self.bid_band}")


@dataclass(frozen=True)
class ScenarioConfig:
    sellers: int = 100
    buyers_per_type: dict = field(default_factory=lambda: {"A": 30, "B": 30, "C": 30})
    bands: dict = field(default_factory=lambda: dict(DEFAULT_BANDS))
    seller_rb: tuple[float, float] = (0.6, 1.0)
    seller_lambda: tuple[float, float] = (DEFAULT_PARAMS.lam, DEFAULT_PARAMS.lam)
    partners_per_buyer: int = 1
    willingness: tuple[float, float] = (0.0, 1.0)
    slots: int = 50
    seed: int = 0
    popularity_sigma: float = 0.0

    def __post_init__(self):
        if self.sellers < 0 or any(c < 0 for c in self.buyers_per_type.values()):
            raise DomainError("trader counts must be non-negative")
        unknown = set(self.buyers_per_type) - set(self.bands)
        if unknown:
            raise DomainError(f"no bid band for buyer types {sorted(unknown)}")
        lo, hi = self.seller_rb
        if lo > hi or lo < PRICE_FLOOR:
            raise DomainError(f"seller reference bids {self.seller_rb} must be >= {PRICE_FLOOR}")
        wlo, whi = self.willingness
        if not 0.0 <= wlo <= whi <= 1.0:
            raise DomainError(f"willingness range {self.willingness} must lie in [0, 1]")
        if self.partners_per_buyer < 0:
            raise DomainError("partners_per_buyer must be non-negative")
        if self.sellers and self.partners_per_buyer > self.sellers:
            raise DomainError("partners_per_buyer exceeds the number of sellers")
        if self.slots < 0:
            raise DomainError("slots must be non-negative")
        if self.popularity_sigma < 0:
            raise DomainError("popularity_sigma must be non-negative")


class SmartGrid:
    """Trader population drawn once from the seed; slots are generated from
    independent per-slot substreams, so any slot can be regenerated alone."""

    def __init__(self, cfg: ScenarioConfig, base_params: ProspectParams = DEFAULT_PARAMS):
        self.cfg = cfg
        self.base_params = base_params
        rng = np.random.default_rng([cfg.seed, _PROFILE_STREAM])
        self.sellers = [
            TraderProfile(
                f"S{i:03d}", "seller",
                reference_bid=float(rng.uniform(*cfg.seller_rb)),
                lambda_override=float(rng.uniform(*cfg.seller_lambda)),
            )
            for i in range(cfg.sellers)
        ]
        # buyers pick partners with probability proportional to popularity;
        # sigma = 0 gives the uniform choice
        pop = rng.lognormal(0.0, cfg.popularity_sigma, cfg.sellers) if cfg.sellers else np.zeros(0)
        self.popularity = pop / pop.sum() if cfg.sellers else pop
        self.buyers = [
            TraderProfile(f"{tag}{i:03d}", "buyer", bid_band=tuple(cfg.bands[tag]), type_tag=tag)
            for tag in sorted(cfg.buyers_per_type)
            for i in range(cfg.buyers_per_type[tag])
        ]
        self._params = {
            s.id: base_params.with_lambda(s.lambda_override) if s.lambda_override is not None
            else base_params
            for s in self.sellers
        }

    @property
    def seller_ids(self) -> list[str]:
        return [s.id for s in self.sellers]

    def params_for(self, seller_id: str) -> ProspectParams:
        return self._params.get(seller_id, self.base_params)

    def generate_slot(self, t: int) -> list[InteractionRecord]:
        cfg = self.cfg
        if cfg.partners_per_buyer == 0 or not self.sellers:
            return []
        rng = np.random.default_rng([cfg.seed, _SLOT_STREAM, t])
        out = []
        for b in self.buyers:
            partners = rng.choice(len(self.sellers), size=cfg.partners_per_buyer, replace=False,
                                  p=None if cfg.popularity_sigma == 0.0 else self.popularity)
            for si in partners:
                s = self.sellers[int(si)]
                bid = max(float(rng.uniform(*b.bid_band)), PRICE_FLOOR)
                out.append(InteractionRecord(
                    seller=s.id, buyer=b.id, slot=t, trade_price=bid,
                    expected_price=s.reference_bid,
                    willingness=float(rng.uniform(*cfg.willingness)),
                ))
        return out

    def stream(self, slots: int | None = None):
        for t in range(self.cfg.slots if slots is None else slots):
            yield t, self.generate_slot(t)


def generate_slot(cfg: ScenarioConfig, t: int) -> list[InteractionRecord]:
    return SmartGrid(cfg).generate_slot(t)


def pv_sweep(
    rb_grid: Sequence[float],
    lambda_grid: Sequence[float],
    bid_grid: Sequence[float],
    params: ProspectParams = DEFAULT_PARAMS,
    willingness: float = 0.5,
) -> np.ndarray:
    """Pairwise PV over (reference bid, lambda, buyer bid); shape (len(rb), len(lam), len(bid))."""
    if not (len(rb_grid) and len(lambda_grid) and len(bid_grid)):
        raise DomainError("pv_sweep needs non-empty grids")
    out = np.empty((len(rb_grid), len(lambda_grid), len(bid_grid)))
    for i, rb in enumerate(rb_grid):
        for j, lam in enumerate(lambda_grid):
            p = params.with_lambda(lam)
            for k, bid in enumerate(bid_grid):
                rec = InteractionRecord("seller", "buyer", 0, float(bid), float(rb), willingness)
                out[i, j, k] = pairwise_pv(rec, p)
    return out


def sweep_is_monotone(surface: np.ndarray, tol: float = 1e-12) -> bool:
    """PV non-increasing in reference bid and lambda, non-decreasing in bid.

    Grids must be ascending."""
    return bool(
        np.all(np.diff(surface, axis=0) <= tol)
        and np.all(np.diff(surface, axis=1) <= tol)
        and np.all(np.diff(surface, axis=2) >= -tol)
    )


def buyer_type_pv(
    cfg: ScenarioConfig, horizon: int = 10, loss_factor: float = 0.9
) -> dict[str, list[float]]:
    """Per-slot mean accumulated PV of each buyer type (buyers scored as rows)."""
    grid = SmartGrid(cfg)
    ledger = PvLedger(horizon, loss_factor)
    ledger.register(b.id for b in grid.buyers)
    tags = sorted({b.type_tag for b in grid.buyers})
    series: dict[str, list[float]] = {t: [] for t in tags}
    for t, recs in grid.stream():
        ledger.ingest(t, recs, grid.params_for, score_side="buyer")
        acc = ledger.accumulated(t)
        for tag in tags:
            vals = [acc[b.id] for b in grid.buyers if b.type_tag == tag]
            series[tag].append(float(np.mean(vals)))
    return series
