"""YAML configuration: defaults, merging, validation with field paths."""

from __future__ import annotations

import copy
import dataclasses
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from . import election as el
from .consensus import RoundConfig
from .errors import DomainError
from .prospect import ProspectParams, weight_fn
from .scenario import PRICE_FLOOR, ScenarioConfig

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "prospect": {"alpha": 0.88, "beta": 0.88, "lambda": 2.25, "phi": 0.74},
    "ledger": {"horizon": 10, "loss_factor": 0.9},
    "election": {"mu1": 1.0 / 3.0, "mu2": 1.0 / 3.0},
    "gwo": {"pack_size": 30, "iterations": 200, "restarts": 3},
    "reward": {
        "k": 0.01,
        "prob_mode": "provisional",
        "rationality": 0.74,
        "expected_utility": [0.5, 1.5],
        "avg_volume": [0.5, 1.5],
    },
    "consensus": {
        "strategy": "popt",
        "rounds": 50,
        "force_apply": False,
        "pot_fraction": 0.1,
        "pow_mean_interval": 600.0,
        "popt_interval": 12.0,
        "tamper_prob": 0.0,
    },
    # the comparison scenario: heterogeneous reference bids and seller popularity
    "scenario": {
        "sellers": 100,
        "buyers_per_type": {"A": 30, "B": 30, "C": 30},
        "bands": {"A": [0.5, 0.7], "B": [0.7, 1.0], "C": [1.0, 1.2]},
        "seller_rb": [0.5, 0.9],
        "seller_lambda": [2.25, 2.25],
        "partners_per_buyer": 10,
        "popularity_sigma": 1.0,
        "willingness": [0.0, 1.0],
        "slots": 50,
    },
    "experiments": {
        "fig2a": {
            "reference_bids": [0.6, 0.7, 0.8, 0.9, 1.0],
            "lambdas": [1.5, 2.25, 3.0],
            "bids": {"start": 0.5, "stop": 1.2, "num": 15},
            "willingness": 0.5,
        },
        "fig2b": {"reference_bid": 0.8, "lambda": 2.25, "buyers_per_type": 10, "slots": 50},
        "fig3": {"u0_grid": {"start": 0.1, "stop": 2.0, "num": 20}, "nodes": 100, "fixed_reward": None},
        "fig4": {"applicants": 10, "slots": 20, "runs": 1, "partners_per_buyer": 3,
                 "popularity_sigma": 0.0},
        "fig5a": {"F": 0.9, "D": 0.5, "C": 0.1, "divisions": 30},
        "fig5b": {"rounds": 50},
        "fig6a": {"blocks": 10000},
        "fig6b": {"runs": 20, "rounds": 20},
    },
}

SECTIONS = set(DEFAULTS)


class ConfigError(DomainError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class SimConfig:
    seed: int
    prospect: ProspectParams
    weights: el.MetricWeights
    gwo: el.GwoConfig
    round: RoundConfig
    scenario: ScenarioConfig
    rounds: int
    experiments: dict
    raw: dict

    def with_seed(self, seed: int) -> "SimConfig":
        return build_config(_merge(self.raw, {"seed": seed}))


def _pair(v, path, errors):
    if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        errors.append(f"{path}: expected a [low, high] pair, got {v!r}")
        return (0.0, 0.0)
    return (float(v[0]), float(v[1]))


def _checked(path: str, errors: list[str], fn, *args, **kwargs):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return fn(*args, **kwargs)
    except (DomainError, TypeError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return None


def _collect(raw: dict) -> tuple[SimConfig | None, list[str]]:
    errors: list[str] = []
    for key in raw:
        if key not in SECTIONS:
            errors.append(f"{key}: unknown section")
    for sec, body in raw.items():
        if sec in SECTIONS and isinstance(DEFAULTS[sec], dict):
            if not isinstance(body, dict):
                errors.append(f"{sec}: expected a mapping")
                continue
            if sec != "experiments":
                for key in body:
                    if key not in DEFAULTS[sec]:
                        errors.append(f"{sec}.{key}: unknown key")
    if errors:
        return None, errors

    seed = raw["seed"]
    if not isinstance(seed, int) or seed < 0 or seed >= 2**64:
        errors.append(f"seed: expected an unsigned 64-bit integer, got {seed!r}")
        seed = 0

    p = raw["prospect"]
    prospect = _checked("prospect", errors, ProspectParams,
                        alpha=p["alpha"], beta=p["beta"], lam=p["lambda"], phi=p["phi"])

    e = raw["election"]
    if not all(isinstance(e[m], (int, float)) for m in ("mu1", "mu2")):
        errors.append(f"election: weights must be numbers, got mu1={e['mu1']!r}, mu2={e['mu2']!r}")
        weights = None
    elif e["mu1"] + e["mu2"] > 1.0 + el.ZERO_TOL:
        errors.append(f"election.mu1+mu2: weights must satisfy mu1 + mu2 <= 1, got {e['mu1'] + e['mu2']}")
        weights = None
    else:
        weights = _checked("election", errors, el.MetricWeights, e["mu1"], e["mu2"])

    g = raw["gwo"]
    gwo = _checked("gwo", errors, el.GwoConfig, pack_size=g["pack_size"],
                   iterations=g["iterations"], seed=seed, restarts=g["restarts"])

    s = raw["scenario"]
    bands = {}
    for tag, band in s["bands"].items():
        lo, hi = _pair(band, f"scenario.bands.{tag}", errors)
        if lo < PRICE_FLOOR:
            errors.append(f"scenario.bands.{tag}: bids below the {PRICE_FLOOR} price floor")
        bands[tag] = (lo, hi)
    scenario = _checked(
        "scenario", errors, ScenarioConfig,
        sellers=s["sellers"], buyers_per_type=dict(s["buyers_per_type"]), bands=bands,
        seller_rb=_pair(s["seller_rb"], "scenario.seller_rb", errors),
        seller_lambda=_pair(s["seller_lambda"], "scenario.seller_lambda", errors),
        partners_per_buyer=s["partners_per_buyer"], popularity_sigma=s["popularity_sigma"],
        willingness=_pair(s["willingness"], "scenario.willingness", errors),
        slots=s["slots"], seed=seed,
    )

    r, c, led = raw["reward"], raw["consensus"], raw["ledger"]
    u0 = _pair(r["expected_utility"], "reward.expected_utility", errors)
    theta = _pair(r["avg_volume"], "reward.avg_volume", errors)
    if u0[0] < 0 or u0[0] > u0[1]:
        errors.append(f"reward.expected_utility: need 0 <= low <= high, got {list(u0)}")
    if theta[0] <= 0 or theta[0] > theta[1]:
        errors.append(f"reward.avg_volume: need 0 < low <= high, got {list(theta)}")
    if not isinstance(r["rationality"], (int, float)) or r["rationality"] <= 0:
        errors.append(f"reward.rationality: must be positive, got {r['rationality']!r}")
    k = r["k"]
    if not isinstance(k, (int, float)) or k < 0:
        errors.append(f"reward.k: commission rate must be non-negative, got {k!r}")
    elif scenario is not None and scenario.sellers > 0 and theta[1] > 0 and r["rationality"] > 0:
        # worst case under the uniform prior p_i = 1/N and the largest volume
        bound = weight_fn(1.0 / scenario.sellers, r["rationality"]) / theta[1]
        if not k < bound:
            errors.append(
                f"reward.k: commission rate {k} violates the individual-rationality bound "
                f"k < min_i pi(p_i)/theta_i = {bound:.6g} (prior p_i = 1/{scenario.sellers}, "
                f"theta_max = {theta[1]})")
    if led["horizon"] < 1:
        errors.append(f"ledger.horizon: must be >= 1, got {led['horizon']}")
    if not 0 < led["loss_factor"] <= 1:
        errors.append(f"ledger.loss_factor: must lie in (0, 1], got {led['loss_factor']}")
    if not isinstance(c["rounds"], int) or c["rounds"] < 0:
        errors.append(f"consensus.rounds: must be a non-negative integer, got {c['rounds']!r}")

    round_cfg = None
    if not errors:
        round_cfg = _checked(
            "consensus", errors, RoundConfig,
            strategy=c["strategy"], weights=weights, gwo=gwo, commission_rate=float(k), seed=seed,
            prob_mode=r["prob_mode"], force_apply=bool(c["force_apply"]),
            pot_fraction=c["pot_fraction"], pow_mean_interval=float(c["pow_mean_interval"]),
            popt_interval=float(c["popt_interval"]), tamper_prob=c["tamper_prob"],
            horizon=led["horizon"], loss_factor=led["loss_factor"], expected_utility=u0,
            avg_volume=theta, rationality=float(r["rationality"]), prospect=prospect,
        )
    if errors:
        return None, errors
    return SimConfig(seed, prospect, weights, gwo, round_cfg, scenario, c["rounds"],
                     raw["experiments"], raw), []


def build_config(overrides: dict | None = None) -> SimConfig:
    cfg, errors = _collect(_merge(DEFAULTS, overrides or {}))
    if errors:
        raise ConfigError(errors)
    return cfg


def read_yaml(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])
    return data


def validate_config(path) -> tuple[SimConfig | None, list[str]]:
    """Returns ``(config, [])`` or ``(None, errors)``; errors carry field paths."""
    try:
        raw = read_yaml(path)
    except (OSError, yaml.YAMLError) as exc:
        return None, [f"{path}: {exc}"]
    except ConfigError as exc:
        return None, exc.errors
    return _collect(_merge(DEFAULTS, raw))


def load_config(path=None, seed: int | None = None) -> SimConfig:
    over = read_yaml(path) if path else {}
    if seed is not None:
        over = _merge(over, {"seed": seed})
    return build_config(over)


def dump_normalized(cfg: SimConfig) -> str:
    return yaml.safe_dump(cfg.raw, sort_keys=True)


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj
