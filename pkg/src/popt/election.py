"""Recorder election: fairness / decentralization / credibility metrics and a
Grey Wolf Optimizer over the probability simplex."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateInputError, DomainError

ZERO_TOL = 1e-12
MAJORITY = 0.5


@dataclass(frozen=True)
class MetricWeights:
    mu1: float = 1.0 / 3.0
    mu2: float = 1.0 / 3.0

    def __post_init__(self):
        if not (0.0 <= self.mu1 <= 1.0 and 0.0 <= self.mu2 <= 1.0):
            raise DomainError(f"weights must lie in [0, 1], got mu1={self.mu1}, mu2={self.mu2}")
        if self.mu1 + self.mu2 > 1.0 + ZERO_TOL:
            raise DomainError(f"mu1 + mu2 must not exceed 1, got {self.mu1 + self.mu2}")

    @property
    def mu3(self) -> float:
        return max(0.0, 1.0 - self.mu1 - self.mu2)

    def as_array(self) -> np.ndarray:
        return np.array([self.mu1, self.mu2, self.mu3])


@dataclass(frozen=True)
class GwoConfig:
    pack_size: int = 30
    iterations: int = 200
    seed: int = 0
    restarts: int = 3

    def __post_init__(self):
        if self.pack_size < 4:
            raise DomainError(f"pack_size must be >= 4, got {self.pack_size}")
        if self.iterations < 1:
            raise DomainError(f"iterations must be >= 1, got {self.iterations}")
        if self.restarts < 1:
            raise DomainError(f"restarts must be >= 1, got {self.restarts}")


class ApplicantSet:
    """Applicants with their accumulated PVs.

    Negative PVs are clamped to zero before shares are formed; such nodes stay
    eligible but carry no share.
    """

    def __init__(self, ids: Sequence[str], pvs: Sequence[float]):
        if len(ids) == 0:
            raise DomainError("applicant set is empty")
        if len(ids) != len(pvs):
            raise DomainError("ids and pvs differ in length")
        self.ids = list(ids)
        self.pvs = np.asarray(pvs, dtype=float)
        if not np.all(np.isfinite(self.pvs)):
            raise DomainError("PVs must be finite")
        self.clamped = np.maximum(self.pvs, 0.0)
        total = self.clamped.sum()
        self.degenerate = not total > 0.0
        if self.degenerate:
            self.shares = np.full(len(self.ids), 1.0 / len(self.ids))
        else:
            self.shares = self.clamped / total

    @classmethod
    def from_mapping(cls, pvs: Mapping[str, float]) -> "ApplicantSet":
        ids = list(pvs)
        return cls(ids, [pvs[i] for i in ids])

    def __len__(self) -> int:
        return len(self.ids)


def _check_pair(a, p) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    p = np.asarray(p, dtype=float)
    if a.shape != p.shape or a.ndim != 1:
        raise DomainError(f"length mismatch: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise DomainError("empty vectors")
    return a, p


def fairness(shares, probs) -> float:
    """Expectational fairness: 1 - sum|a-p| / (N * max|a-p|), 1 when a == p."""
    a, p = _check_pair(shares, probs)
    return float(fairness_batch(a, p[None, :])[0])


def decentralization(probs) -> float:
    """Nakamoto index k*/N, with k* counted over descending-sorted probabilities."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("decentralization needs a non-empty probability vector")
    return float(decentralization_batch(p[None, :])[0])


def nakamoto_k(probs) -> int:
    p = np.sort(np.asarray(probs, dtype=float))[::-1]
    return int(np.argmax(np.cumsum(p) >= MAJORITY - ZERO_TOL)) + 1


def credibility(pvs, probs) -> float:
    """N * sum(pv_i p_i) / sum(pv_i)."""
    pv, p = _check_pair(pvs, probs)
    total = pv.sum()
    if not total > 0.0:
        raise DegenerateInputError("credibility undefined: PV total is not positive")
    return float(len(pv) * (pv @ p) / total)


def comprehensive(F: float, D: float, C: float, w: MetricWeights = MetricWeights()) -> float:
    """Weighted harmonic combination of the three metrics."""
    if min(F, D, C) <= 0.0:
        raise DomainError(f"metrics must be positive, got F={F}, D={D}, C={C}")
    return float(_comprehensive_batch(np.array([[F, D, C]]), w.as_array())[0])


def fairness_batch(a: np.ndarray, P: np.ndarray) -> np.ndarray:
    d = np.abs(P - a)
    dmax = d.max(axis=1)
    safe = np.where(dmax > ZERO_TOL, dmax, 1.0)
    F = 1.0 - d.sum(axis=1) / (a.size * safe)
    F = np.where(dmax > ZERO_TOL, F, 1.0)
    return np.clip(F, 0.0, 1.0)


def decentralization_batch(P: np.ndarray) -> np.ndarray:
    n = P.shape[1]
    cs = np.cumsum(-np.sort(-P, axis=1), axis=1)
    k = np.argmax(cs >= MAJORITY - ZERO_TOL, axis=1) + 1
    return k / n


def credibility_batch(pv: np.ndarray, P: np.ndarray) -> np.ndarray:
    total = pv.sum()
    if not total > 0.0:
        # all-zero masses are "all equal": C = 1 for every p
        return np.ones(P.shape[0])
    return pv.size * (P @ pv) / total


def _comprehensive_batch(M: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Objective over rows of (F, D, C). A zero metric with nonzero weight
    drives the harmonic combination to its limit 0."""
    w2 = w**2
    active = w2 > 0.0
    Ma = M[:, active]
    bad = np.any(Ma <= 0.0, axis=1)
    den = (w2[active] / np.where(Ma > 0.0, Ma, 1.0)).sum(axis=1)
    out = w2.sum() / den
    return np.where(bad, 0.0, out)


def project_simplex(X: np.ndarray) -> np.ndarray:
    """Clamp negatives to zero and renormalize each row; all-zero rows become uniform."""
    X = np.maximum(np.atleast_2d(np.asarray(X, dtype=float)), 0.0)
    s = X.sum(axis=1, keepdims=True)
    n = X.shape[1]
    return np.where(s > 0.0, X / np.where(s > 0.0, s, 1.0), 1.0 / n)


@dataclass
class ElectionOutcome:
    ids: list[str]
    probabilities: np.ndarray
    shares: np.ndarray
    fairness: float
    decentralization: float
    credibility: float
    comprehensive: float
    optimizer_trace: list[tuple[int, float, float, float, float]] = field(default_factory=list)
    degenerate: bool = False

    def probability_of(self, node: str) -> float:
        return float(self.probabilities[self.ids.index(node)])

    def write_trace(self, dest) -> None:
        """CSV of (iteration, best_O, F, D, C)."""
        own = isinstance(dest, (str, Path))
        fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "best_O", "F", "D", "C"])
            for it, o, f, d, c in self.optimizer_trace:
                w.writerow([it, repr(o), repr(f), repr(d), repr(c)])
        finally:
            if own:
                fh.close()


class _Objective:
    def __init__(self, apps: ApplicantSet, w: MetricWeights):
        self.a = apps.shares
        self.pv = apps.clamped
        self.w = w.as_array()

    def metrics(self, P: np.ndarray) -> np.ndarray:
        return np.column_stack([
            fairness_batch(self.a, P),
            decentralization_batch(P),
            credibility_batch(self.pv, P),
        ])

    def __call__(self, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        M = self.metrics(P)
        return _comprehensive_batch(M, self.w), M


def _restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(restart,)))


def _gwo(obj: _Objective, n: int, cfg: GwoConfig, rng: np.random.Generator):
    pack = cfg.pack_size
    X = project_simplex(rng.random((pack, n)))
    X[0] = 1.0 / n
    X[1] = obj.a
    fit, M = obj(X)

    order = np.argsort(-fit, kind="stable")[:3]
    leaders, lfit, lmet = X[order].copy(), fit[order].copy(), M[order].copy()
    trace = [(0, float(lfit[0]), *map(float, lmet[0]))]

    for it in range(cfg.iterations):
        a_ctrl = 2.0 - 2.0 * it / cfg.iterations
        r = rng.random((2, 3, pack, n))
        A = 2.0 * a_ctrl * r[0] - a_ctrl
        Cc = 2.0 * r[1]
        L = leaders[:, None, :]
        moved = (L - A * np.abs(Cc * L - X)).mean(axis=0)
        X = project_simplex(moved)
        fit, M = obj(X)

        pool_X = np.vstack([leaders, X])
        pool_f = np.concatenate([lfit, fit])
        pool_M = np.vstack([lmet, M])
        order = np.argsort(-pool_f, kind="stable")[:3]
        leaders, lfit, lmet = pool_X[order].copy(), pool_f[order].copy(), pool_M[order].copy()
        trace.append((it + 1, float(lfit[0]), *map(float, lmet[0])))

    return leaders[0], float(lfit[0]), lmet[0], trace


def solve_p1(
    apps: ApplicantSet,
    w: MetricWeights = MetricWeights(),
    cfg: GwoConfig = GwoConfig(),
) -> ElectionOutcome:
    """Probability vector over applicants maximizing the comprehensive objective.

    The uniform vector and the share vector are planted in every initial pack,
    so the result is never worse than either.  Degenerate PVs (no positive
    mass) yield the uniform vector with ``degenerate=True``.
    """
    n = len(apps)
    if n == 1:
        return ElectionOutcome(apps.ids, np.array([1.0]), np.array([1.0]), 1.0, 1.0, 1.0, 1.0,
                               [(0, 1.0, 1.0, 1.0, 1.0)], degenerate=apps.degenerate)
    if apps.degenerate:
        p = np.full(n, 1.0 / n)
        F, D, C = 1.0, decentralization(p), 1.0
        O = comprehensive(F, D, C, w)
        return ElectionOutcome(apps.ids, p, apps.shares, F, D, C, O, [(0, O, F, D, C)], True)

    obj = _Objective(apps, w)
    best = None
    for r in range(cfg.restarts):
        res = _gwo(obj, n, cfg, _restart_rng(cfg.seed, r))
        if best is None or res[1] > best[1]:
            best = res
    p, O, (F, D, C), trace = best
    p = project_simplex(p)[0]
    return ElectionOutcome(apps.ids, p, apps.shares.copy(), float(F), float(D), float(C),
                           float(O), trace)


def evaluate(apps: ApplicantSet, probs, w: MetricWeights = MetricWeights()) -> ElectionOutcome:
    """Score a given probability vector (used for the baseline strategies)."""
    p = np.asarray(probs, dtype=float)
    if p.shape != (len(apps),):
        raise DomainError("probability vector does not match applicant count")
    obj = _Objective(apps, w)
    O, M = obj(p[None, :])
    F, D, C = M[0]
    return ElectionOutcome(apps.ids, p, apps.shares.copy(), float(F), float(D), float(C),
                           float(O[0]), degenerate=apps.degenerate)
