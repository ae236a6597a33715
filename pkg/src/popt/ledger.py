"""Per-slot pairwise prospect values and windowed, decayed accumulation."""

from __future__ import annotations

import csv
import io
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, NotFoundError
from .prospect import DEFAULT_PARAMS, ProspectParams, value_fn, weight_fn

CSV_COLUMNS = ("slot", "seller_id", "buyer_id", "trade_price", "expected_price", "willingness")

DEFAULT_HORIZON = 10
DEFAULT_LOSS_FACTOR = 0.9


@dataclass(frozen=True)
class InteractionRecord:
    seller: str
    buyer: str
    slot: int
    trade_price: float
    expected_price: float
    willingness: float

    def __post_init__(self):
        if self.seller == self.buyer:
            raise DomainError(f"seller and buyer must differ ({self.seller})")
        if self.slot < 0:
            raise DomainError(f"slot must be non-negative, got {self.slot}")
        if not 0.0 <= self.willingness <= 1.0:
            raise DomainError(f"willingness {self.willingness} outside [0, 1]")
        if not (math.isfinite(self.trade_price) and math.isfinite(self.expected_price)):
            raise DomainError("prices must be finite")


def pairwise_pv(rec: InteractionRecord, params: ProspectParams = DEFAULT_PARAMS) -> float:
    """PV of one trade: value of the price against the expected price, times the
    weighted willingness."""
    return value_fn(rec.trade_price, rec.expected_price, params) * weight_fn(
        rec.willingness, params.phi
    )


def normalize_columns(raw) -> np.ndarray:
    """Scale every column to unit 2-norm; all-zero columns stay zero."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2:
        raise DomainError("expected a 2-D matrix")
    if not np.all(np.isfinite(raw)):
        raise DomainError("matrix entries must be finite")
    norms = np.linalg.norm(raw, axis=0)
    out = np.zeros_like(raw)
    nz = norms > 0.0
    out[:, nz] = raw[:, nz] / norms[nz]
    return out


@dataclass
class PvMatrix:
    """Raw pairwise PVs of one slot. Rows are the scored nodes, columns their
    counterparties."""

    slot: int
    rows: list[str]
    cols: list[str]
    entries: np.ndarray
    normalized: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float).reshape(len(self.rows), len(self.cols))
        self.normalized = normalize_columns(self.entries)
        self._row_index = {r: i for i, r in enumerate(self.rows)}

    def row_mean(self, node: str) -> float:
        """``(1/J) * sum_j pv'_ij`` for this slot; zero if the node is absent."""
        i = self._row_index.get(node)
        if i is None or not self.cols:
            return 0.0
        return float(self.normalized[i].sum() / len(self.cols))


def build_matrix(
    slot: int,
    records: Iterable[InteractionRecord],
    params_for: Callable[[str], ProspectParams] | None = None,
    score_side: str = "seller",
) -> PvMatrix:
    """Assemble the slot matrix from trade records.

    Repeated trades between the same pair within a slot are summed.  The PV is
    always evaluated with the seller's prospect parameters; ``score_side``
    only decides which party indexes the rows.
    """
    if score_side not in ("seller", "buyer"):
        raise DomainError(f"score_side must be 'seller' or 'buyer', got {score_side!r}")
    params_for = params_for or (lambda _sid: DEFAULT_PARAMS)
    rows: dict[str, int] = {}
    cols: dict[str, int] = {}
    cells: dict[tuple[int, int], float] = {}
    for rec in records:
        if rec.slot != slot:
            raise DomainError(f"record for slot {rec.slot} passed to slot {slot}")
        r, c = (rec.seller, rec.buyer) if score_side == "seller" else (rec.buyer, rec.seller)
        i = rows.setdefault(r, len(rows))
        j = cols.setdefault(c, len(cols))
        cells[(i, j)] = cells.get((i, j), 0.0) + pairwise_pv(rec, params_for(rec.seller))
    entries = np.zeros((len(rows), len(cols)))
    for (i, j), v in cells.items():
        entries[i, j] = v
    return PvMatrix(slot, list(rows), list(cols), entries)


class PvLedger:
    """Rolling window of the last ``horizon`` slot matrices.

    Single writer; readers may call :meth:`accumulate` between mutations.
    """

    def __init__(self, horizon: int = DEFAULT_HORIZON, loss_factor: float = DEFAULT_LOSS_FACTOR):
        if horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {horizon}")
        if not 0.0 < loss_factor <= 1.0:
            raise DomainError(f"loss factor must lie in (0, 1], got {loss_factor}")
        self.horizon = horizon
        self.loss_factor = loss_factor
        self.window: OrderedDict[int, PvMatrix] = OrderedDict()
        self.nodes: set[str] = set()
        self.latest_slot = -1

    def register(self, nodes: Iterable[str]) -> None:
        self.nodes.update(nodes)

    def add_matrix(self, matrix: PvMatrix) -> None:
        self.nodes.update(matrix.rows)
        self.window[matrix.slot] = matrix
        self.latest_slot = max(self.latest_slot, matrix.slot)
        self._prune()

    def ingest(
        self,
        slot: int,
        records: Iterable[InteractionRecord],
        params_for: Callable[[str], ProspectParams] | None = None,
        score_side: str = "seller",
    ) -> PvMatrix:
        matrix = build_matrix(slot, records, params_for, score_side)
        self.add_matrix(matrix)
        return matrix

    def advance(self, slot: int) -> None:
        """Move the clock to ``slot`` without recording a matrix (idle slot)."""
        self.latest_slot = max(self.latest_slot, slot)
        self._prune()

    def _prune(self) -> None:
        cutoff = self.latest_slot - self.horizon + 1
        for s in [s for s in self.window if s < cutoff]:
            del self.window[s]

    def accumulate(self, node: str, now: int | None = None) -> float:
        if node not in self.nodes:
            raise NotFoundError(node)
        now = self.latest_slot if now is None else now
        total = 0.0
        for k in range(now - self.horizon + 1, now + 1):
            m = self.window.get(k)
            if m is not None:
                total += self.loss_factor ** (now - k) * m.row_mean(node)
        return total

    def accumulated(self, now: int | None = None) -> dict[str, float]:
        return {n: self.accumulate(n, now) for n in sorted(self.nodes)}


def write_interactions(records: Sequence[InteractionRecord], dest) -> None:
    """Write the interaction CSV (header + one row per record)."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow([r.slot, r.seller, r.buyer, repr(float(r.trade_price)),
                        repr(float(r.expected_price)), repr(float(r.willingness))])
    finally:
        if own:
            fh.close()


def read_interactions(src) -> list[InteractionRecord]:
    if isinstance(src, (str, Path)):
        text = Path(src).read_text(encoding="utf-8")
    elif isinstance(src, io.TextIOBase) or hasattr(src, "read"):
        text = src.read()
    else:
        raise TypeError(f"cannot read interactions from {type(src).__name__}")
    reader = csv.DictReader(io.StringIO(text))
    missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise DomainError(f"interaction CSV missing columns: {sorted(missing)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            out.append(InteractionRecord(
                seller=row["seller_id"], buyer=row["buyer_id"], slot=int(row["slot"]),
                trade_price=float(row["trade_price"]),
                expected_price=float(row["expected_price"]),
                willingness=float(row["willingness"]),
            ))
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from exc
    return out


def replay(
    records: Iterable[InteractionRecord],
    ledger: PvLedger,
    params_for: Mapping[str, ProspectParams] | Callable[[str], ProspectParams] | None = None,
) -> PvLedger:
    """Feed a record stream into ``ledger`` slot by slot (ascending slots)."""
    if isinstance(params_for, Mapping):
        table = params_for
        params_for = lambda sid: table.get(sid, DEFAULT_PARAMS)  # noqa: E731
    by_slot: dict[int, list[InteractionRecord]] = {}
    for r in records:
        by_slot.setdefault(r.slot, []).append(r)
    for slot in sorted(by_slot):
        ledger.ingest(slot, by_slot[slot], params_for)
    return ledger


def accumulate_pv(ledger: PvLedger, node: str, now: int) -> float:
    return ledger.accumulate(node, now)
