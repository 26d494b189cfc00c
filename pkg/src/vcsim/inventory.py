"""Per-owner, per-SKU stock ledger with reservations and replayable history.

Every mutation appends a history row, so the current state can always be
reconstructed by folding the history from zero. Failed operations raise
before touching anything.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InsufficientStockError, NonPositiveQuantityError, NotReservedError

# History op kinds. Deltas are signed: INIT/RESTOCK add to on_hand, RESERVE
# adds to reserved, RELEASE subtracts from reserved, SHIP subtracts from both.
OP_INIT = "INIT"
OP_RESTOCK = "RESTOCK"
OP_RESERVE = "RESERVE"
OP_RELEASE = "RELEASE"
OP_SHIP = "SHIP"


@dataclass(frozen=True)
class HistoryEntry:
    at: int
    op: str
    sku: str
    delta: int

    def render(self) -> str:
        return f"INV {self.at} {self.op} {self.sku} {self.delta}"


class InventoryLedger:
    def __init__(self, owner: str):
        self.owner = owner
        self._rows: dict[str, list[int]] = {}  # sku -> [on_hand, reserved]
        self.history: list[HistoryEntry] = []

    def _row(self, sku: str) -> list[int]:
        return self._rows.setdefault(sku, [0, 0])

    def on_hand(self, sku: str) -> int:
        return self._rows.get(sku, (0, 0))[0]

    def reserved(self, sku: str) -> int:
        return self._rows.get(sku, (0, 0))[1]

    def available(self, sku: str) -> int:
        """On hand minus reserved; unknown SKUs read as zero."""
        row = self._rows.get(sku)
        return 0 if row is None else row[0] - row[1]

    def skus(self) -> list[str]:
        return list(self._rows)

    def set_initial(self, sku: str, qty: int, at: int = 0) -> None:
        """Seed opening stock; recorded so history replays from zero."""
        if qty < 0:
            raise NonPositiveQuantityError("initial stock must be >= 0")
        if qty == 0:
            return
        self._row(sku)[0] += qty
        self.history.append(HistoryEntry(at, OP_INIT, sku, qty))

    def restock(self, sku: str, qty: int, at: int) -> None:
        if qty < 1:
            raise NonPositiveQuantityError("restock quantity must be >= 1")
        self._row(sku)[0] += qty
        self.history.append(HistoryEntry(at, OP_RESTOCK, sku, qty))

    def reserve(self, sku: str, qty: int, at: int) -> None:
        if qty < 1:
            raise NonPositiveQuantityError("reserve quantity must be >= 1")
        # Look up without creating: failed calls must not touch the rows.
        row = self._rows.get(sku)
        available = 0 if row is None else row[0] - row[1]
        if available < qty:
            raise InsufficientStockError(
                f"{self.owner}: cannot reserve {qty} of {sku}; available {available}"
            )
        row[1] += qty
        self.history.append(HistoryEntry(at, OP_RESERVE, sku, qty))

    def release(self, sku: str, qty: int, at: int) -> None:
        if qty < 1:
            raise NonPositiveQuantityError("release quantity must be >= 1")
        row = self._rows.get(sku)
        reserved = 0 if row is None else row[1]
        if reserved < qty:
            raise NotReservedError(f"{self.owner}: only {reserved} of {sku} reserved")
        row[1] -= qty
        self.history.append(HistoryEntry(at, OP_RELEASE, sku, -qty))

    def ship(self, sku: str, qty: int, at: int) -> None:
        if qty < 1:
            raise NonPositiveQuantityError("ship quantity must be >= 1")
        row = self._rows.get(sku)
        reserved = 0 if row is None else row[1]
        if reserved < qty:
            raise NotReservedError(
                f"{self.owner}: cannot ship {qty} of {sku}; reserved {reserved}"
            )
        row[0] -= qty
        row[1] -= qty
        self.history.append(HistoryEntry(at, OP_SHIP, sku, -qty))

    def total_on_hand(self) -> int:
        return sum(row[0] for row in self._rows.values())

    def total_reserved(self) -> int:
        return sum(row[1] for row in self._rows.values())

    def fingerprint(self) -> tuple:
        """Hashable snapshot; equal fingerprints mean identical ledger state."""
        rows = tuple(sorted((sku, row[0], row[1]) for sku, row in self._rows.items()))
        return (rows, len(self.history))


def replay(history: list[HistoryEntry]) -> dict[str, tuple[int, int]]:
    """Fold a history back into (on_hand, reserved) per SKU.

    Independent of the ledger's own bookkeeping; used as the oracle for
    conservation checks.
    """
    rows: dict[str, list[int]] = {}
    for entry in history:
        row = rows.setdefault(entry.sku, [0, 0])
        if entry.op in (OP_INIT, OP_RESTOCK):
            row[0] += entry.delta
        elif entry.op == OP_RESERVE:
            row[1] += entry.delta
        elif entry.op == OP_RELEASE:
            row[1] += entry.delta
        elif entry.op == OP_SHIP:
            row[0] += entry.delta
            row[1] += entry.delta
        else:
            raise ValueError(f"unknown history op {entry.op!r}")
    return {sku: (row[0], row[1]) for sku, row in rows.items()}
