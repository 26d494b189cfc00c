"""Purchasing workflow: plan, transmit, receive and inspect, book.

A purchase runs through a strict linear state machine:

    Planned -> Transmitted -> Received -> WarrantIssued -> Booked

Any call arriving out of order fails with WrongStateError and mutates
nothing. Money is integer minor units throughout; ids are sequential
integers per kind so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .errors import (
    DuplicateSkuError,
    DuplicateWarrantError,
    EmptyPlanError,
    InspectionFailedError,
    NonPositiveQuantityError,
    NotASupplierError,
    OverDeliveryError,
    UnknownPlanError,
    UnknownReceiptError,
    UnknownSkuError,
    UnknownWarrantError,
    WrongStateError,
)
from .parties import PartyId, PartyRole, Registry, SimTime

if TYPE_CHECKING:
    from .inventory import InventoryLedger


class ProcurementState(Enum):
    PLANNED = "Planned"
    TRANSMITTED = "Transmitted"
    RECEIVED = "Received"
    WARRANT_ISSUED = "WarrantIssued"
    BOOKED = "Booked"


class Inspection(Enum):
    PASSED = "Passed"
    REJECTED = "Rejected"


@dataclass(frozen=True)
class PlanLine:
    sku: str
    quantity: int
    unit_cost: int


@dataclass
class PurchasePlan:
    id: int
    lines: list[PlanLine]
    requested_by: PartyId
    created_at: SimTime
    transmitted: bool = False


@dataclass(frozen=True)
class Expenditure:
    plan: int
    total: int


@dataclass
class PurchaseDocument:
    id: int
    plan: int
    supplier: PartyId
    lines: list[PlanLine]
    state: ProcurementState


@dataclass
class GoodsReceipt:
    id: int
    document: int
    received: list[tuple[str, int]]
    inspection: Inspection
    at: SimTime


@dataclass(frozen=True)
class WarehouseWarrant:
    id: int
    receipt: int
    warehouse: PartyId


@dataclass(frozen=True)
class LedgerEntry:
    id: int
    warrant: int
    invoice_ref: str
    amount: int
    kind: str = "Payable"


def render_document(doc: PurchaseDocument) -> list[str]:
    """Canonical line rendering: one header, one LINE per plan line."""
    lines = [f"PO {doc.id} {doc.supplier} {doc.state.value}"]
    lines.extend(f"LINE {ln.sku} {ln.quantity} {ln.unit_cost}" for ln in doc.lines)
    return lines


@dataclass
class ProcurementStore:
    """Single-writer store for one purchasing department's workflow objects."""

    registry: Registry
    plans: dict[int, PurchasePlan] = field(default_factory=dict)
    expenditures: dict[int, Expenditure] = field(default_factory=dict)
    documents: dict[int, PurchaseDocument] = field(default_factory=dict)
    receipts: dict[int, GoodsReceipt] = field(default_factory=dict)
    warrants: dict[int, WarehouseWarrant] = field(default_factory=dict)
    ledger_entries: dict[int, LedgerEntry] = field(default_factory=dict)

    def _next_id(self, table: dict) -> int:
        return len(table) + 1

    # -- stage 1: plan and expenditure -------------------------------------

    def create_plan(
        self, requested_by: PartyId, lines: list[PlanLine], at: SimTime
    ) -> PurchasePlan:
        if not lines:
            raise EmptyPlanError("a purchase plan needs at least one line")
        seen = set()
        for line in lines:
            if line.quantity < 1:
                raise NonPositiveQuantityError(f"line {line.sku}: quantity must be >= 1")
            if line.unit_cost < 0:
                raise NonPositiveQuantityError(f"line {line.sku}: unit cost must be >= 0")
            if line.sku in seen:
                raise DuplicateSkuError(f"sku {line.sku} appears twice in the plan")
            seen.add(line.sku)
        self.registry.party(requested_by)
        plan = PurchasePlan(self._next_id(self.plans), list(lines), requested_by, at)
        self.plans[plan.id] = plan
        return plan

    def plan(self, plan_id: int) -> PurchasePlan:
        try:
            return self.plans[plan_id]
        except KeyError:
            raise UnknownPlanError(f"plan {plan_id} not found") from None

    def formulate_expenditure(self, plan_id: int) -> Expenditure:
        """Total cost of the plan, exact in minor units. One per plan: repeated
        calls return the stored record."""
        plan = self.plan(plan_id)
        existing = self.expenditures.get(plan_id)
        if existing is not None:
            return existing
        total = sum(line.quantity * line.unit_cost for line in plan.lines)
        exp = Expenditure(plan_id, total)
        self.expenditures[plan_id] = exp
        return exp

    # -- stage 2: transmit --------------------------------------------------

    def transmit_document(
        self, plan_id: int, supplier: PartyId, at: SimTime
    ) -> PurchaseDocument:
        plan = self.plan(plan_id)
        if plan.transmitted:
            raise WrongStateError(f"plan {plan_id} was already transmitted")
        party = self.registry.party(supplier)
        if PartyRole.SELLER not in party.roles and not self.registry.has_supplier_link(
            supplier, plan.requested_by, at
        ):
            raise NotASupplierError(
                f"{supplier} is not supplier-linked to {plan.requested_by}"
            )
        doc = PurchaseDocument(
            self._next_id(self.documents),
            plan_id,
            supplier,
            list(plan.lines),
            ProcurementState.TRANSMITTED,
        )
        plan.transmitted = True
        self.documents[doc.id] = doc
        return doc

    def document(self, doc_id: int) -> PurchaseDocument:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise UnknownPlanError(f"document {doc_id} not found") from None

    # -- stage 3: receipt, inspection, warrant -------------------------------

    def receive_goods(
        self,
        doc_id: int,
        received: list[tuple[str, int]],
        inspection: Inspection,
        at: SimTime,
        ledger: InventoryLedger | None = None,
    ) -> GoodsReceipt:
        """Record a delivery against a transmitted document.

        When inspection passes, received goods are posted to `ledger`
        atomically with the receipt: all validation happens up front, the
        restock runs next, and only then is anything stored.
        """
        doc = self.document(doc_id)
        if doc.state is not ProcurementState.TRANSMITTED:
            raise WrongStateError(f"document {doc_id} is {doc.state.value}, not Transmitted")
        ordered = {line.sku: line.quantity for line in doc.lines}
        totals: dict[str, int] = {}
        for sku, qty in received:
            if sku not in ordered:
                raise UnknownSkuError(f"sku {sku} is not on document {doc_id}")
            if qty < 1:
                raise NonPositiveQuantityError(f"received quantity for {sku} must be >= 1")
            totals[sku] = totals.get(sku, 0) + qty
        for sku, qty in totals.items():
            if qty > ordered[sku]:
                raise OverDeliveryError(
                    f"received {qty} of {sku}, ordered {ordered[sku]}"
                )
        if inspection is Inspection.PASSED and ledger is not None:
            for sku, qty in received:
                ledger.restock(sku, qty, at)
        receipt = GoodsReceipt(
            self._next_id(self.receipts), doc_id, list(received), inspection, at
        )
        self.receipts[receipt.id] = receipt
        doc.state = ProcurementState.RECEIVED
        return receipt

    def receipt(self, receipt_id: int) -> GoodsReceipt:
        try:
            return self.receipts[receipt_id]
        except KeyError:
            raise UnknownReceiptError(f"receipt {receipt_id} not found") from None

    def issue_warrant(self, receipt_id: int, warehouse: PartyId) -> WarehouseWarrant:
        receipt = self.receipt(receipt_id)
        if receipt.inspection is not Inspection.PASSED:
            raise InspectionFailedError(f"receipt {receipt_id} failed inspection")
        for warrant in self.warrants.values():
            if warrant.receipt == receipt_id:
                raise DuplicateWarrantError(f"receipt {receipt_id} already has a warrant")
        doc = self.document(receipt.document)
        if doc.state is not ProcurementState.RECEIVED:
            raise WrongStateError(f"document {doc.id} is {doc.state.value}, not Received")
        self.registry.party(warehouse)
        warrant = WarehouseWarrant(self._next_id(self.warrants), receipt_id, warehouse)
        self.warrants[warrant.id] = warrant
        doc.state = ProcurementState.WARRANT_ISSUED
        return warrant

    def warrant(self, warrant_id: int) -> WarehouseWarrant:
        try:
            return self.warrants[warrant_id]
        except KeyError:
            raise UnknownWarrantError(f"warrant {warrant_id} not found") from None

    # -- stage 4: book the payable -------------------------------------------

    def book_ledger(self, warrant_id: int, invoice_ref: str) -> LedgerEntry:
        """Book the payable for received (not ordered) quantities; terminal."""
        warrant = self.warrant(warrant_id)
        receipt = self.receipt(warrant.receipt)
        doc = self.document(receipt.document)
        if doc.state is not ProcurementState.WARRANT_ISSUED:
            raise WrongStateError(f"document {doc.id} is {doc.state.value}, not WarrantIssued")
        unit_costs = {line.sku: line.unit_cost for line in doc.lines}
        amount = sum(qty * unit_costs[sku] for sku, qty in receipt.received)
        entry = LedgerEntry(
            self._next_id(self.ledger_entries), warrant_id, invoice_ref, amount
        )
        self.ledger_entries[entry.id] = entry
        doc.state = ProcurementState.BOOKED
        return entry

    def fingerprint(self) -> tuple:
        """Snapshot for purity checks: failed calls must leave this unchanged."""
        return (
            tuple((p.id, p.transmitted, tuple(p.lines)) for p in self.plans.values()),
            tuple(self.expenditures.values()),
            tuple((d.id, d.plan, d.supplier, d.state) for d in self.documents.values()),
            tuple((r.id, r.document, tuple(r.received), r.inspection) for r in self.receipts.values()),
            tuple(self.warrants.values()),
            tuple(self.ledger_entries.values()),
        )
