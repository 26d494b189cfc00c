"""Per-role handler state machines for the order fulfillment protocol.

Three interaction legs are realized here:

* goods purchase: customer order, invoice, shipment, payment;
* source goods: the retailer fans a shipping request out to every known
  warehouse, collects capacity responses, confirms one and cancels the rest;
* replenish stocks: a warehouse that cannot fill a request declines it,
  submits a purchase order to its manufacturer, and re-answers the backlogged
  request once the delivery lands.

A warehouse's first Decline is provisional: replenishment is already on the
way, and the warehouse will re-answer the request exactly once after the
delivery. The retailer therefore keeps a declining warehouse pending until
its second (final) response arrives. Without this the released-reservation
and termination invariants cannot hold.

Handlers are pure transition functions: given (state, envelope) they return
the updated state's outgoing sends and human-readable transition notes,
reading nothing but their arguments. The engine invokes them sequentially.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    DuplicateResponseError,
    ProtocolError,
    UnknownOrderError,
    UnknownPoError,
    UnknownRequestError,
)
from .inventory import InventoryLedger
from .messages import (
    Accept,
    CancelReservation,
    CustomerOrder,
    Decline,
    Envelope,
    GoodsDelivery,
    GoodsShipped,
    OrderInvoice,
    OrderRejected,
    Payment,
    POAck,
    POSubmit,
    Send,
    ShipConfirm,
    ShipGoodsRequest,
    ShipGoodsResponse,
)
from .parties import PartyId
from .procurement import Inspection, PlanLine, ProcurementStore, render_document

HandlerResult = tuple[list[Send], list[str]]

REJECT_NO_CAPACITY = "no_capacity"


class OrderPhase(Enum):
    AWAITING_SOURCING = "AwaitingSourcing"
    AWAITING_RESPONSES = "AwaitingResponses"
    AWAITING_SHIPMENT = "AwaitingShipment"
    AWAITING_PAYMENT = "AwaitingPayment"
    CLOSED = "Closed"
    REJECTED = "Rejected"


# Response bookkeeping per shipping request.
_AWAIT_FIRST = "first"
_AWAIT_REANSWER = "reanswer"
_FINAL = "final"


@dataclass
class OpenOrder:
    buyer: PartyId
    sku: str
    qty: int
    arrival: int
    phase: OrderPhase = OrderPhase.AWAITING_SOURCING
    requests: dict[str, PartyId] = field(default_factory=dict)  # request -> warehouse
    status: dict[str, str] = field(default_factory=dict)
    accepts: list[tuple[PartyId, int, str]] = field(default_factory=list)
    invoice_amount: int = 0
    paid: bool = False

    def pending(self) -> bool:
        return any(s != _FINAL for s in self.status.values())


@dataclass
class RetailerState:
    party_id: PartyId
    known_warehouses: list[PartyId]
    prices: dict[str, int]
    open_orders: dict[str, OpenOrder] = field(default_factory=dict)
    request_index: dict[str, str] = field(default_factory=dict)  # request -> order
    next_request: int = 1


@dataclass
class RequestRecord:
    order_id: str
    sku: str
    qty: int
    reserved: bool
    requester: PartyId


@dataclass
class PendingPo:
    sku: str
    qty: int
    backlog: list[str]
    document: int


@dataclass
class WarehouseState:
    party_id: PartyId
    ledger: InventoryLedger
    manufacturer: PartyId
    reorder_qty: int
    unit_costs: dict[str, int]
    procurement: ProcurementStore
    open_requests: dict[str, RequestRecord] = field(default_factory=dict)
    pending_pos: dict[str, PendingPo] = field(default_factory=dict)
    next_po: int = 1


@dataclass
class ManufacturerState:
    party_id: PartyId
    production_delay: int
    seen_pos: dict[str, int] = field(default_factory=dict)  # po_id -> promised eta


@dataclass
class CustomerState:
    party_id: PartyId
    invoices: dict[str, int] = field(default_factory=dict)
    rejections: dict[str, str] = field(default_factory=dict)


def select_warehouse(
    accepts: list[tuple[PartyId, int]], qty: int, preference: list[PartyId]
) -> PartyId | None:
    """Pick the feasible accept with the most available stock.

    Ties break toward the earliest warehouse in the preference order;
    None when no accept covers the requested quantity.
    """
    feasible = [(wid, avail) for wid, avail in accepts if avail >= qty]
    if not feasible:
        return None

    def rank(item: tuple[PartyId, int]) -> tuple[int, int]:
        wid, avail = item
        pos = preference.index(wid) if wid in preference else len(preference)
        return (-avail, pos)

    return min(feasible, key=rank)[0]


# --- retailer -----------------------------------------------------------


def retailer_handle(state: RetailerState, env: Envelope) -> HandlerResult:
    msg = env.payload
    if isinstance(msg, CustomerOrder):
        return _retailer_order(state, msg, env.deliver_at)
    if isinstance(msg, ShipGoodsResponse):
        return _retailer_response(state, msg)
    if isinstance(msg, GoodsShipped):
        return _retailer_shipped(state, msg)
    if isinstance(msg, Payment):
        return _retailer_payment(state, msg)
    raise ProtocolError(f"retailer cannot handle {type(msg).__name__}")


def _retailer_order(state: RetailerState, msg: CustomerOrder, now: int) -> HandlerResult:
    if msg.order_id in state.open_orders:
        raise ProtocolError(f"order {msg.order_id} already exists")
    if msg.sku not in state.prices:
        raise ProtocolError(f"no price listed for sku {msg.sku}")
    order = OpenOrder(msg.buyer, msg.sku, msg.qty, arrival=now)
    state.open_orders[msg.order_id] = order
    sends = []
    for wid in state.known_warehouses:
        request_id = f"RQ{state.next_request}"
        state.next_request += 1
        order.requests[request_id] = wid
        order.status[request_id] = _AWAIT_FIRST
        state.request_index[request_id] = msg.order_id
        sends.append(Send(wid, ShipGoodsRequest(request_id, msg.order_id, msg.sku, msg.qty)))
    order.phase = OrderPhase.AWAITING_RESPONSES
    notes = [f"ORDER {msg.order_id} {order.phase.value}"]
    if not sends:
        # No warehouses to ask: decide immediately (vacuously no accepts).
        decided, decide_notes = _retailer_decide(state, msg.order_id, order)
        sends.extend(decided)
        notes.extend(decide_notes)
    return sends, notes


def _retailer_response(state: RetailerState, msg: ShipGoodsResponse) -> HandlerResult:
    order_id = state.request_index.get(msg.request_id)
    if order_id is None:
        raise UnknownOrderError(f"response for unknown request {msg.request_id}")
    order = state.open_orders[order_id]
    status = order.status.get(msg.request_id)
    if status == _FINAL or order.phase is not OrderPhase.AWAITING_RESPONSES:
        raise DuplicateResponseError(f"request {msg.request_id} already answered")
    warehouse = order.requests[msg.request_id]
    if isinstance(msg.verdict, Accept):
        order.accepts.append((warehouse, msg.verdict.available, msg.request_id))
        order.status[msg.request_id] = _FINAL
    elif status == _AWAIT_FIRST:
        # Provisional: the warehouse is replenishing and will answer again.
        order.status[msg.request_id] = _AWAIT_REANSWER
    else:
        order.status[msg.request_id] = _FINAL
    if order.pending():
        return [], []
    return _retailer_decide(state, order_id, order)


def _retailer_decide(state: RetailerState, order_id: str, order: OpenOrder) -> HandlerResult:
    pairs = [(wid, avail) for wid, avail, _ in order.accepts]
    winner = select_warehouse(pairs, order.qty, state.known_warehouses)
    sends: list[Send] = []
    if winner is None:
        order.phase = OrderPhase.REJECTED
        sends.append(Send(order.buyer, OrderRejected(order_id, REJECT_NO_CAPACITY)))
        return sends, [f"ORDER {order_id} {order.phase.value}"]
    for wid, _, request_id in order.accepts:
        if wid == winner:
            sends.append(Send(wid, ShipConfirm(request_id, wid)))
        else:
            sends.append(Send(wid, CancelReservation(request_id)))
    order.invoice_amount = order.qty * state.prices[order.sku]
    sends.append(Send(order.buyer, OrderInvoice(order_id, order.invoice_amount)))
    order.phase = OrderPhase.AWAITING_SHIPMENT
    return sends, [f"ORDER {order_id} {order.phase.value}"]


def _retailer_shipped(state: RetailerState, msg: GoodsShipped) -> HandlerResult:
    order = state.open_orders.get(msg.order_id)
    if order is None:
        raise UnknownOrderError(f"shipment for unknown order {msg.order_id}")
    if order.phase is not OrderPhase.AWAITING_SHIPMENT:
        raise ProtocolError(f"order {msg.order_id} is {order.phase.value}")
    if order.paid:
        order.phase = OrderPhase.CLOSED
    else:
        order.phase = OrderPhase.AWAITING_PAYMENT
    return [], [f"ORDER {msg.order_id} {order.phase.value}"]


def _retailer_payment(state: RetailerState, msg: Payment) -> HandlerResult:
    order = state.open_orders.get(msg.order_id)
    if order is None:
        raise UnknownOrderError(f"payment for unknown order {msg.order_id}")
    if msg.amount != order.invoice_amount:
        raise ProtocolError(
            f"payment {msg.amount} does not match invoice {order.invoice_amount}"
        )
    if order.phase is OrderPhase.AWAITING_PAYMENT:
        order.phase = OrderPhase.CLOSED
        return [], [f"ORDER {msg.order_id} {order.phase.value}"]
    if order.phase is OrderPhase.AWAITING_SHIPMENT:
        # Payment can outrun the shipment notice under asymmetric latencies;
        # hold it and close when the goods arrive.
        order.paid = True
        return [], []
    raise ProtocolError(f"unexpected payment for order {msg.order_id}")


# --- warehouse ----------------------------------------------------------


def warehouse_handle(state: WarehouseState, env: Envelope) -> HandlerResult:
    msg = env.payload
    now = env.deliver_at
    if isinstance(msg, ShipGoodsRequest):
        return _warehouse_request(state, msg, env.frm, now)
    if isinstance(msg, ShipConfirm):
        return _warehouse_confirm(state, msg, env.frm, now)
    if isinstance(msg, CancelReservation):
        return _warehouse_cancel(state, msg, now)
    if isinstance(msg, GoodsDelivery):
        return _warehouse_delivery(state, msg, env.frm, now)
    if isinstance(msg, POAck):
        # Acknowledgment only; the delivery may even have landed already
        # when production is faster than the ack's latency.
        return [], []
    raise ProtocolError(f"warehouse cannot handle {type(msg).__name__}")


def _warehouse_request(
    state: WarehouseState, msg: ShipGoodsRequest, retailer: PartyId, now: int
) -> HandlerResult:
    available = state.ledger.available(msg.sku)
    if available >= msg.qty:
        state.ledger.reserve(msg.sku, msg.qty, now)
        state.open_requests[msg.request_id] = RequestRecord(
            msg.order_id, msg.sku, msg.qty, reserved=True, requester=retailer
        )
        return [Send(retailer, ShipGoodsResponse(msg.request_id, Accept(available)))], []

    # Cannot fill: decline and start a replenishment round with the
    # manufacturer, keeping the request on the purchase order's backlog.
    state.open_requests[msg.request_id] = RequestRecord(
        msg.order_id, msg.sku, msg.qty, reserved=False, requester=retailer
    )
    shortfall = msg.qty - available
    po_qty = max(state.reorder_qty, shortfall)
    po_id = f"{state.party_id}-PO{state.next_po}"
    state.next_po += 1
    doc, notes = _procure(state, msg.sku, po_qty, now)
    state.pending_pos[po_id] = PendingPo(msg.sku, po_qty, [msg.request_id], doc.id)
    sends = [
        Send(retailer, ShipGoodsResponse(msg.request_id, Decline())),
        Send(state.manufacturer, POSubmit(po_id, msg.sku, po_qty)),
    ]
    return sends, notes


def _procure(state: WarehouseState, sku: str, qty: int, now: int):
    """Run the plan/expenditure/transmit stages of the purchasing workflow."""
    store = state.procurement
    unit_cost = state.unit_costs.get(sku, 0)
    plan = store.create_plan(state.party_id, [PlanLine(sku, qty, unit_cost)], now)
    expenditure = store.formulate_expenditure(plan.id)
    doc = store.transmit_document(plan.id, state.manufacturer, now)
    notes = [
        f"PLAN {plan.id} Planned",
        f"EXPENDITURE {plan.id} {expenditure.total}",
    ]
    notes.extend(render_document(doc))
    return doc, notes


def _warehouse_confirm(
    state: WarehouseState, msg: ShipConfirm, retailer: PartyId, now: int
) -> HandlerResult:
    record = state.open_requests.pop(msg.request_id, None)
    if record is None:
        raise UnknownRequestError(f"confirm for unknown request {msg.request_id}")
    if not record.reserved:
        raise ProtocolError(f"request {msg.request_id} holds no reservation")
    state.ledger.ship(record.sku, record.qty, now)
    return [Send(retailer, GoodsShipped(record.order_id, record.sku, record.qty))], []


def _warehouse_cancel(state: WarehouseState, msg: CancelReservation, now: int) -> HandlerResult:
    record = state.open_requests.pop(msg.request_id, None)
    if record is None:
        raise UnknownRequestError(f"cancel for unknown request {msg.request_id}")
    if not record.reserved:
        raise ProtocolError(f"request {msg.request_id} holds no reservation")
    state.ledger.release(record.sku, record.qty, now)
    return [], []


def _warehouse_delivery(
    state: WarehouseState, msg: GoodsDelivery, manufacturer: PartyId, now: int
) -> HandlerResult:
    po = state.pending_pos.pop(msg.po_id, None)
    if po is None:
        raise UnknownPoError(f"delivery for unknown po {msg.po_id}")
    store = state.procurement
    receipt = store.receive_goods(
        po.document, [(msg.sku, msg.qty)], Inspection.PASSED, now, state.ledger
    )
    doc = store.document(po.document)
    notes = [f"PO {doc.id} {doc.supplier} {doc.state.value}"]
    warrant = store.issue_warrant(receipt.id, state.party_id)
    notes.append(f"PO {doc.id} {doc.supplier} {doc.state.value}")
    store.book_ledger(warrant.id, f"INV-{msg.po_id}")
    notes.append(f"PO {doc.id} {doc.supplier} {doc.state.value}")

    # Re-answer the backlog in FIFO order; each request gets exactly one
    # re-answer, and a second miss is final.
    sends: list[Send] = []
    for request_id in po.backlog:
        record = state.open_requests.get(request_id)
        if record is None:
            continue
        available = state.ledger.available(record.sku)
        if available >= record.qty:
            state.ledger.reserve(record.sku, record.qty, now)
            record.reserved = True
            verdict: Accept | Decline = Accept(available)
        else:
            del state.open_requests[request_id]
            verdict = Decline()
        sends.append(Send(record.requester, ShipGoodsResponse(request_id, verdict)))
    return sends, notes


# --- manufacturer -------------------------------------------------------


def manufacturer_handle(state: ManufacturerState, env: Envelope) -> HandlerResult:
    msg = env.payload
    if not isinstance(msg, POSubmit):
        raise ProtocolError(f"manufacturer cannot handle {type(msg).__name__}")
    now = env.deliver_at
    promised = state.seen_pos.get(msg.po_id)
    if promised is not None:
        # Duplicate submission: repeat the acknowledgment, never the delivery.
        return [Send(env.frm, POAck(msg.po_id, promised))], []
    eta = now + state.production_delay
    state.seen_pos[msg.po_id] = eta
    sends = [
        Send(env.frm, POAck(msg.po_id, eta)),
        Send(env.frm, GoodsDelivery(msg.po_id, msg.sku, msg.qty), at=eta),
    ]
    return sends, []


# --- customer -----------------------------------------------------------


def customer_handle(state: CustomerState, env: Envelope) -> HandlerResult:
    msg = env.payload
    if isinstance(msg, OrderInvoice):
        state.invoices[msg.order_id] = msg.amount
        return [Send(env.frm, Payment(msg.order_id, msg.amount))], []
    if isinstance(msg, OrderRejected):
        state.rejections[msg.order_id] = msg.reason
        return [], []
    raise ProtocolError(f"customer cannot handle {type(msg).__name__}")
