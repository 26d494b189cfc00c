"""Wire vocabulary: message variants, envelopes, and outgoing sends.

Messages are immutable payloads exchanged between agents. An Envelope adds
routing metadata (delivery tick, global send sequence, endpoints). Handlers
emit Send records; the engine turns them into envelopes, assigning sequence
numbers and delivery times.

Log rendering is one line per delivered envelope:

    MSG <time> <seq> <from> <to> <variant> <fields...>

with payload fields in declaration order, bit-exact across runs.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .parties import PartyId, SimTime


def _require_id(value: str, name: str) -> None:
    if not value:
        raise ValueError(f"{name} must be nonempty")


def _require_qty(qty: int) -> None:
    if qty < 1:
        raise ValueError("quantity must be >= 1")


@dataclass(frozen=True)
class CustomerOrder:
    order_id: str
    buyer: PartyId
    sku: str
    qty: int

    def __post_init__(self):
        _require_id(self.order_id, "order_id")
        _require_qty(self.qty)


@dataclass(frozen=True)
class OrderInvoice:
    order_id: str
    amount: int


@dataclass(frozen=True)
class Payment:
    order_id: str
    amount: int


@dataclass(frozen=True)
class ShipGoodsRequest:
    request_id: str
    order_id: str
    sku: str
    qty: int

    def __post_init__(self):
        _require_id(self.request_id, "request_id")
        _require_qty(self.qty)


@dataclass(frozen=True)
class Accept:
    available: int


@dataclass(frozen=True)
class Decline:
    pass


@dataclass(frozen=True)
class ShipGoodsResponse:
    request_id: str
    verdict: Accept | Decline


@dataclass(frozen=True)
class ShipConfirm:
    request_id: str
    warehouse: PartyId


@dataclass(frozen=True)
class CancelReservation:
    """Bookkeeping: tells an accepting-but-not-selected warehouse to release."""

    request_id: str


@dataclass(frozen=True)
class GoodsShipped:
    order_id: str
    sku: str
    qty: int

    def __post_init__(self):
        _require_qty(self.qty)


@dataclass(frozen=True)
class POSubmit:
    po_id: str
    sku: str
    qty: int

    def __post_init__(self):
        _require_id(self.po_id, "po_id")
        _require_qty(self.qty)


@dataclass(frozen=True)
class POAck:
    po_id: str
    eta: SimTime


@dataclass(frozen=True)
class GoodsDelivery:
    po_id: str
    sku: str
    qty: int

    def __post_init__(self):
        _require_qty(self.qty)


@dataclass(frozen=True)
class OrderRejected:
    order_id: str
    reason: str


Message = (
    CustomerOrder
    | OrderInvoice
    | Payment
    | ShipGoodsRequest
    | ShipGoodsResponse
    | ShipConfirm
    | CancelReservation
    | GoodsShipped
    | POSubmit
    | POAck
    | GoodsDelivery
    | OrderRejected
)


def message_fields(msg: Message) -> list[str]:
    """Payload tokens in declaration order; verdicts flatten to their own tokens."""
    tokens: list[str] = []
    for f in dataclasses.fields(msg):
        value = getattr(msg, f.name)
        if isinstance(value, Accept):
            tokens.extend(["Accept", str(value.available)])
        elif isinstance(value, Decline):
            tokens.append("Decline")
        else:
            tokens.append(str(value))
    return tokens


@dataclass(frozen=True)
class Envelope:
    deliver_at: SimTime
    seq: int
    frm: PartyId
    to: PartyId
    payload: Message

    def render(self) -> str:
        variant = type(self.payload).__name__
        fields = " ".join(message_fields(self.payload))
        line = f"MSG {self.deliver_at} {self.seq} {self.frm} {self.to} {variant}"
        return f"{line} {fields}" if fields else line


@dataclass(frozen=True)
class Send:
    """Outgoing message from a handler; the engine assigns seq and timing.

    `at` overrides the default clock-plus-latency delivery (used for
    deliveries promised at a fixed future tick).
    """

    to: PartyId
    message: Message
    at: SimTime | None = None
