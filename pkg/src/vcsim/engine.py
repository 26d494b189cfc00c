"""Deterministic discrete-event scheduler and append-only event log.

The world holds a priority queue of envelopes totally ordered by
(deliver_at, seq), a monotone clock, and one handler-plus-state pair per
agent. Each step pops the minimum envelope, advances the clock, dispatches
to the recipient's handler, and schedules whatever the handler emits at
clock plus latency. Identical scenarios therefore produce byte-identical
logs.

Log line grammar:

    NOTE <time> <text>
    INV <time> <op> <sku> <delta>
    MSG <time> <seq> <from> <to> <variant> <fields...>
    END <final_time> <event_count>
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from . import agents
from .errors import (
    EventBudgetExceededError,
    InvariantViolationError,
    SchedulesInPastError,
    UnknownRecipientError,
)
from .inventory import InventoryLedger
from .messages import CustomerOrder, Envelope, GoodsDelivery, GoodsShipped, Send
from .parties import PartyId, Registry, SimTime
from .procurement import ProcurementStore
from .rng import Lcg64
from .scenario import Scenario


class AgentRole(Enum):
    CUSTOMER = "customer"
    RETAILER = "retailer"
    WAREHOUSE = "warehouse"
    MANUFACTURER = "manufacturer"


ROLE_NAMES = [role.value for role in AgentRole]

_HANDLERS: dict[AgentRole, Callable] = {
    AgentRole.CUSTOMER: agents.customer_handle,
    AgentRole.RETAILER: agents.retailer_handle,
    AgentRole.WAREHOUSE: agents.warehouse_handle,
    AgentRole.MANUFACTURER: agents.manufacturer_handle,
}


class LatencyTable:
    """Constant delay per ordered pair of agent roles.

    A seeded table draws each pair's constant once, from the pinned LCG,
    enumerating role pairs in declaration order; results are stable across
    runs and implementations.
    """

    def __init__(self, pairs: dict[tuple[str, str], int], default: int = 1):
        self.pairs = pairs
        self.default = default

    def between(self, from_role: AgentRole, to_role: AgentRole) -> int:
        return self.pairs.get((from_role.value, to_role.value), self.default)

    @classmethod
    def seeded(cls, seed: int, lo: int, hi: int) -> "LatencyTable":
        rng = Lcg64(seed)
        pairs = {}
        for a in ROLE_NAMES:
            for b in ROLE_NAMES:
                pairs[(a, b)] = rng.next_in(lo, hi)
        return cls(pairs)


@dataclass
class EventLog:
    entries: list[str] = field(default_factory=list)
    final_time: SimTime | None = None
    event_count: int | None = None

    def note(self, at: SimTime, text: str) -> None:
        self.entries.append(f"NOTE {at} {text}")

    def message(self, env: Envelope) -> None:
        self.entries.append(env.render())

    def inventory(self, line: str) -> None:
        self.entries.append(line)

    def finish(self, final_time: SimTime, event_count: int) -> None:
        self.final_time = final_time
        self.event_count = event_count

    def render(self) -> str:
        lines = list(self.entries)
        if self.final_time is not None:
            lines.append(f"END {self.final_time} {self.event_count}")
        return "\n".join(lines) + "\n"


@dataclass
class AgentRuntime:
    role: AgentRole
    state: object
    ledger: InventoryLedger | None = None
    drained: int = 0  # ledger history rows already copied into the log


class World:
    """One simulation instance: registry, agents, queue, clock, and log."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.registry: Registry = scenario.build_registry()
        self.clock: SimTime = 0
        self.log = EventLog()
        self.agents: dict[PartyId, AgentRuntime] = {}
        self.delivered = 0
        self._queue: list[tuple[SimTime, int, Envelope]] = []
        self._next_seq = 0
        self.latency = _build_latency(scenario)
        self._build_agents()
        self._seed_inventory()
        self._inject_orders()

    # -- construction -----------------------------------------------------

    def _build_agents(self) -> None:
        sc = self.scenario
        for cid in sc.customers:
            self._add_agent(cid, AgentRole.CUSTOMER, agents.CustomerState(cid))
        prices = {item.sku: item.unit_price for item in sc.catalog}
        retailer_ledger = InventoryLedger(sc.retailer)
        retailer_state = agents.RetailerState(
            sc.retailer,
            known_warehouses=[w.party_id for w in sc.warehouses],
            prices=prices,
        )
        self._add_agent(sc.retailer, AgentRole.RETAILER, retailer_state, retailer_ledger)
        costs = {item.sku: item.unit_cost for item in sc.catalog}
        for spec in sc.warehouses:
            ledger = InventoryLedger(spec.party_id)
            state = agents.WarehouseState(
                spec.party_id,
                ledger=ledger,
                manufacturer=spec.manufacturer,
                reorder_qty=spec.reorder_qty,
                unit_costs=costs,
                procurement=ProcurementStore(self.registry),
            )
            self._add_agent(spec.party_id, AgentRole.WAREHOUSE, state, ledger)
        for spec in sc.manufacturers:
            state = agents.ManufacturerState(spec.party_id, spec.production_delay)
            self._add_agent(spec.party_id, AgentRole.MANUFACTURER, state)

    def _add_agent(self, party_id, role, state, ledger=None) -> None:
        self.agents[party_id] = AgentRuntime(role, state, ledger)
        self.log.note(0, f"AGENT {role.value} {party_id}")

    def _seed_inventory(self) -> None:
        for owner, rows in self.scenario.initial_inventory.items():
            runtime = self.agents[owner]
            for sku, qty in rows.items():
                runtime.ledger.set_initial(sku, qty, at=0)
            self._drain_ledger(runtime)

    def _inject_orders(self) -> None:
        for i, arrival in enumerate(self.scenario.orders, start=1):
            payload = CustomerOrder(f"O{i}", arrival.buyer, arrival.sku, arrival.qty)
            env = Envelope(arrival.time, self._take_seq(), arrival.buyer,
                           self.scenario.retailer, payload)
            self.schedule(env)

    # -- scheduling and stepping -------------------------------------------

    def _take_seq(self) -> int:
        seq = self._next_seq
        self._next_seq += 1
        return seq

    def schedule(self, env: Envelope) -> None:
        if env.deliver_at < self.clock:
            raise SchedulesInPastError(
                f"cannot deliver at {env.deliver_at}; clock is {self.clock}"
            )
        heapq.heappush(self._queue, (env.deliver_at, env.seq, env))

    def send(self, frm: PartyId, send: Send) -> Envelope:
        wire = self.clock + self.latency.between(
            self.agents[frm].role, self.agents[send.to].role
        )
        # A promised delivery tick cannot beat the wire latency.
        deliver_at = wire if send.at is None else max(send.at, wire)
        env = Envelope(deliver_at, self._take_seq(), frm, send.to, send.message)
        self.schedule(env)
        return env

    def step(self) -> Envelope | None:
        """Deliver the next envelope; None once the queue is quiescent."""
        if not self._queue:
            return None
        _, _, env = heapq.heappop(self._queue)
        self.clock = env.deliver_at
        runtime = self.agents.get(env.to)
        if runtime is None:
            raise UnknownRecipientError(f"no agent registered for {env.to!r}")
        self.delivered += 1
        self.log.message(env)
        if isinstance(env.payload, CustomerOrder):
            self._note_interaction(env.payload)
        sends, notes = _HANDLERS[runtime.role](runtime.state, env)
        for outgoing in sends:
            self.send(env.to, outgoing)
        if runtime.ledger is not None:
            self._drain_ledger(runtime)
        for text in notes:
            self.log.note(self.clock, text)
        return env

    def _drain_ledger(self, runtime: AgentRuntime) -> None:
        history = runtime.ledger.history
        for entry in history[runtime.drained:]:
            self.log.inventory(entry.render())
        runtime.drained = len(history)

    def _note_interaction(self, order: CustomerOrder) -> None:
        # Customer behavior tracking: bucket the purchase on the buyer's
        # relationship with the retailer, when the scenario declares one.
        rel_id = self.registry.customer_relationship(order.buyer, self.scenario.retailer)
        if rel_id is None:
            return
        price = next(
            (item.unit_price for item in self.scenario.catalog if item.sku == order.sku), 0
        )
        self.registry.record_interaction(rel_id, self.clock, order.qty * price)

    def run_to_quiescence(self) -> None:
        limit = self.scenario.max_events
        while self.step() is not None:
            if self.delivered > limit:
                raise EventBudgetExceededError(
                    f"exceeded {limit} delivered events; likely livelock"
                )
        self.log.finish(self.clock, self.delivered)

    # -- inspection ---------------------------------------------------------

    def ledgers(self) -> list[InventoryLedger]:
        return [rt.ledger for rt in self.agents.values() if rt.ledger is not None]

    def retailer_state(self) -> agents.RetailerState:
        return self.agents[self.scenario.retailer].state


def _build_latency(scenario: Scenario) -> LatencyTable:
    spec = scenario.latency
    if spec.seed is not None:
        return LatencyTable.seeded(spec.seed, spec.lo, spec.hi)
    return LatencyTable(dict(spec.pairs), spec.default)


def run(scenario: Scenario) -> tuple[EventLog, World]:
    """Execute a scenario to quiescence; same input, same log bytes."""
    world = World(scenario)
    world.run_to_quiescence()
    return world.log, world


def check_invariants(world: World) -> None:
    """Post-run conservation and quiescence checks; raises on violation.

    * every order reached Closed or Rejected;
    * no reservation outlives the run;
    * goods shipped to buyers plus goods still on hand equal opening stock
      plus everything manufacturers delivered.
    """
    if world._queue:
        raise InvariantViolationError("event queue is not quiescent")
    retailer = world.retailer_state()
    for order_id, order in retailer.open_orders.items():
        if order.phase not in (agents.OrderPhase.CLOSED, agents.OrderPhase.REJECTED):
            raise InvariantViolationError(
                f"order {order_id} ended in phase {order.phase.value}"
            )
    reserved = sum(ledger.total_reserved() for ledger in world.ledgers())
    if reserved != 0:
        raise InvariantViolationError(f"{reserved} units still reserved at quiescence")
    shipped = 0
    delivered = 0
    for line in world.log.entries:
        if not line.startswith("MSG "):
            continue
        parts = line.split()
        if parts[5] == GoodsShipped.__name__:
            shipped += int(parts[8])
        elif parts[5] == GoodsDelivery.__name__:
            delivered += int(parts[8])
    initial = sum(
        sum(rows.values()) for rows in world.scenario.initial_inventory.values()
    )
    on_hand = sum(ledger.total_on_hand() for ledger in world.ledgers())
    if shipped + on_hand != initial + delivered:
        raise InvariantViolationError(
            f"conservation broken: shipped {shipped} + on_hand {on_hand} "
            f"!= initial {initial} + delivered {delivered}"
        )
