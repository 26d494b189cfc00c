"""Session-wide fixtures: the fuzzed scenario corpus, run once and shared."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

import pytest

from vcsim import parse_scenario, run
from vcsim.agents import OrderPhase
from vcsim.scenario import Scenario

from helpers import make_fuzz_doc, make_shortage_doc

CORPUS_SIZE = 500
SHORTAGE_SUITE_SIZE = 20


@dataclass
class RunSummary:
    doc: dict
    scenario: Scenario
    log_text: str
    initial_total: int
    final_on_hand: int
    reserved_total: int
    order_phases: list[str]
    event_count: int
    max_events: int
    warehouse_count: int
    elapsed: float


def _execute(doc: dict) -> RunSummary:
    scenario = parse_scenario(doc)
    started = time.perf_counter()
    log, world = run(scenario)
    elapsed = time.perf_counter() - started
    retailer = world.retailer_state()
    return RunSummary(
        doc=doc,
        scenario=scenario,
        log_text=log.render(),
        initial_total=sum(
            sum(rows.values()) for rows in scenario.initial_inventory.values()
        ),
        final_on_hand=sum(ledger.total_on_hand() for ledger in world.ledgers()),
        reserved_total=sum(ledger.total_reserved() for ledger in world.ledgers()),
        order_phases=[o.phase.value for o in retailer.open_orders.values()],
        event_count=log.event_count,
        max_events=scenario.max_events,
        warehouse_count=len(scenario.warehouses),
        elapsed=elapsed,
    )


@pytest.fixture(scope="session")
def corpus_runs() -> list[RunSummary]:
    runs = []
    for i in range(CORPUS_SIZE):
        rng = random.Random(1_000 + i)
        runs.append(_execute(make_fuzz_doc(rng)))
    return runs


@pytest.fixture(scope="session")
def shortage_runs() -> list[RunSummary]:
    runs = []
    for i in range(SHORTAGE_SUITE_SIZE):
        rng = random.Random(9_000 + i)
        runs.append(_execute(make_shortage_doc(rng)))
    return runs


TERMINAL = {OrderPhase.CLOSED.value, OrderPhase.REJECTED.value}
