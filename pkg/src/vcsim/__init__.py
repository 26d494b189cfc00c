"""Deterministic discrete-event simulator of a retail value chain."""

from .engine import EventLog, World, check_invariants, run
from .inventory import InventoryLedger
from .metrics import Metrics, ReplayResult, compute_metrics, replay_check
from .parties import Registry, RelationshipType, inverse_of
from .procurement import ProcurementStore
from .scenario import Scenario, load_scenario, loads_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "EventLog",
    "InventoryLedger",
    "Metrics",
    "ProcurementStore",
    "Registry",
    "RelationshipType",
    "ReplayResult",
    "Scenario",
    "World",
    "check_invariants",
    "compute_metrics",
    "inverse_of",
    "load_scenario",
    "loads_scenario",
    "parse_scenario",
    "replay_check",
    "run",
]
