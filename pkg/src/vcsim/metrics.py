"""Run metrics derived from the rendered event log, plus the replay checker.

The log text is the system of record: metrics are computed from it alone,
never from live simulator state. Rates and cycle times are exact rationals,
reported as a fraction string plus a fixed 6-decimal rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .errors import TruncatedLogError
from .scenario import Scenario


@dataclass(frozen=True)
class Metrics:
    orders_total: int
    orders_closed: int
    orders_rejected: int
    fill_rate: Fraction
    mean_cycle_time: Fraction
    cycle_time_defined: bool
    replenishments: int
    declines: int

    def as_flat_dict(self) -> dict:
        return {
            "orders_total": self.orders_total,
            "orders_closed": self.orders_closed,
            "orders_rejected": self.orders_rejected,
            "fill_rate": _fraction_str(self.fill_rate),
            "fill_rate_decimal": _six_decimals(self.fill_rate),
            "mean_cycle_time": _fraction_str(self.mean_cycle_time),
            "mean_cycle_time_decimal": _six_decimals(self.mean_cycle_time),
            "cycle_time_defined": self.cycle_time_defined,
            "replenishments": self.replenishments,
            "declines": self.declines,
        }


def _fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _six_decimals(value: Fraction) -> str:
    quotient = Decimal(value.numerator) / Decimal(value.denominator)
    return f"{quotient:.6f}"


def compute_metrics(log_text: str) -> Metrics:
    """Parse a completed run's log into counts, fill rate, and cycle time.

    Order lifecycles come from the NOTE transition lines; arrival times from
    the delivered CustomerOrder messages. The log must end with END.
    """
    lines = log_text.splitlines()
    if not lines or not lines[-1].startswith("END "):
        raise TruncatedLogError("log does not end with an END line")

    arrivals: dict[str, int] = {}
    closed: dict[str, int] = {}
    rejected: dict[str, int] = {}
    po_ids: set[str] = set()
    declines = 0

    for line in lines:
        parts = line.split()
        if parts[0] == "MSG":
            variant = parts[5]
            if variant == "CustomerOrder":
                arrivals[parts[6]] = int(parts[1])
            elif variant == "POSubmit":
                po_ids.add(parts[6])
            elif variant == "ShipGoodsResponse" and parts[7] == "Decline":
                declines += 1
        elif parts[0] == "NOTE" and len(parts) >= 5 and parts[2] == "ORDER":
            if parts[4] == "Closed":
                closed[parts[3]] = int(parts[1])
            elif parts[4] == "Rejected":
                rejected[parts[3]] = int(parts[1])

    total = len(arrivals)
    fill_rate = Fraction(len(closed), total) if total else Fraction(1)
    if closed:
        cycle_sum = sum(closed[oid] - arrivals[oid] for oid in closed)
        mean_cycle = Fraction(cycle_sum, len(closed))
        defined = True
    else:
        mean_cycle = Fraction(0)
        defined = False
    return Metrics(
        orders_total=total,
        orders_closed=len(closed),
        orders_rejected=len(rejected),
        fill_rate=fill_rate,
        mean_cycle_time=mean_cycle,
        cycle_time_defined=defined,
        replenishments=len(po_ids),
        declines=declines,
    )


@dataclass(frozen=True)
class ReplayResult:
    passed: bool
    line_number: int | None = None
    first_run: str | None = None
    second_run: str | None = None


def diff_logs(first: str, second: str) -> tuple[int, str, str] | None:
    """First differing line between two rendered logs, or None when equal."""
    if first == second:
        return None
    a_lines = first.splitlines()
    b_lines = second.splitlines()
    for i, (a, b) in enumerate(zip(a_lines, b_lines), start=1):
        if a != b:
            return (i, a, b)
    i = min(len(a_lines), len(b_lines)) + 1
    a = a_lines[i - 1] if len(a_lines) >= i else "<missing>"
    b = b_lines[i - 1] if len(b_lines) >= i else "<missing>"
    return (i, a, b)


def replay_check(scenario: Scenario) -> ReplayResult:
    """Run the scenario twice and byte-compare the rendered logs."""
    from .engine import run  # local import: engine depends on scenario

    first = run(scenario)[0].render()
    second = run(scenario)[0].render()
    diff = diff_logs(first, second)
    if diff is None:
        return ReplayResult(passed=True)
    return ReplayResult(False, *diff)
