"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407


def base_doc(**overrides) -> dict:
    """A small valid scenario: one retailer, two warehouses, one maker."""
    doc = {
        "locations": [{"id": "L1", "label": "HQ", "address": "1 Main St"}],
        "parties": [
            {"id": "RET", "kind": "organization", "name": "RetailCo",
             "locations": ["L1"], "roles": ["seller"]},
            {"id": "W1", "kind": "organization", "name": "Warehouse One"},
            {"id": "W2", "kind": "organization", "name": "Warehouse Two"},
            {"id": "M1", "kind": "organization", "name": "MakerCo", "roles": ["seller"]},
            {"id": "C1", "kind": "person", "name": "Ada", "roles": ["buyer"]},
        ],
        "relationships": [
            {"from": "M1", "to": "W1", "type": "supplier_to", "start": 0},
            {"from": "M1", "to": "W2", "type": "supplier_to", "start": 0},
            {"from": "C1", "to": "RET", "type": "customer_of", "start": 0},
        ],
        "agents": {
            "retailer": "RET",
            "warehouses": [
                {"id": "W1", "manufacturer": "M1", "reorder_qty": 20},
                {"id": "W2", "manufacturer": "M1", "reorder_qty": 20},
            ],
            "manufacturers": [{"id": "M1", "production_delay": 3}],
            "customers": ["C1"],
        },
        "catalog": [{"sku": "A", "unit_price": 500, "unit_cost": 300}],
        "inventory": {"W1": {"A": 10}, "W2": {"A": 3}},
        "orders": [{"time": 0, "buyer": "C1", "sku": "A", "qty": 8}],
    }
    doc.update(overrides)
    return doc


def make_fuzz_doc(rng: random.Random) -> dict:
    """Random but always-valid scenario within the fuzz envelope
    (at most 5 warehouses, at most 200 orders)."""
    n_warehouses = rng.randint(1, 5)
    n_manufacturers = rng.randint(1, n_warehouses)
    n_customers = rng.randint(1, 4)
    skus = ["A", "B", "C"][: rng.randint(1, 3)]

    roll = rng.random()
    if roll < 0.70:
        n_orders = rng.randint(1, 25)
    elif roll < 0.92:
        n_orders = rng.randint(26, 80)
    else:
        n_orders = rng.randint(81, 200)

    warehouse_ids = [f"W{i}" for i in range(1, n_warehouses + 1)]
    manufacturer_ids = [f"M{i}" for i in range(1, n_manufacturers + 1)]
    customer_ids = [f"C{i}" for i in range(1, n_customers + 1)]

    parties = [{"id": "RET", "kind": "organization", "name": "RetailCo", "roles": ["seller"]}]
    parties += [{"id": w, "kind": "organization", "name": f"Warehouse {w}"} for w in warehouse_ids]
    parties += [
        {"id": m, "kind": "organization", "name": f"Maker {m}", "roles": ["seller"]}
        for m in manufacturer_ids
    ]
    parties += [
        {"id": c, "kind": rng.choice(["person", "organization"]), "name": f"Customer {c}",
         "roles": ["buyer"]}
        for c in customer_ids
    ]

    assignment = {w: rng.choice(manufacturer_ids) for w in warehouse_ids}
    relationships = [
        {"from": assignment[w], "to": w, "type": "supplier_to", "start": 0}
        for w in warehouse_ids
    ]
    for c in customer_ids:
        if rng.random() < 0.5:
            relationships.append({"from": c, "to": "RET", "type": "customer_of", "start": 0})

    inventory = {}
    for w in warehouse_ids:
        rows = {sku: rng.randint(0, 30) for sku in skus if rng.random() < 0.8}
        if rows:
            inventory[w] = rows

    horizon = max(1, n_orders * 2)
    orders = [
        {
            "time": rng.randint(0, horizon),
            "buyer": rng.choice(customer_ids),
            "sku": rng.choice(skus),
            "qty": rng.randint(1, 12),
        }
        for _ in range(n_orders)
    ]

    latency_roll = rng.random()
    if latency_roll < 0.7:
        latency = {}
    elif latency_roll < 0.9:
        roles = ["customer", "retailer", "warehouse", "manufacturer"]
        pairs = {}
        for _ in range(rng.randint(1, 4)):
            pairs[f"{rng.choice(roles)}->{rng.choice(roles)}"] = rng.randint(1, 3)
        latency = {"default": rng.randint(1, 2), "pairs": pairs}
    else:
        latency = {"seed": rng.randint(0, 2**32), "min": 1, "max": 3}

    return {
        "parties": parties,
        "relationships": relationships,
        "agents": {
            "retailer": "RET",
            "warehouses": [
                {"id": w, "manufacturer": assignment[w], "reorder_qty": rng.randint(5, 25)}
                for w in warehouse_ids
            ],
            "manufacturers": [
                {"id": m, "production_delay": rng.randint(1, 4)} for m in manufacturer_ids
            ],
            "customers": customer_ids,
        },
        "catalog": [
            {"sku": sku, "unit_price": rng.randint(1, 900), "unit_cost": rng.randint(1, 600)}
            for sku in skus
        ],
        "inventory": inventory,
        "orders": orders,
        "latency": latency,
        "params": {"max_events": 50_000},
    }


def make_shortage_doc(rng: random.Random) -> dict:
    """Scenario guaranteed to trigger at least one decline: the first order
    exceeds every warehouse's opening stock."""
    doc = make_fuzz_doc(rng)
    stock_cap = 5
    for rows in doc["inventory"].values():
        for sku in rows:
            rows[sku] = min(rows[sku], stock_cap)
    sku = doc["catalog"][0]["sku"]
    buyer = doc["agents"]["customers"][0]
    doc["orders"] = [{"time": 0, "buyer": buyer, "sku": sku, "qty": stock_cap + 5}] + doc[
        "orders"
    ][:30]
    return doc


# --- independent oracles -----------------------------------------------


def naive_metrics_recount(log_text: str) -> dict:
    """Second, MSG-only parser for the run metrics.

    Deliberately avoids the NOTE transition lines the production parser
    uses: an order counts as closed once both its shipment notice and its
    payment were delivered, closing at the later of the two.
    """
    arrivals: dict[str, int] = {}
    shipped: dict[str, int] = {}
    paid: dict[str, int] = {}
    rejected: set[str] = set()
    po_ids: set[str] = set()
    declines = 0
    lines = log_text.splitlines()
    assert lines and lines[-1].startswith("END ")
    for line in lines:
        parts = line.split()
        if parts[0] != "MSG":
            continue
        time, variant = int(parts[1]), parts[5]
        if variant == "CustomerOrder":
            arrivals[parts[6]] = time
        elif variant == "GoodsShipped":
            shipped[parts[6]] = time
        elif variant == "Payment":
            paid[parts[6]] = time
        elif variant == "OrderRejected":
            rejected.add(parts[6])
        elif variant == "POSubmit":
            po_ids.add(parts[6])
        elif variant == "ShipGoodsResponse" and parts[7] == "Decline":
            declines += 1
    closed = {oid: max(shipped[oid], paid[oid]) for oid in shipped if oid in paid}
    total = len(arrivals)
    cycle_times = [closed[oid] - arrivals[oid] for oid in closed]
    return {
        "orders_total": total,
        "orders_closed": len(closed),
        "orders_rejected": len(rejected),
        "fill_rate": Fraction(len(closed), total) if total else Fraction(1),
        "mean_cycle_time": (
            Fraction(sum(cycle_times), len(cycle_times)) if cycle_times else Fraction(0)
        ),
        "cycle_time_defined": bool(cycle_times),
        "replenishments": len(po_ids),
        "declines": declines,
    }


def lcg_twin_sequence(seed: int, count: int) -> list[int]:
    """Independent 64-bit LCG built from 32-bit limb arithmetic."""
    mask32 = (1 << 32) - 1
    mod64 = 1 << 64
    a_lo, a_hi = MULTIPLIER & mask32, MULTIPLIER >> 32
    state = seed % mod64
    outputs = []
    for _ in range(count):
        s_lo, s_hi = state & mask32, state >> 32
        low = a_lo * s_lo
        mid = (a_lo * s_hi + a_hi * s_lo) & mask32
        product = (low + (mid << 32)) % mod64
        state = (product + INCREMENT) % mod64
        outputs.append(state)
    return outputs


def parse_msg_lines(log_text: str) -> list[list[str]]:
    return [line.split() for line in log_text.splitlines() if line.startswith("MSG ")]
