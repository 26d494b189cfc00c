"""Scenario files: parsing, strict validation, and registry bootstrap.

A scenario is a UTF-8 JSON document with a fixed top-level key set
(`parties`, `locations`, `relationships`, `agents`, `catalog`, `inventory`,
`orders`, `latency`, `params`). Unknown keys anywhere are rejected so typos
fail loudly instead of silently changing a run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, RegistryError, ValidationError
from .parties import (
    Channel,
    CommunicationPoint,
    PartyId,
    PartyKind,
    PartyRole,
    Registry,
    RelationshipType,
)

DEFAULT_LATENCY = 1
DEFAULT_BUCKET_WIDTH = 10
DEFAULT_MAX_EVENTS = 10_000
DEFAULT_REORDER_QTY = 10
DEFAULT_PRODUCTION_DELAY = 1

_TOP_KEYS = {
    "parties", "locations", "relationships", "agents", "catalog",
    "inventory", "orders", "latency", "params",
}
_AGENT_ROLES = ("customer", "retailer", "warehouse", "manufacturer")


@dataclass(frozen=True)
class WarehouseSpec:
    party_id: PartyId
    manufacturer: PartyId
    reorder_qty: int


@dataclass(frozen=True)
class ManufacturerSpec:
    party_id: PartyId
    production_delay: int


@dataclass(frozen=True)
class CatalogItem:
    sku: str
    unit_price: int
    unit_cost: int


@dataclass(frozen=True)
class OrderArrival:
    time: int
    buyer: PartyId
    sku: str
    qty: int


@dataclass(frozen=True)
class LatencySpec:
    default: int = DEFAULT_LATENCY
    pairs: dict[tuple[str, str], int] = field(default_factory=dict)
    seed: int | None = None
    lo: int = DEFAULT_LATENCY
    hi: int = DEFAULT_LATENCY


@dataclass
class Scenario:
    parties: list[dict]
    locations: list[dict]
    relationships: list[dict]
    retailer: PartyId
    warehouses: list[WarehouseSpec]
    manufacturers: list[ManufacturerSpec]
    customers: list[PartyId]
    catalog: list[CatalogItem]
    initial_inventory: dict[PartyId, dict[str, int]]
    orders: list[OrderArrival]
    latency: LatencySpec
    bucket_width: int = DEFAULT_BUCKET_WIDTH
    max_events: int = DEFAULT_MAX_EVENTS

    def build_registry(self) -> Registry:
        """Fresh registry per call so repeated runs never share state."""
        registry = Registry(bucket_width=self.bucket_width)
        for loc in self.locations:
            registry.register_location(
                loc.get("label", ""), loc.get("address", ""), location_id=loc["id"]
            )
        for party in self.parties:
            points = [
                CommunicationPoint(
                    Channel(p["channel"]), p["address"], p.get("purpose")
                )
                for p in party.get("communication_points", [])
            ]
            registry.register_party(
                PartyKind(party["kind"]),
                party["name"],
                locations=party.get("locations", []),
                roles={PartyRole(r) for r in party.get("roles", [])},
                communication_points=points,
                party_id=party["id"],
            )
        for rel in self.relationships:
            registry.link_relationship(
                rel["from"],
                rel["to"],
                RelationshipType(rel["type"]),
                rel.get("start", 0),
                rel.get("end"),
            )
        return registry


def _check_keys(obj: dict, allowed: set[str], entity: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(entity, f"unknown keys: {', '.join(sorted(unknown))}")


def _require(obj: dict, key: str, entity: str):
    if key not in obj:
        raise ValidationError(entity, f"missing required key {key!r}")
    return obj[key]


def _as_int(value, entity: str, key: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(entity, f"{key} must be an integer")
    if minimum is not None and value < minimum:
        raise ValidationError(entity, f"{key} must be >= {minimum}")
    return value


def _as_str(value, entity: str, key: str) -> str:
    if not isinstance(value, str) or not value:
        raise ValidationError(entity, f"{key} must be a nonempty string")
    return value


def parse_scenario(data: dict) -> Scenario:
    """Validate a scenario document and fill defaults; raises ValidationError."""
    if not isinstance(data, dict):
        raise ValidationError("scenario", "top level must be a JSON object")
    _check_keys(data, _TOP_KEYS, "scenario")
    for key in ("parties", "agents", "catalog"):
        _require(data, key, "scenario")

    locations = _parse_locations(data.get("locations", []))
    parties = _parse_parties(data["parties"])
    relationships = data.get("relationships", [])
    retailer, warehouses, manufacturers, customers = _parse_agents(data["agents"])
    catalog = _parse_catalog(data["catalog"])
    latency = _parse_latency(data.get("latency", {}))
    params = data.get("params", {})
    _check_keys(params, {"max_events", "bucket_width"}, "params")
    max_events = _as_int(params.get("max_events", DEFAULT_MAX_EVENTS), "params", "max_events", 1)
    bucket_width = _as_int(
        params.get("bucket_width", DEFAULT_BUCKET_WIDTH), "params", "bucket_width", 1
    )

    scenario = Scenario(
        parties=parties,
        locations=locations,
        relationships=_parse_relationships(relationships),
        retailer=retailer,
        warehouses=warehouses,
        manufacturers=manufacturers,
        customers=customers,
        catalog=catalog,
        initial_inventory=_parse_inventory(data.get("inventory", {}), catalog),
        orders=_parse_orders(data.get("orders", []), customers, catalog),
        latency=latency,
        bucket_width=bucket_width,
        max_events=max_events,
    )
    _cross_validate(scenario)
    return scenario


def _parse_locations(raw) -> list[dict]:
    if not isinstance(raw, list):
        raise ValidationError("locations", "must be a list")
    seen = set()
    for entry in raw:
        _check_keys(entry, {"id", "label", "address"}, "location")
        loc_id = _as_str(_require(entry, "id", "location"), "location", "id")
        if loc_id in seen:
            raise ValidationError(f"location {loc_id}", "duplicate id")
        seen.add(loc_id)
    return raw


def _parse_parties(raw) -> list[dict]:
    if not isinstance(raw, list) or not raw:
        raise ValidationError("parties", "must be a nonempty list")
    kinds = {k.value for k in PartyKind}
    roles = {r.value for r in PartyRole}
    channels = {c.value for c in Channel}
    seen = set()
    for entry in raw:
        _check_keys(
            entry,
            {"id", "kind", "name", "locations", "roles", "communication_points"},
            "party",
        )
        pid = _as_str(_require(entry, "id", "party"), "party", "id")
        if pid in seen:
            raise ValidationError(f"party {pid}", "duplicate id")
        seen.add(pid)
        entity = f"party {pid}"
        kind = _as_str(_require(entry, "kind", entity), entity, "kind")
        if kind not in kinds:
            raise ValidationError(entity, f"kind must be one of {sorted(kinds)}")
        _as_str(_require(entry, "name", entity), entity, "name")
        for role in entry.get("roles", []):
            if role not in roles:
                raise ValidationError(entity, f"unknown role {role!r}")
        for point in entry.get("communication_points", []):
            _check_keys(point, {"channel", "address", "purpose"}, entity)
            if _require(point, "channel", entity) not in channels:
                raise ValidationError(entity, f"unknown channel {point['channel']!r}")
            _as_str(_require(point, "address", entity), entity, "address")
    return raw


def _parse_relationships(raw) -> list[dict]:
    if not isinstance(raw, list):
        raise ValidationError("relationships", "must be a list")
    labels = {t.value for t in RelationshipType}
    for entry in raw:
        _check_keys(entry, {"from", "to", "type", "start", "end"}, "relationship")
        _as_str(_require(entry, "from", "relationship"), "relationship", "from")
        _as_str(_require(entry, "to", "relationship"), "relationship", "to")
        rel_type = _require(entry, "type", "relationship")
        if rel_type not in labels:
            raise ValidationError("relationship", f"unknown type {rel_type!r}")
        _as_int(entry.get("start", 0), "relationship", "start", 0)
        if entry.get("end") is not None:
            _as_int(entry["end"], "relationship", "end", 0)
    return raw


def _parse_agents(raw) -> tuple[PartyId, list[WarehouseSpec], list[ManufacturerSpec], list[PartyId]]:
    _check_keys(raw, {"retailer", "warehouses", "manufacturers", "customers"}, "agents")
    retailer = _as_str(_require(raw, "retailer", "agents"), "agents", "retailer")

    warehouses = []
    for entry in _require(raw, "warehouses", "agents"):
        _check_keys(entry, {"id", "manufacturer", "reorder_qty"}, "warehouse")
        wid = _as_str(_require(entry, "id", "warehouse"), "warehouse", "id")
        manufacturer = _as_str(
            _require(entry, "manufacturer", f"warehouse {wid}"), f"warehouse {wid}", "manufacturer"
        )
        reorder = _as_int(
            entry.get("reorder_qty", DEFAULT_REORDER_QTY), f"warehouse {wid}", "reorder_qty", 1
        )
        warehouses.append(WarehouseSpec(wid, manufacturer, reorder))
    if not warehouses:
        raise ValidationError("agents", "at least one warehouse is required")

    manufacturers = []
    for entry in _require(raw, "manufacturers", "agents"):
        _check_keys(entry, {"id", "production_delay"}, "manufacturer")
        mid = _as_str(_require(entry, "id", "manufacturer"), "manufacturer", "id")
        delay = _as_int(
            entry.get("production_delay", DEFAULT_PRODUCTION_DELAY),
            f"manufacturer {mid}", "production_delay", 1,
        )
        manufacturers.append(ManufacturerSpec(mid, delay))
    if not manufacturers:
        raise ValidationError("agents", "at least one manufacturer is required")

    customers = list(_require(raw, "customers", "agents"))
    if not customers:
        raise ValidationError("agents", "at least one customer is required")
    for cid in customers:
        _as_str(cid, "agents", "customer id")
    return retailer, warehouses, manufacturers, customers


def _parse_catalog(raw) -> list[CatalogItem]:
    if not isinstance(raw, list):
        raise ValidationError("catalog", "must be a list")
    items = []
    seen = set()
    for entry in raw:
        _check_keys(entry, {"sku", "unit_price", "unit_cost"}, "catalog")
        sku = _as_str(_require(entry, "sku", "catalog"), "catalog", "sku")
        if sku in seen:
            raise ValidationError(f"catalog {sku}", "duplicate sku")
        seen.add(sku)
        price = _as_int(_require(entry, "unit_price", f"catalog {sku}"), f"catalog {sku}", "unit_price", 0)
        cost = _as_int(_require(entry, "unit_cost", f"catalog {sku}"), f"catalog {sku}", "unit_cost", 0)
        items.append(CatalogItem(sku, price, cost))
    return items


def _parse_inventory(raw, catalog: list[CatalogItem]) -> dict[PartyId, dict[str, int]]:
    if not isinstance(raw, dict):
        raise ValidationError("inventory", "must be an object keyed by party id")
    skus = {item.sku for item in catalog}
    result: dict[PartyId, dict[str, int]] = {}
    for owner, rows in raw.items():
        if not isinstance(rows, dict):
            raise ValidationError(f"inventory {owner}", "must map sku to quantity")
        parsed = {}
        for sku, qty in rows.items():
            if sku not in skus:
                raise ValidationError(f"inventory {owner}", f"unknown sku {sku!r}")
            parsed[sku] = _as_int(qty, f"inventory {owner}", sku, 0)
        result[owner] = parsed
    return result


def _parse_orders(raw, customers: list[PartyId], catalog: list[CatalogItem]) -> list[OrderArrival]:
    if not isinstance(raw, list):
        raise ValidationError("orders", "must be a list")
    skus = {item.sku for item in catalog}
    orders = []
    for i, entry in enumerate(raw, start=1):
        entity = f"order {i}"
        _check_keys(entry, {"time", "buyer", "sku", "qty"}, entity)
        time = _as_int(_require(entry, "time", entity), entity, "time", 0)
        buyer = _as_str(_require(entry, "buyer", entity), entity, "buyer")
        if buyer not in customers:
            raise ValidationError(entity, f"buyer {buyer!r} is not a declared customer")
        sku = _as_str(_require(entry, "sku", entity), entity, "sku")
        if sku not in skus:
            raise ValidationError(entity, f"unknown sku {sku!r}")
        qty = _as_int(_require(entry, "qty", entity), entity, "qty", 1)
        orders.append(OrderArrival(time, buyer, sku, qty))
    return orders


def _parse_latency(raw) -> LatencySpec:
    _check_keys(raw, {"default", "pairs", "seed", "min", "max"}, "latency")
    if raw.get("seed") is not None:
        if "default" in raw or "pairs" in raw:
            raise ValidationError("latency", "seeded table excludes default/pairs")
        seed = _as_int(raw["seed"], "latency", "seed", 0)
        lo = _as_int(raw.get("min", DEFAULT_LATENCY), "latency", "min", 0)
        hi = _as_int(raw.get("max", lo), "latency", "max", lo)
        return LatencySpec(seed=seed, lo=lo, hi=hi)
    default = _as_int(raw.get("default", DEFAULT_LATENCY), "latency", "default", 0)
    pairs: dict[tuple[str, str], int] = {}
    for key, value in raw.get("pairs", {}).items():
        if "->" not in key:
            raise ValidationError("latency", f"pair key {key!r} must look like 'role->role'")
        a, b = key.split("->", 1)
        if a not in _AGENT_ROLES or b not in _AGENT_ROLES:
            raise ValidationError("latency", f"unknown roles in pair {key!r}")
        pairs[(a, b)] = _as_int(value, "latency", key, 0)
    return LatencySpec(default=default, pairs=pairs)


def _cross_validate(scenario: Scenario) -> None:
    try:
        registry = scenario.build_registry()
    except RegistryError as exc:
        raise ValidationError("registry", str(exc)) from exc
    except (KeyError, ValueError) as exc:
        raise ValidationError("registry", f"malformed entry: {exc}") from exc

    agent_ids: list[PartyId] = [scenario.retailer]
    agent_ids += [w.party_id for w in scenario.warehouses]
    agent_ids += [m.party_id for m in scenario.manufacturers]
    agent_ids += list(scenario.customers)
    if len(set(agent_ids)) != len(agent_ids):
        raise ValidationError("agents", "a party may hold only one agent role")
    for pid in agent_ids:
        if pid not in registry.parties:
            raise ValidationError("agents", f"agent {pid!r} is not a declared party")

    manufacturer_ids = {m.party_id for m in scenario.manufacturers}
    for spec in scenario.warehouses:
        if spec.manufacturer not in manufacturer_ids:
            raise ValidationError(
                f"warehouse {spec.party_id}",
                f"manufacturer {spec.manufacturer!r} is not a declared manufacturer",
            )
        if not registry.has_supplier_link(spec.manufacturer, spec.party_id):
            raise ValidationError(
                f"warehouse {spec.party_id}",
                f"no supplier_to relationship from {spec.manufacturer}",
            )

    ledger_owners = {scenario.retailer} | {w.party_id for w in scenario.warehouses}
    for owner in scenario.initial_inventory:
        if owner not in ledger_owners:
            raise ValidationError(
                "inventory", f"{owner!r} is not the retailer or a warehouse"
            )

    # A person may carry the seller role only when acting as a selling agent.
    selling_agents = {scenario.retailer}
    selling_agents |= {w.party_id for w in scenario.warehouses}
    selling_agents |= manufacturer_ids
    for party in registry.parties.values():
        if (
            party.kind is PartyKind.PERSON
            and PartyRole.SELLER in party.roles
            and party.id not in selling_agents
        ):
            raise ValidationError(
                f"party {party.id}", "a person may hold the seller role only as a selling agent"
            )


def loads_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    return parse_scenario(data)


def load_scenario(path: str | Path) -> Scenario:
    return loads_scenario(Path(path).read_text(encoding="utf-8"))
