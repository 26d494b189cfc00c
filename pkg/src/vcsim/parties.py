"""Trading-community registry: parties, locations, typed relationships.

Parties are persons or organizations. Directed relationships carry one of
eight labels, each with a fixed inverse, so a single stored record answers
queries from either endpoint's perspective. Customer-flavored relationships
accumulate interaction buckets that describe buying behavior over time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    DuplicateCustomerCodeError,
    DuplicateIdError,
    EmptyNameError,
    NegativeValueError,
    PartyInUseError,
    RegistryError,
    SelfRelationshipError,
    UnknownLocationError,
    UnknownPartyError,
    UnknownRelationshipError,
    UnsupportedPairError,
)

PartyId = str
SimTime = int

DEFAULT_BUCKET_WIDTH = 10


class PartyKind(Enum):
    PERSON = "person"
    ORGANIZATION = "organization"


class PartyRole(Enum):
    SELLER = "seller"
    BUYER = "buyer"
    PARTNER = "partner"
    CONTRACTOR = "contractor"
    DISTRIBUTOR = "distributor"
    DEALER = "dealer"
    AGENT = "agent"
    INFLUENCER = "influencer"


class Channel(Enum):
    PHONE = "phone"
    EMAIL = "email"
    POSTAL = "postal"
    WEB = "web"


class RelationshipType(Enum):
    SUPPLIER_TO = "supplier_to"
    DISTRIBUTOR_FOR = "distributor_for"
    CLIENT_OF = "client_of"
    CONTRACTOR_TO = "contractor_to"
    REPORT_TO = "report_to"
    MANAGER_OF = "manager_of"
    CUSTOMER_OF = "customer_of"
    SELLER_TO = "seller_to"


_INVERSES = {
    RelationshipType.SUPPLIER_TO: RelationshipType.DISTRIBUTOR_FOR,
    RelationshipType.DISTRIBUTOR_FOR: RelationshipType.SUPPLIER_TO,
    RelationshipType.CLIENT_OF: RelationshipType.CONTRACTOR_TO,
    RelationshipType.CONTRACTOR_TO: RelationshipType.CLIENT_OF,
    RelationshipType.REPORT_TO: RelationshipType.MANAGER_OF,
    RelationshipType.MANAGER_OF: RelationshipType.REPORT_TO,
    RelationshipType.CUSTOMER_OF: RelationshipType.SELLER_TO,
    RelationshipType.SELLER_TO: RelationshipType.CUSTOMER_OF,
}

# Labels that mark the from-party as a customer of the to-party (or vice versa).
_CUSTOMER_FLAVORED = {RelationshipType.CUSTOMER_OF, RelationshipType.SELLER_TO}


def inverse_of(rel_type: RelationshipType) -> RelationshipType:
    """Return the paired label; total involution over all eight labels."""
    return _INVERSES[rel_type]


class Classification(Enum):
    B2B = "B2B"
    B2C = "B2C"


@dataclass(frozen=True)
class Location:
    id: str
    label: str
    address: str


@dataclass(frozen=True)
class CommunicationPoint:
    channel: Channel
    address: str
    purpose: str | None = None

    def __post_init__(self):
        if not self.address:
            raise ValueError("communication point address must be nonempty")


@dataclass
class Party:
    id: PartyId
    kind: PartyKind
    name: str
    locations: list[str] = field(default_factory=list)
    communication_points: list[CommunicationPoint] = field(default_factory=list)
    roles: set[PartyRole] = field(default_factory=set)


@dataclass
class CompanyRelationship:
    id: str
    from_party: PartyId
    to_party: PartyId
    rel_type: RelationshipType
    start: SimTime
    end: SimTime | None = None

    def active_at(self, at: SimTime) -> bool:
        # Half-open interval: end tick itself is outside the relationship.
        return self.start <= at and (self.end is None or at < self.end)


@dataclass(frozen=True)
class CustomerInfo:
    relationship: str
    customer_code: str


@dataclass(frozen=True)
class PatternBucket:
    period_start: SimTime
    order_count: int
    total_value: int


class CustomerPattern:
    """Interaction counts and value, bucketed by fixed-width time periods."""

    def __init__(self, relationship: str, bucket_width: int):
        self.relationship = relationship
        self.bucket_width = bucket_width
        self._buckets: dict[SimTime, list[int]] = {}  # start -> [count, value]

    def record(self, at: SimTime, value: int) -> None:
        start = (at // self.bucket_width) * self.bucket_width
        bucket = self._buckets.setdefault(start, [0, 0])
        bucket[0] += 1
        bucket[1] += value

    @property
    def buckets(self) -> list[PatternBucket]:
        return [
            PatternBucket(start, count, value)
            for start, (count, value) in sorted(self._buckets.items())
        ]


class Registry:
    """Single-writer store for parties, locations, and relationships.

    Every id referenced anywhere must resolve; operations that would break
    referential integrity are rejected.
    """

    def __init__(self, bucket_width: int = DEFAULT_BUCKET_WIDTH):
        self.parties: dict[PartyId, Party] = {}
        self.locations: dict[str, Location] = {}
        self.relationships: dict[str, CompanyRelationship] = {}
        self.customer_infos: dict[str, CustomerInfo] = {}
        self.patterns: dict[str, CustomerPattern] = {}
        self.bucket_width = bucket_width
        self._next_party = 1
        self._next_location = 1
        self._next_relationship = 1

    # -- locations ------------------------------------------------------

    def register_location(self, label: str, address: str = "", location_id: str | None = None) -> str:
        loc_id = location_id if location_id is not None else f"L{self._next_location}"
        self._next_location += 1
        if loc_id in self.locations:
            raise DuplicateIdError(f"location id {loc_id!r} already registered")
        self.locations[loc_id] = Location(loc_id, label, address)
        return loc_id

    # -- parties ----------------------------------------------------------

    def register_party(
        self,
        kind: PartyKind,
        name: str,
        locations: list[str] | tuple[str, ...] = (),
        roles: set[PartyRole] | frozenset[PartyRole] = frozenset(),
        communication_points: list[CommunicationPoint] | tuple[CommunicationPoint, ...] = (),
        party_id: PartyId | None = None,
    ) -> PartyId:
        if not name:
            raise EmptyNameError("party name must be nonempty")
        for loc in locations:
            if loc not in self.locations:
                raise UnknownLocationError(f"location {loc!r} is not registered")
        pid = party_id if party_id is not None else f"P{self._next_party}"
        self._next_party += 1
        if pid in self.parties:
            raise DuplicateIdError(f"party id {pid!r} already registered")
        self.parties[pid] = Party(
            id=pid,
            kind=kind,
            name=name,
            locations=list(locations),
            communication_points=list(communication_points),
            roles=set(roles),
        )
        return pid

    def party(self, party_id: PartyId) -> Party:
        try:
            return self.parties[party_id]
        except KeyError:
            raise UnknownPartyError(f"party {party_id!r} is not registered") from None

    def remove_party(self, party_id: PartyId) -> None:
        self.party(party_id)
        for rel in self.relationships.values():
            if party_id in (rel.from_party, rel.to_party):
                raise PartyInUseError(
                    f"party {party_id!r} is referenced by relationship {rel.id}"
                )
        del self.parties[party_id]

    # -- relationships ----------------------------------------------------

    def link_relationship(
        self,
        from_party: PartyId,
        to_party: PartyId,
        rel_type: RelationshipType,
        start: SimTime,
        end: SimTime | None = None,
    ) -> str:
        if from_party == to_party:
            raise SelfRelationshipError("a party cannot be its own counterparty")
        self.party(from_party)
        self.party(to_party)
        if end is not None and end < start:
            raise RegistryError("relationship end precedes its start")
        rel_id = f"R{self._next_relationship}"
        self._next_relationship += 1
        self.relationships[rel_id] = CompanyRelationship(
            rel_id, from_party, to_party, rel_type, start, end
        )
        return rel_id

    def relationship(self, rel_id: str) -> CompanyRelationship:
        try:
            return self.relationships[rel_id]
        except KeyError:
            raise UnknownRelationshipError(f"relationship {rel_id!r} not found") from None

    def query_relationship(self, frm: PartyId, to: PartyId) -> list[tuple[str, RelationshipType]]:
        """All relationships between two parties, labeled from `frm`'s perspective.

        A single stored record answers both directions: the reverse view is
        computed with inverse_of rather than stored twice.
        """
        self.party(frm)
        self.party(to)
        found = []
        for rel in self.relationships.values():
            if rel.from_party == frm and rel.to_party == to:
                found.append((rel.id, rel.rel_type))
            elif rel.from_party == to and rel.to_party == frm:
                found.append((rel.id, inverse_of(rel.rel_type)))
        return found

    def classify(self, rel_id: str) -> Classification:
        rel = self.relationship(rel_id)
        kinds = {self.party(rel.from_party).kind, self.party(rel.to_party).kind}
        if kinds == {PartyKind.ORGANIZATION}:
            return Classification.B2B
        if kinds == {PartyKind.PERSON}:
            raise UnsupportedPairError("person-person relationships are not classified")
        return Classification.B2C

    def has_supplier_link(self, supplier: PartyId, buyer: PartyId, at: SimTime | None = None) -> bool:
        """True when an active SUPPLIER_TO relationship runs supplier -> buyer."""
        for rel_id, rel_type in self.query_relationship(supplier, buyer):
            if rel_type is not RelationshipType.SUPPLIER_TO:
                continue
            if at is None or self.relationship(rel_id).active_at(at):
                return True
        return False

    def customers_of(self, seller: PartyId, at: SimTime) -> set[PartyId]:
        """Parties holding an active customer relationship toward the seller."""
        self.party(seller)
        customers: set[PartyId] = set()
        for rel in self.relationships.values():
            if not rel.active_at(at):
                continue
            if rel.to_party == seller and rel.rel_type is RelationshipType.CUSTOMER_OF:
                customers.add(rel.from_party)
            elif rel.from_party == seller and rel.rel_type is RelationshipType.SELLER_TO:
                customers.add(rel.to_party)
        return customers

    def customer_relationship(self, buyer: PartyId, seller: PartyId) -> str | None:
        """Id of a customer-flavored relationship between buyer and seller, if any."""
        for rel_id, rel_type in self.query_relationship(buyer, seller):
            if rel_type is RelationshipType.CUSTOMER_OF:
                return rel_id
        return None

    # -- customer info and behavior patterns -------------------------------

    def set_customer_info(self, rel_id: str, customer_code: str) -> CustomerInfo:
        rel = self.relationship(rel_id)
        if rel.rel_type not in _CUSTOMER_FLAVORED:
            raise RegistryError(
                f"relationship {rel_id} is {rel.rel_type.value}, not customer-flavored"
            )
        seller = rel.to_party if rel.rel_type is RelationshipType.CUSTOMER_OF else rel.from_party
        for other_id, info in self.customer_infos.items():
            other = self.relationship(other_id)
            other_seller = (
                other.to_party
                if other.rel_type is RelationshipType.CUSTOMER_OF
                else other.from_party
            )
            if other_seller == seller and info.customer_code == customer_code:
                raise DuplicateCustomerCodeError(
                    f"code {customer_code!r} already used for seller {seller}"
                )
        info = CustomerInfo(rel_id, customer_code)
        self.customer_infos[rel_id] = info
        return info

    def record_interaction(self, rel_id: str, at: SimTime, value: int) -> CustomerPattern:
        self.relationship(rel_id)
        if value < 0:
            raise NegativeValueError("interaction value must be >= 0")
        pattern = self.patterns.get(rel_id)
        if pattern is None:
            pattern = CustomerPattern(rel_id, self.bucket_width)
            self.patterns[rel_id] = pattern
        pattern.record(at, value)
        return pattern
