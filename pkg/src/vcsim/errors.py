"""Exception hierarchy for the value chain simulator."""


class VcsimError(Exception):
    """Base class for every error raised by this package."""


# --- party registry ---------------------------------------------------------

class RegistryError(VcsimError):
    pass


class EmptyNameError(RegistryError):
    pass


class UnknownLocationError(RegistryError):
    pass


class UnknownPartyError(RegistryError):
    pass


class DuplicateIdError(RegistryError):
    pass


class SelfRelationshipError(RegistryError):
    pass


class UnknownRelationshipError(RegistryError):
    pass


class UnsupportedPairError(RegistryError):
    """Relationship between two persons; only org-org and org-person are classified."""


class NegativeValueError(RegistryError):
    pass


class PartyInUseError(RegistryError):
    """Removal refused because relationships still reference the party."""


class DuplicateCustomerCodeError(RegistryError):
    pass


# --- inventory --------------------------------------------------------------

class InventoryError(VcsimError):
    pass


class NonPositiveQuantityError(VcsimError):
    """Shared by inventory and procurement: quantities must be >= 1."""


class InsufficientStockError(InventoryError):
    """Reservation exceeds what is on hand minus what is already reserved."""


class NotReservedError(InventoryError):
    pass


# --- procurement ------------------------------------------------------------

class ProcurementError(VcsimError):
    pass


class EmptyPlanError(ProcurementError):
    pass


class DuplicateSkuError(ProcurementError):
    pass


class UnknownPlanError(ProcurementError):
    pass


class WrongStateError(ProcurementError):
    """Operation not valid for the document's current workflow state."""


class NotASupplierError(ProcurementError):
    pass


class UnknownSkuError(ProcurementError):
    pass


class OverDeliveryError(ProcurementError):
    pass


class InspectionFailedError(ProcurementError):
    pass


class DuplicateWarrantError(ProcurementError):
    pass


class UnknownWarrantError(ProcurementError):
    pass


class UnknownReceiptError(ProcurementError):
    pass


# --- agent protocol ---------------------------------------------------------

class ProtocolError(VcsimError):
    pass


class UnknownOrderError(ProtocolError):
    pass


class DuplicateResponseError(ProtocolError):
    pass


class UnknownRequestError(ProtocolError):
    pass


class UnknownPoError(ProtocolError):
    pass


# --- simulation engine ------------------------------------------------------

class EngineError(VcsimError):
    pass


class SchedulesInPastError(EngineError):
    pass


class UnknownRecipientError(EngineError):
    """Envelope addressed to no registered agent; the run halts."""


class EventBudgetExceededError(EngineError):
    """More events delivered than the scenario allows; signals a livelock."""


class InvariantViolationError(EngineError):
    """A post-run consistency check (conservation, quiescence) failed."""


# --- scenario loading and metrics -------------------------------------------

class ScenarioError(VcsimError):
    pass


class ParseError(ScenarioError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ValidationError(ScenarioError):
    def __init__(self, entity: str, reason: str):
        super().__init__(f"{entity}: {reason}")
        self.entity = entity
        self.reason = reason


class TruncatedLogError(VcsimError):
    """Log does not end with an END line; metrics need a completed run."""
