"""Exception hierarchy shared across the package."""


class DshRplError(Exception):
    """Base class for every error raised by this package."""


class EncodingError(DshRplError):
    """A packet field does not fit its declared wire width."""

    def __init__(self, field, value, detail=""):
        self.field = field
        self.value = value
        msg = f"field {field!r} out of range: {value!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class DecodeError(DshRplError):
    """Raised for any byte sequence that cannot be turned back into a packet."""


class FormatError(DecodeError):
    pass


class IntegrityError(DecodeError):
    pass


class DomainError(DshRplError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConfigurationError(DshRplError, ValueError):
    pass


class InsufficientEvidenceError(DshRplError):
    """A mean was requested over an empty set of observations."""


class RankOverflowError(DshRplError):
    pass


class NotApplicableError(DshRplError):
    pass


class ProbeError(DshRplError):
    pass


class IndeterminateError(DshRplError):
    pass


class QuarantineError(DshRplError):
    pass


class KeyGenerationError(DshRplError):
    pass


class KeyMismatchError(DshRplError):
    pass


class RoutingError(DshRplError):
    pass


class TopologyError(DshRplError):
    pass
