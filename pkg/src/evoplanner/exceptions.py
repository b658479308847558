"""Exception hierarchy shared by every module of the package."""


class EvoPlannerError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(EvoPlannerError, ValueError):
    """A generator or operator received an unusable specification."""


class OutOfDomainError(EvoPlannerError, ValueError):
    """A terrain query fell outside the sampled domain."""


class PlacementError(EvoPlannerError, RuntimeError):
    """Safe start/target or threat placement failed after bounded retries."""


class ScenarioSchemaError(EvoPlannerError, ValueError):
    """A scenario file is malformed; ``field`` names the offending entry."""

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(message or f"invalid scenario field {field!r}")


class ConfigError(EvoPlannerError, ValueError):
    """Invalid run, weight or codebook configuration."""


class EncodingError(EvoPlannerError, ValueError):
    """A planner configuration cannot be packed into a genome."""


class NotEvaluatedError(EvoPlannerError, RuntimeError):
    """An operator needs evaluated members but got unevaluated ones."""


class BudgetError(EvoPlannerError, RuntimeError):
    """A run budget was exhausted before anything could be returned."""

    def __init__(self, message, telemetry=None):
        super().__init__(message)
        self.telemetry = telemetry or []
