"""Exception types shared across the package."""


class AvorError(Exception):
    """Base class for all package errors."""


class ScenarioParseError(AvorError):
    """Scenario file violates the schema (names the offending field)."""


class ScenarioFormatError(AvorError):
    """Scenario file is structurally valid but numerically inconsistent."""


class ScenarioReferenceError(AvorError):
    """Scenario references an actor that does not exist."""


class SegmentationError(AvorError):
    """No cut-in maneuver could be segmented from the trace."""


class GridMismatchError(AvorError):
    """Two grid fields do not share the same grid specification."""


class DegenerateTraceError(AvorError):
    """A constant trace cannot be min-max normalized."""
