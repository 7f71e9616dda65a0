"""Exception hierarchy shared by every simulator module"""

from typing import Optional


class SkybridgeError(Exception):
    """Base class for all simulator errors"""


class ValidationError(SkybridgeError):
    """A domain invariant or input precondition was violated"""

    def __init__(
        self,
        message: str,
        file: Optional[str] = None,
        section: Optional[str] = None,
        key: Optional[str] = None,
    ):
        self.message = message
        self.file = file
        self.section = section
        self.key = key
        location = ", ".join(
            f"{label}={value}"
            for label, value in (("file", file), ("section", section), ("key", key))
            if value is not None
        )
        super().__init__(f"{message} ({location})" if location else message)


class ConfigError(ValidationError):
    """Scenario or flight-plan file missing, malformed, or carrying unknown keys"""


class ManifestError(ValidationError):
    """Run directory lacks a readable run manifest"""


class OutOfRangeError(ValidationError):
    """Requested time lies outside the flight window"""


class PreconditionError(SkybridgeError):
    """Operation called in a state that does not satisfy its precondition"""


class ConvergenceError(SkybridgeError):
    """Iterative solver failed to converge"""


class UnreachableRouteError(SkybridgeError):
    """No orbital grid cell yields any visibility of the route"""


class DomainError(SkybridgeError):
    """Numeric argument outside the function's domain"""
