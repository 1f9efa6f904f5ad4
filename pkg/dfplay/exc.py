"""Module providing dfplay Exceptions."""

from typing import Any, Optional


class DfpError(Exception):
    """Generic Error. Catches all custom Exceptions of the Package."""


class ShapeError(DfpError, ValueError):
    """Dimensions of a game, profile, belief array or weight matrix disagree."""


class GuardError(DfpError):
    """A dense enumeration or solve would exceed its size guard.

    Should always be given three arguments:
        - Name of the operation
        - Size that was requested
        - Largest size the operation accepts
    """

    @property
    def operation(self) -> str:
        return self.args[0]

    @property
    def size(self) -> int:
        return self.args[1]

    @property
    def limit(self) -> int:
        return self.args[2]

    def __str__(self):
        return f"{self.operation}: size {self.size} exceeds guard {self.limit}"


class ConfigError(DfpError):
    """Invalid experiment configuration.

    Given the dotted path of the offending key and the reason.
    """

    @property
    def key(self) -> str:
        return self.args[0]

    @property
    def reason(self) -> str:
        return self.args[1]

    def __str__(self):
        return f"{self.key}: {self.reason}"


class AssumptionError(DfpError):
    """A checked assumption failed while strict mode was on.

    Should always be given three arguments:
        - Name of the check
        - Message attached to the failure
        - Data the check produced
    """

    @classmethod
    def from_check(cls, check) -> Optional["AssumptionError"]:
        if check.ok:
            return None
        return cls(check.name, check.message, check.data)

    @property
    def check(self) -> str:
        return self.args[0]

    @property
    def message(self) -> str:
        return self.args[1]

    @property
    def data(self) -> Any:
        return self.args[2]

    def __str__(self):
        return f"{self.check}: {self.message}"
