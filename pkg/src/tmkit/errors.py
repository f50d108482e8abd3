"""Exception types raised across the toolchain."""

from __future__ import annotations


class TMError(Exception):
    """Base class for all tmkit errors."""


class UnresolvedReference(TMError, KeyError):
    """A stage or machine reference does not resolve in the model."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class CannotFuse(TMError):
    def __init__(self, machines):
        self.machines = tuple(machines)
        super().__init__(
            "cannot fuse arrive/accept in: " + ", ".join(self.machines)
        )


class PathNotFound(TMError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class CannotFoldRoot(TMError):
    pass


class PathNotFolded(TMError):
    pass


class UnknownCode(TMError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class UnknownEvent(TMError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class ConfigError(TMError):
    pass


class NondeterministicChoice(TMError):
    pass


class BudgetExceeded(TMError):
    pass


class TickOutOfRange(TMError, ValueError):
    pass


class InvalidModel(TMError):
    """The model has error diagnostics and cannot be executed."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        head = self.diagnostics[0].message if self.diagnostics else "invalid model"
        super().__init__(head)


class FoldConflict(TMError):
    """Folding would nest one folded machine inside another."""
