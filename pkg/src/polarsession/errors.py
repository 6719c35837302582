"""Exception hierarchy shared by every module."""

from __future__ import annotations


class PolarSessionError(Exception):
    """Base class for all errors raised by the library."""


class ParseError(PolarSessionError):
    """Syntax error in one of the text formats, with a source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(PolarSessionError):
    """A structurally well-formed value breaks one of its invariants."""


class TypeMismatchError(ValidationError):
    """Two boundaries or ports disagree on a type."""


class LinearityError(ValidationError):
    """A variable is unbound, reused, or left unused."""


class CycleError(ValidationError):
    """A graph that must be acyclic contains a cycle; `witness` lists it."""

    def __init__(self, message: str, witness: list | None = None):
        self.witness = list(witness or [])
        super().__init__(message)


class SizeGuardError(PolarSessionError):
    """A computation would exceed a configured size limit."""
