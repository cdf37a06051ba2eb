"""
Exception hierarchy for operformal.

Three failure families are distinguished because the CLI maps them onto
different exit codes:

    ContractViolation   an operation was called with arguments outside its
                        precondition (shape mismatch, bad range).
    InputError          user-supplied data is malformed or violates an
                        algebraic axiom; carries a JSON-path style location.
    InvariantViolation  an internal mathematical identity failed. This is
                        always a bug, never a property of valid input.
"""

from typing import Optional


class OperformalError(Exception):
    """Base class of every error raised by the engine."""


class ContractViolation(OperformalError, ValueError):
    """Raised when an operation precondition does not hold."""


class InputError(OperformalError, ValueError):
    """Raised when input data is invalid.

    Attributes:
        location (Optional[str]): Path of the offending field, e.g.
            ``operations[2].inputs``.
    """

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class MaurerCartanError(InputError):
    """Raised when a parsed structure fails [Q, Q] = 0 below the cutoff.

    Attributes:
        weight (int): Smallest weight at which [Q, Q] is nonzero.
        relation_dump (str): Human-readable listing of the residual.
    """

    def __init__(self, weight: int, relation_dump: str):
        self.weight = weight
        self.relation_dump = relation_dump
        super().__init__(
            f"Maurer-Cartan equation fails at weight {weight}:\n{relation_dump}",
            location="operations",
        )


class InvariantViolation(OperformalError, RuntimeError):
    """Raised when an identity that must hold for every valid input fails."""
