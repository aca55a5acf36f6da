"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "SkillgateError",
    "ContractViolation",
    "OracleSizeError",
    "ImpossibleEventError",
    "InconsistentEvidenceError",
    "ParseError",
    "UnknownStudentError",
]


class SkillgateError(Exception):
    """Base class for all package errors."""


class ContractViolation(SkillgateError):
    """An operation was called with arguments violating its contract."""


class OracleSizeError(SkillgateError):
    """An exponential-cost oracle path was asked to exceed its size cap."""

    def __init__(self, message: str, size: int, cap: int):
        super().__init__(message)
        self.size = size
        self.cap = cap


class ImpossibleEventError(SkillgateError):
    """A closed-form update conditioned on an event of probability zero."""


class InconsistentEvidenceError(SkillgateError):
    """The observed evidence set has probability zero under the model.

    ``gate_ids`` holds a minimal subset of the evidence that is already
    impossible on its own, found greedily by dropping gates one at a time.
    """

    def __init__(self, message: str, gate_ids: tuple[str, ...]):
        super().__init__(message)
        self.gate_ids = gate_ids


class ParseError(SkillgateError):
    """A document could not be parsed into a model, answer log, or result."""

    def __init__(self, message: str, code: str = "MALFORMED"):
        super().__init__(message)
        self.code = code


class UnknownStudentError(SkillgateError):
    """An answer log lookup referenced a student id that is not present."""
