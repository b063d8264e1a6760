"""Exception hierarchy.

Every error raised for a well-formed request that has no valid answer
derives from :class:`BeliefError`. The command line maps these to exit
code 1; malformed invocations map to exit code 2.
"""

from __future__ import annotations


class BeliefError(Exception):
    """Base class for domain errors."""


class FrameError(BeliefError, ValueError):
    """Invalid frame, label, subset mask or frame mismatch."""


class NormalizationError(BeliefError, ValueError):
    """Masses do not form a valid assignment (sign or total)."""


class IntractableError(BeliefError):
    """The requested representation exceeds the supported size."""


class TotalConflict(BeliefError):
    """Dempster combination of totally conflicting evidence."""


class ZeroPlausibility(BeliefError):
    """Conditioning on an event with (numerically) zero plausibility."""


class PreconditionError(BeliefError, ValueError):
    """An operation was called outside its documented domain."""


class NonConvergence(BeliefError):
    """An iterative solver stopped before meeting its tolerance.

    The best iterate found is attached as ``result``.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class InfeasibleStart(BeliefError):
    """No feasible starting point for a constrained solver."""


class NoAdmissibleSubstitution(BeliefError):
    """No companion cover and selection set exist for a column."""


class NotRealizable(BeliefError):
    """No hypothesis attains zero risk under the given distribution(s)."""


class SchemaError(BeliefError, ValueError):
    """A document does not match its schema.

    Parameters
    ----------
    message : str
        Human readable description.
    field : str, optional
        Dotted path of the offending field.
    line : int, optional
        Line number in the source text, when known.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        full = message if not where else f"{message} ({', '.join(where)})"
        super().__init__(full)
        self.field = field
        self.line = line
