"""Exception types shared across the library.

Everything derives from :class:`MinorantError` so callers (and the CLI) can
map "bad input" failures to a single exit path while soundness violations,
which are reported as verdicts rather than exceptions, stay separate.
"""


class MinorantError(Exception):
    """Base class for all library errors."""


class ValidationError(MinorantError, ValueError):
    """A constructed object violates one of its structural invariants."""


class DomainError(MinorantError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class HullError(DomainError):
    """An evaluation point falls outside a tabulated function's grid hull."""


class SupportError(DomainError):
    """A requested evaluation has empty intersection with a psi support."""


class PreconditionError(MinorantError, ValueError):
    """A stated precondition of a bound or estimate does not hold."""
