"""Shared exception types."""


class DomainError(ValueError):
    """An argument lies outside an operation's domain."""


class AmbiguityError(DomainError):
    """Nearest-integer request for an exact half-integer."""


class InvariantViolationError(AssertionError):
    """A structural invariant that the construction guarantees was violated.

    Raised instead of silently returning, because a violation would mean the
    sieve construction itself is wrong, not merely the input.
    """


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class SingularFactorError(DomainError):
    """An Euler factor is evaluated at (or too close to) its zero or pole."""


class EnumerationCapError(RuntimeError):
    """A divisor enumeration exceeded its configured node budget."""
