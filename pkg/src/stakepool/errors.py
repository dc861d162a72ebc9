"""Exception hierarchy.

Validation problems (bad parameters, values outside a domain) derive from
``ValidationError``; failures of a numerical procedure or an infeasible design
derive from ``NumericError``.  The CLI maps the two families to exit codes 2
and 3.
"""


class StakePoolError(Exception):
    """Base class for all package errors."""


class ValidationError(StakePoolError, ValueError):
    """Invalid parameters."""


class DomainError(ValidationError):
    """Argument outside the domain of an operation."""


class RegimeError(ValidationError):
    """Parameters belong to a different game regime than the one requested."""


class NumericError(StakePoolError, ArithmeticError):
    """A numerical procedure failed (no bracket, no convergence, ...)."""


class InfeasibleError(NumericError):
    """No admissible solution exists for the requested design."""


class ShapeDiagnosticError(NumericError):
    """A dense-grid check contradicted the assumed shape of a curve."""
