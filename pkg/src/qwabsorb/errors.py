"""Exception types shared across the package."""


class QWalkError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QWalkError, ValueError):
    """Invalid parameters: non-unitary coin, arity mismatch, bad ranges."""


class EnumerationBudgetError(QWalkError):
    """Path enumeration would exceed the configured budget."""


class PoleError(QWalkError, ZeroDivisionError):
    """A closed form was evaluated at (or numerically on) one of its poles."""


class DegenerateCoinError(QWalkError, ValueError):
    """Closed form divides by a vanishing coin entry."""


class BranchError(QWalkError):
    """A square-root branch failed the zero-constant-term check."""


class IntegrityError(QWalkError):
    """A quantity that must be real (or bounded) came out otherwise."""
