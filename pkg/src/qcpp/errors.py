"""Exception types shared across the package."""


class QcppError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(QcppError, ValueError):
    """An input or a loaded object violates a documented invariant."""


class NonPhysicalStateError(ValidationError):
    """A matrix fails the positive-semidefiniteness tolerance of an operation."""


class ConstraintError(ValidationError):
    """A spin configuration violates the magnetization-one constraint."""


class SizeCapError(QcppError):
    """An exhaustive enumeration would exceed its documented size cap."""


class ScenarioFormatError(QcppError, ValueError):
    """A scenario file is unreadable or structurally malformed."""
