"""Exception taxonomy for the finsler package."""


class FinslerError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FinslerError):
    """A point is outside the admissible region (y = 0 or outside the cone)."""


class OrderError(FinslerError):
    """A requested jet order exceeds the configured maximum."""


class ParseError(FinslerError):
    """An expression could not be tokenized or parsed."""


class SchemaError(FinslerError):
    """A metric document or run configuration violates the schema."""


class ValidationError(FinslerError):
    """A structure fails a numeric axiom check (e.g. the Euler relation)."""


class SingularMetricError(FinslerError):
    """The fundamental tensor is not invertible at the evaluation point."""


class ConvexityError(FinslerError):
    """The fundamental tensor has a non-positive eigenvalue at the point."""


class DegenerateTensorError(FinslerError):
    """A recurrence fit was requested for a vanishing tensor."""


class ConeTooThinError(FinslerError):
    """Rejection sampling of admissible directions exceeded the failure budget."""


class UnknownIdError(FinslerError):
    """An unrecognized theorem, predicate, hypothesis, or proposition name."""
