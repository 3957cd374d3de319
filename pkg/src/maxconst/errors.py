"""Exception types shared across the package."""


class MaxconstError(Exception):
    """Base class for all package errors."""


class InvalidArgument(MaxconstError, ValueError):
    """An argument violates a documented precondition."""


class CommensurabilityError(InvalidArgument):
    """A length is not an integer multiple of the grid spacing."""


class TopologyError(InvalidArgument):
    """A union of boxes is not face-connected."""


class OverlapError(InvalidArgument):
    """Boxes of a union overlap in volume, not just on shared faces."""


class ResolutionTooCoarse(MaxconstError):
    """The grid has no interior degrees of freedom for a required operator."""


class ExactnessViolation(MaxconstError):
    """An integer identity of the discrete complex failed (implementation bug)."""


class ConvergenceFailure(MaxconstError):
    """An iterative solver failed to reach its tolerance.

    Carries a ``diagnostics`` dict (iteration counts, residuals) for reports.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
