"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SupportError(DomainError):
    """A data point violates the support of a model coordinate."""

    def __init__(self, message, coordinate=None, row=None):
        super().__init__(message)
        self.coordinate = coordinate
        self.row = row


class MarginalityError(ValueError):
    """A diagnostic subset is not closed under its conditioning parents."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class BracketError(ArithmeticError):
    """A root-finding bracket does not enclose a sign change."""


class RankError(ValueError):
    """A linear system or orthonormalization is rank deficient."""


class MissingCovarianceError(RuntimeError):
    """An operation needs the sample covariance but the fit did not keep one."""
