"""Exception hierarchy shared by all modules."""


class InhomApproxError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(InhomApproxError, ValueError):
    """An input violates a documented invariant or precondition."""


class DimensionMismatch(ValidationError):
    pass


class NotDifferentiable(InhomApproxError):
    pass


class EmptyZeroSet(InhomApproxError):
    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason  # "no_sign_change" or "budget"


class UnsupportedPsiClass(ValidationError):
    pass


class InvalidDegrees(ValidationError):
    pass


class ThresholdViolation(ValidationError):
    pass


class SingularMatrix(ValidationError):
    pass


class UncertifiedPair(ValidationError):
    pass


class CriterionMismatch(ValidationError):
    pass


class BudgetExceeded(InhomApproxError):
    pass
