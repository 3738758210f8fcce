"""Exception types raised by bergmod operations."""


class BergmodError(ValueError):
    """Base class for all input/precondition failures."""


class AdmissibilityError(BergmodError):
    """A point is outside the region where a formula is defined."""


class PreconditionError(BergmodError):
    """An operation was called outside its stated domain."""


class NotOnVarietyError(BergmodError):
    """A point does not satisfy the defining equations of a variety."""


class SamplingError(BergmodError):
    """A sample plan could not be realized.

    Attributes
    ----------
    achieved : int
        Number of points the sampler managed to place.
    """

    def __init__(self, message, achieved=0):
        super().__init__(message)
        self.achieved = achieved
