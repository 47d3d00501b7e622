"""Exception types raised across the package."""


class KowtypeError(Exception):
    pass


class DegreeOverflow(KowtypeError, ValueError):
    """A polynomial operation would exceed the dense storage bound."""


class ArityMismatch(KowtypeError, ValueError):
    pass


class NotSeparable(KowtypeError):
    pass


class AllSectionsDegenerate(KowtypeError):
    pass


class EvaluationAtSingularLocus(KowtypeError, ZeroDivisionError):
    pass


class SingularState(KowtypeError):
    """A state is within ``eps_sing`` of a locus where the field blows up."""

    def __init__(self, message, quantity=None, value=None):
        super().__init__(message)
        self.quantity = quantity
        self.value = value


class NoKnownDensity(KowtypeError):
    pass


class NoConsistentState(KowtypeError):
    pass


class StepUnderflow(KowtypeError):
    pass


class DegenerateQuadratic(KowtypeError):
    pass


class BranchTrackingLost(KowtypeError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ProjectionFailed(KowtypeError):
    pass


class ConfigError(KowtypeError, ValueError):
    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location
