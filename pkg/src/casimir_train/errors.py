"""Exception hierarchy shared by all modules."""


class CasimirError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(CasimirError, ValueError):
    """Invalid user input; ``key`` names the offending parameter."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericalFailure(CasimirError):
    """A computation could not be carried out to the requested accuracy."""


class DegenerateBarrier(NumericalFailure):
    pass


class NumericalBreakdown(NumericalFailure):
    pass


class UnitarityViolation(NumericalFailure):
    pass


class IntegrationFailure(NumericalFailure):
    pass


class IdentityViolation(NumericalFailure):
    pass


class EmptyTrain(CasimirError, ValueError):
    pass


class NoCrossing(CasimirError):
    """The ensemble mean never enters the requested photon band."""
