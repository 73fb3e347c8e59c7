"""Exception hierarchy shared across the package."""


class BanditLabError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BanditLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class FamilyMismatchError(BanditLabError, ValueError):
    """Two belief states of different reward families were combined."""


class UndefinedMeanError(BanditLabError, ValueError):
    """Posterior-predictive mean does not exist for these parameters."""


class NoSolutionError(BanditLabError, ValueError):
    """Target point lies outside the realizable set of a parameter map."""


class ConvergenceError(BanditLabError, RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class DivergentNormalizerError(BanditLabError, ValueError):
    """Focal normalizer integral diverges for the requested exposure."""


class ValidationError(BanditLabError, ValueError):
    """Configuration failed validation; carries every violation found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
