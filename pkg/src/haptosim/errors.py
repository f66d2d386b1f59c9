"""Exception types raised across the package."""


class HaptosimError(Exception):
    """Base class for all package errors."""


class InvalidState(HaptosimError, ValueError):
    pass


class GridMismatch(HaptosimError, ValueError):
    pass


class ConfigError(HaptosimError, ValueError):
    pass


class LinearSolveFailure(HaptosimError, RuntimeError):
    pass


class InvalidInitialData(HaptosimError, ValueError):
    pass


class DegenerateDelta(HaptosimError, ValueError):
    """H(y) = y has infimum 0 on y > 0 which is never attained."""


class InfeasibleParameters(HaptosimError, ValueError):
    pass
