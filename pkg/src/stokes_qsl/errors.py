"""Exception hierarchy shared by all modules."""


class StokesQSLError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StokesQSLError, ValueError):
    """Invalid input parameters."""


class NormalizationError(ValidationError):
    """Coherent-state parameters too far from unit norm to be renormalized."""


class DimensionMismatch(ValidationError):
    """Operator or state lives on a sector of the wrong size."""


class SectorUnderflow(ValidationError):
    """Operation needs at least one photon but the sector has N = 0."""


class UndefinedRatio(ValidationError):
    """Speedup ratio requested where both speed limits vanish."""


class IntegrationFailure(StokesQSLError, RuntimeError):
    """Adaptive integrator could not complete the requested horizon."""
