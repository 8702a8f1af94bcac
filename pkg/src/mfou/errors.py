"""Exception hierarchy shared across the package."""


class MfouError(Exception):
    """Base class for all package errors."""


class DimensionError(MfouError):
    """Parameter or data arrays have inconsistent shapes."""


class UnsupportedParameterError(MfouError):
    """Parameter combination outside the supported domain (e.g. H_i + H_j = 1)."""


class CoherencyError(MfouError):
    """Pairwise cross-dependence parameters do not admit a valid covariance."""


class SimulationError(MfouError):
    """Exact sampling failed (non-PSD embedding spectrum under reject policy, etc.)."""


class DataError(MfouError):
    """Input data unusable for the requested operation (insufficient overlap, bad values)."""


class NumericsError(MfouError):
    """A numerical routine could not reach its accuracy target.

    Carries the achieved error bound in ``achieved``.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class InitializerError(MfouError):
    """The moment-based starting-value procedure failed on the given data."""
