"""Exception hierarchy shared across the package."""


class BroadwellError(Exception):
    """Base class for all package-specific failures."""


class DomainError(BroadwellError):
    """A space-time point lies outside the domain beyond tolerance."""


class DataError(BroadwellError):
    """Boundary/initial data is unusable: sampler failure, NaN, or
    incompatible data."""


class GateError(BroadwellError):
    """The certificate is inadmissible and the run was not forced."""


class ConvergenceError(BroadwellError):
    """Picard iteration hit the iteration cap before reaching tolerance.

    Carries the iteration report in ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericalError(BroadwellError):
    """NaN/Inf divergence detected during iteration."""


class ConfigError(BroadwellError):
    """Malformed run configuration (JSON schema, CFL subdivision cap, ...)."""
