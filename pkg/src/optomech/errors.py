"""Exception hierarchy shared by all modules."""


class OptomechError(Exception):
    """Base class for domain errors."""


class ParameterError(OptomechError, ValueError):
    pass


class NonPhysicalCovariance(OptomechError, ValueError):
    """Covariance matrix violates V + (i/2) Omega >= 0."""


class UnstableSystem(OptomechError):
    """Drift matrix has an eigenvalue with real part >= -eps_stab."""

    def __init__(self, message, max_real_part=None):
        super().__init__(message)
        self.max_real_part = max_real_part


class NonOrthonormalFilters(OptomechError, ValueError):
    pass


class InvalidDetuning(OptomechError, ValueError):
    pass


class InvalidSqueezing(OptomechError, ValueError):
    """|M|^2 > N(N+1) for a squeezed-input spectrum."""


class CutoffOverflow(OptomechError):
    """Population in the top Fock level exceeded the configured threshold."""

    def __init__(self, message, population=None, time=None):
        super().__init__(message)
        self.population = population
        self.time = time


class ConfigError(OptomechError, ValueError):
    """Malformed run configuration (CLI exit code 2)."""
