"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: config errors exit 2, data
errors exit 3, numerical failures exit 4.
"""


class FsvddError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FsvddError):
    """Invalid run configuration (bad schema, unknown keys, bad values)."""


class DataError(FsvddError):
    """Missing, malformed, or incompatible dataset/model files."""


class NumericalError(FsvddError):
    """A numerical procedure failed to produce a usable result."""


class TrainingDiverged(NumericalError):
    """Autoencoder training loss became non-finite."""


class SolverNotConverged(NumericalError):
    """Boundary-weight solver exceeded its iteration budget."""


class DegenerateResiduals(NumericalError):
    """Residual set has (near-)zero variance; no boundary can be estimated."""
