"""Exception hierarchy shared across the package.

Every error carries an ``exit_code`` so the command line tool can map
failures onto stable process exit statuses: 2 for configuration
problems, 3 for unreadable or malformed data, 4 for numerical failures.
"""


class SupersetError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(SupersetError):
    """Invalid configuration: unknown names, out-of-range settings."""

    exit_code = 2


class DataError(SupersetError):
    """Input data cannot be read or fails schema validation."""

    exit_code = 3


class NumericalError(SupersetError):
    """A numerical routine cannot produce a trustworthy result."""

    exit_code = 4


class InvalidArgumentError(ConfigError, ValueError):
    """A function was called with arguments outside its contract."""


class InvalidFoldCountError(ConfigError):
    """Requested fold count is not in the valid range 2..n."""


class UnknownColumnError(ConfigError):
    """A named column does not exist in the dataset."""


class ParseError(DataError):
    """A cell or row of the input file could not be parsed."""


class SchemaError(DataError):
    """The input file lacks required columns or has ragged rows."""


class EmptyPartitionError(DataError):
    """A requested row partition left one side without observations."""


class DegenerateColumnError(NumericalError):
    """A covariate column is constant where variation is required."""


class CollinearSubsetError(NumericalError):
    """The selected covariates are collinear to working precision."""


class SaturatedFitError(NumericalError):
    """The regression fit is saturated (zero or near-zero residual scale)."""


class InsufficientObservationsError(NumericalError):
    """Too few observations for the requested model dimension."""


class InsufficientTrainingError(NumericalError):
    """A training fold is too small to estimate the working-prior fit."""


class DegeneratePriorError(NumericalError):
    """The working prior has zero variance and cannot score test groups."""


class InvalidPolynomialError(NumericalError):
    """All polynomial coefficients are zero; roots are undefined."""


class DomainError(NumericalError):
    """A numeric argument lies outside the function's domain."""


class InternalInvariantError(NumericalError):
    """A mathematical guarantee failed to hold numerically."""


class SaturatedFitWarning(UserWarning):
    """A coefficient of determination was clipped just below one."""


class DegenerateFitWarning(UserWarning):
    """A training fit was exact, leaving no residual variance."""
