"""Exception hierarchy shared across the package."""


class SpillnetError(Exception):
    """Base class for all spillnet errors."""


class DataError(SpillnetError):
    """Malformed or internally inconsistent input data."""


class MissingLinksError(DataError):
    """An operation needs link information the dataset does not carry."""


class EstimationError(SpillnetError):
    """A fit cannot be computed on the given sample."""


class RankDeficientError(EstimationError):
    """Regressor matrix has constant or collinear columns."""


class WeakFirstStageError(EstimationError):
    """Instrument-exposure cross moment is numerically zero."""


class InsufficientCompliersError(EstimationError):
    """Too few linked units for a complier-weighted fit."""


class DegenerateArmError(SpillnetError):
    """A contrast statistic has an empty arm."""


class SingularDesignError(SpillnetError):
    """A population design admits no unique estimand."""


class InvalidConfigError(SpillnetError):
    """Invalid simulation or experiment configuration."""
