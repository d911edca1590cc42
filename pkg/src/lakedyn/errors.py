"""Exception types shared across the toolkit.

The CLI maps these onto process exit codes: missing inputs exit 2,
configuration violations exit 3, numerical aborts exit 4.
"""


class LakedynError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(LakedynError):
    """Array extents do not satisfy an operation's shape contract."""


class ContractError(LakedynError):
    """An operation was called outside its documented precondition."""


class ConfigError(LakedynError):
    """Invalid configuration value or unknown configuration key."""


class AlignmentError(LakedynError):
    """Rasters that must share one grid have different geotransforms."""


class InputError(LakedynError):
    """Malformed input data (unclosed ring, bad file magic, ...)."""


class MissingInputError(LakedynError):
    """A required input file or checkpoint does not exist."""


class NumericalError(LakedynError):
    """Training produced a non-finite loss; carries epoch/batch context."""

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
