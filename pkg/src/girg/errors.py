"""Exception hierarchy shared by the library and the CLI.

Each class maps to a distinct process exit code in :mod:`girg.cli`.
"""


class GirgError(Exception):
    exit_code = 1


class UsageError(GirgError, ValueError):
    """Invalid arguments or violated preconditions."""

    exit_code = 2


class CorruptionError(GirgError):
    """A stored bit stream or file does not decode."""

    exit_code = 3


class ModelConfigurationError(GirgError):
    """The model constants do not satisfy the sampler's assumptions.

    Raised when an observed edge probability exceeds the upper bound used
    for skip sampling, i.e. the configured ``c_upper`` is too small.
    """

    exit_code = 4


class InsufficientDataError(GirgError, ValueError):
    exit_code = 5
