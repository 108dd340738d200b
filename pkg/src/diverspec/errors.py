"""Exception hierarchy shared across the package.

The command line maps these onto process exit codes: usage/config problems
exit 1, malformed data exits 2, numerical failures exit 3.
"""


class DiverspecError(Exception):
    """Base class for all package-specific errors."""


class UsageError(DiverspecError):
    """Bad command-line arguments or an invalid configuration."""


class ConfigError(UsageError):
    """A configuration file or config object failed validation."""


class DataError(DiverspecError):
    """Input data (graph, dataset directory, checkpoint) is malformed."""


class NumericalError(DiverspecError):
    """A numerical procedure failed (divergence, tolerance violation)."""
