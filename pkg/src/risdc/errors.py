"""Exception types and process exit codes shared across the toolkit."""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


class RisdcError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(RisdcError):
    """Invalid configuration, geometry, or input file schema (exit code 2)."""


class DomainError(RisdcError):
    """Arguments outside an operation's domain, e.g. shape mismatch (exit code 2)."""


class NumericalError(RisdcError):
    """Numerical failure such as SVD non-convergence (exit code 4)."""
