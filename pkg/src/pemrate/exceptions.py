"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the range where a formula is defined."""


class ResourceError(RuntimeError):
    """A requested construction would exceed a configured size cap."""


class EstimationError(RuntimeError):
    """Every optimizer start failed, or too many Monte Carlo cells failed.

    ``diagnostics`` carries whatever per-start or per-cell information was
    collected before giving up.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""
