"""Exception types shared across the package."""


class ConfigError(Exception):
    """Raised for unparseable or out-of-range run configurations."""


class DecompositionError(Exception):
    """Raised when a subdomain decomposition is structurally invalid."""


class CoverageError(DecompositionError):
    """Raised when interacting element pairs are not covered by any subdomain."""


class SolverError(Exception):
    """Raised when a linear solve fails or misses its residual tolerance."""
