"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """Requested system size exceeds the configured memory cap."""


class ConfigError(ValueError):
    """Invalid run configuration; carries the offending field name."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class EigensolverError(RuntimeError):
    """Eigensolver failed to converge; carries the realization seed."""

    def __init__(self, message, seed=None):
        self.seed = seed
        super().__init__(f"{message} (realization seed={seed})")


class FitError(RuntimeError):
    """Curve fit failed; carries the last parameter iterate when known."""

    def __init__(self, message, last_params=None):
        self.last_params = last_params
        super().__init__(message)
