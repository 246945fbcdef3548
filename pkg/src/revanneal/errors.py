"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A model or experiment configuration violates its contract."""


class NumericalFailure(RuntimeError):
    """A numerical routine could not meet its accuracy contract."""
