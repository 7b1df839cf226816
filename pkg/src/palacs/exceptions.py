"""Exception types shared across the package."""


class ConfigError(ValueError):
    """An experiment configuration is missing, malformed, or inconsistent."""


class DatasetError(ValueError):
    """A dataset cannot be generated, loaded, or split as requested."""


class InternalConsistencyError(RuntimeError):
    """A computation produced a value that violates a guaranteed invariant."""
