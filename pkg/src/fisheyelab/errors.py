"""Exception types shared across the package.

ValidationError covers bad user input (shapes, configs, malformed data);
the CLI maps it to exit code 2. Everything else is a runtime failure.
"""


class ValidationError(ValueError):
    pass


class DimensionError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class DataError(ValidationError):
    pass


class StateError(RuntimeError):
    pass
