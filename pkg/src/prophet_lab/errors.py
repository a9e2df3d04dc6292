"""Exception types shared across the package.

The CLI maps InvalidParameterError to exit code 2 and ConfigurationError
(plus I/O failures) to exit code 3.
"""


class ProphetLabError(Exception):
    """Base class for package errors."""


class InvalidParameterError(ProphetLabError, ValueError):
    """A numeric or structural argument is outside its documented domain."""


class ConfigurationError(ProphetLabError, RuntimeError):
    """A table, schedule, or file does not satisfy its contract."""
