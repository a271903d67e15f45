"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so every error a user can
trigger should be one of these rather than a bare ``ValueError``.
"""


class MoswarmError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(MoswarmError, ValueError):
    exit_code = 2


class UsageError(MoswarmError, ValueError):
    exit_code = 2


class EvaluationError(MoswarmError, ValueError):
    """A fitness value is missing or not finite."""

    exit_code = 2


class NumericError(MoswarmError, ArithmeticError):
    exit_code = 3


class DataIntegrityError(MoswarmError, ValueError):
    exit_code = 3


class CheckpointError(MoswarmError, ValueError):
    exit_code = 3


class CapacityError(MoswarmError, RuntimeError):
    """The arena cannot hold the requested number of robots."""

    exit_code = 4
