"""Shared exception types."""


class ConfigurationError(ValueError):
    """A parameter value or configuration input is out of its legal domain."""


class TrainingFault(RuntimeError):
    """Training or evaluation produced a non-finite loss, weight, or state."""
