"""Exception types raised across the package."""


class PairThermoError(Exception):
    """Base class for all package errors."""


class DomainError(PairThermoError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(PairThermoError, ValueError):
    """An object fails one of its structural invariants."""


class ConfigError(PairThermoError, ValueError):
    """A configuration is inconsistent or numerically unsafe."""


class UsageError(PairThermoError, ValueError):
    """An operation was called with the wrong kind of input (e.g. setup tag)."""
