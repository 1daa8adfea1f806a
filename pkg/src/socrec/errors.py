"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericalError -> 3. Everything else is a programming-contract violation.
"""


class SocrecError(Exception):
    """Base class for all package errors."""


class GraphError(SocrecError, ValueError):
    """Malformed graph input: bad indices, asymmetry, duplicate interactions."""


class ShapeError(SocrecError, ValueError):
    """Operand dimensions do not agree."""


class ContractError(SocrecError, ValueError):
    """An operation was called outside its stated precondition."""


class SamplerError(SocrecError, ValueError):
    """A negative sampler has an empty candidate set."""


class ConfigError(SocrecError, ValueError):
    """Invalid configuration value or combination."""


class DataError(SocrecError, ValueError):
    """Malformed or unusable input data file."""


class NumericalError(SocrecError, ArithmeticError):
    """Non-finite values where finite ones are required (diverged training etc.)."""
