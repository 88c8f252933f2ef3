"""Exception taxonomy shared across the package.

The CLI maps these onto its exit codes: ConfigError -> 2,
OracleUnavailableError -> 3, OracleMismatchError -> 4, anything else -> 1.
"""


class InputError(ValueError):
    """An argument violated an operation's preconditions (shapes, ranges)."""


class ConfigError(ValueError):
    """A run configuration file failed validation; message names the field."""


class OracleUnavailableError(RuntimeError):
    """External oracle could not be reached or reported a failure."""


class ProtocolError(RuntimeError):
    """Wire-protocol counterparty sent a malformed or invariant-violating line."""


class OracleMismatchError(RuntimeError):
    """Oracle metadata is incompatible with the requested run (dims, labels)."""


class NumericalError(RuntimeError):
    """Non-finite value where the training loop requires finite arithmetic."""
