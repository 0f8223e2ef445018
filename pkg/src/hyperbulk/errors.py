"""Exception types shared across the package and mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid parameters or configuration input (CLI exit code 2)."""


class ResourceLimitError(RuntimeError):
    """A computation exceeded a configured size cap (CLI exit code 3)."""


class NumericalContractError(RuntimeError):
    """A numerical or algebraic guarantee failed to hold (CLI exit code 4)."""
