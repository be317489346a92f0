"""Exception types shared across the library.

Argument misuse raises plain ValueError; the classes below exist so the CLI
can map failures onto distinct exit codes.
"""


class CapacityError(Exception):
    """A size parameter exceeds the supported desk-scale range."""


class ConfigError(Exception):
    """An experiment config file is malformed or out of range."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantError(Exception):
    """An internal consistency check failed (indicates a library bug)."""
