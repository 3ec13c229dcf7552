"""Exception hierarchy.

Everything raised on purpose derives from :class:`WiretapError`, which the
CLI maps to exit code 2. Bad user input additionally subclasses
``ValueError`` so callers that only know the builtins still catch it.
"""


class WiretapError(Exception):
    """Base class for domain errors."""


class ValidationError(WiretapError, ValueError):
    """A probability object or configuration failed validation."""


class InputError(WiretapError, ValueError):
    """An argument is out of range or has the wrong shape."""


class NoSecrecyError(WiretapError):
    """The channel has zero secrecy capacity."""


class RateError(WiretapError, ValueError):
    """A requested rate exceeds what the channel or alphabet supports."""


class EnumerationCapError(WiretapError):
    """Exact enumeration would exceed the configured state budget."""

    def __init__(self, message: str, states: int, cap: int):
        super().__init__(message)
        self.states = states
        self.cap = cap


class ProtocolError(WiretapError):
    """The key-chaining state machine was driven inconsistently."""
