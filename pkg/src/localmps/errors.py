"""Exception hierarchy shared by all modules."""


class LocalMpsError(Exception):
    """Base class for errors raised by :mod:`localmps`."""


class ShapeError(LocalMpsError, ValueError):
    """Array or chain shapes are inconsistent."""


class NumericError(LocalMpsError, ValueError):
    """Input contains non-finite entries."""


class DomainError(LocalMpsError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(LocalMpsError, MemoryError):
    """A dense object would exceed the configured size cap."""


class StateError(LocalMpsError, ValueError):
    """The state is not in the form the operation requires."""


class InternalError(LocalMpsError, RuntimeError):
    """An internal consistency check failed."""
