"""Exception types shared across the package.

The CLI maps :class:`InvalidInputError` to exit code 2 and
:class:`CapacityError` to exit code 3.
"""


class InvalidInputError(ValueError):
    """Arguments violate a documented precondition."""


class CapacityError(RuntimeError):
    """Requested computation exceeds a hard size limit (e.g. 2^n enumeration)."""


class DomainError(ValueError):
    """A potential or auxiliary function was evaluated outside its domain."""


class AbsorbedError(RuntimeError):
    """No infected vertex remains, so there is no next event to average over."""
