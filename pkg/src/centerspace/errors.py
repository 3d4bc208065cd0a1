"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A configuration or construction parameter violates its constraints."""


class InputError(ValueError):
    """Query or batch data is unusable (wrong shape, zero norm, non-finite)."""


class StoreError(ValueError):
    """Base class for persistence failures."""


class BadMagicError(StoreError):
    """The stream does not start with the expected file signature."""


class BadVersionError(StoreError):
    """The file signature is known but the version is unsupported."""


class TruncatedError(StoreError):
    """The stream ended before the declared payload was complete."""


class IntegrityError(StoreError):
    """Decoded content violates a structural invariant."""
