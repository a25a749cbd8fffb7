"""Exception types shared across the package."""


class OkmlError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(OkmlError, ValueError):
    """Invalid configuration values (bad bounds, malformed config file, ...)."""


class InputError(OkmlError, ValueError):
    """Invalid runtime input, e.g. non-finite numbers where finite are required."""


class ProtocolError(OkmlError, RuntimeError):
    """Violation of the online protocol (out-of-order samples, step before data)."""


class IngestError(OkmlError, ValueError):
    """A data file could not be ingested; the message names the offending spot."""
