"""Exception types shared across the package.

Errors are split by what the caller can do about them: fix the inputs
(:class:`ConfigError`, :class:`DataError`), fix the call site
(:class:`DimensionError`, :class:`MaskError`, :class:`PairingError`,
:class:`MetricError`), or fix the call ordering (:class:`StateError`).
The command-line front end maps ConfigError to exit code 2 and
DataError to exit code 3.
"""


class VblabError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(VblabError, ValueError):
    """Array shapes do not line up for the requested operation."""


class MaskError(VblabError, ValueError):
    """A class mask left no admissible class in some row."""


class StateError(VblabError, RuntimeError):
    """An operation was called out of order (e.g. backward with no cached forward)."""


class ConfigError(VblabError, ValueError):
    """A configuration value or combination of values is invalid."""


class DataError(VblabError, ValueError):
    """A dataset file or payload could not be parsed."""


class MetricError(VblabError, ValueError):
    """A metric is undefined for the given inputs (e.g. too few tasks or epochs)."""


class PairingError(VblabError, ValueError):
    """Report generation could not match a run to exactly one baseline."""


class EpochExhausted(VblabError):
    """Signal that the current epoch's sample order has been fully consumed."""
