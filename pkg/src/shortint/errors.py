"""Exception types shared across the package."""


class ShortIntervalError(Exception):
    """Base class for errors raised by shortint operations."""


class OutOfRangeError(ShortIntervalError):
    """A query reaches beyond the sieved limit of a prime table."""


class MemoryBudgetError(ShortIntervalError):
    """Building a table would exceed the configured memory budget."""


class CacheFormatError(ShortIntervalError):
    """An on-disk prime table cache is malformed or inconsistent."""


class InadmissibleTupleError(ShortIntervalError):
    """An operation that requires an admissible tuple received one that is not."""


class ParameterRangeError(ShortIntervalError):
    """A parameter lies outside the range an operation supports."""
