"""Exception types raised across the toolkit."""


class StrongSidonError(Exception):
    """Base class for every error raised by this package."""


class BasisTooShort(StrongSidonError, ValueError):
    pass


class InvalidDigit(StrongSidonError, ValueError):
    pass


class NotInAnyBand(StrongSidonError, ValueError):
    pass


class InvalidC(StrongSidonError, ValueError):
    pass


class NotPrime(StrongSidonError, ValueError):
    pass


class NoLogarithm(StrongSidonError, ValueError):
    pass


class PrimeCollision(StrongSidonError, ValueError):
    """The indexing prime divides one of the basis primes it needs."""


class TooLarge(StrongSidonError, MemoryError):
    """A sum table would exceed the configured memory budget."""


class ElementOutOfRange(StrongSidonError, ValueError):
    pass


class NotConstructedElements(StrongSidonError, ValueError):
    pass


class NotFound(StrongSidonError, LookupError):
    pass


class ParamMismatch(StrongSidonError, ValueError):
    pass


class InsufficientData(StrongSidonError, ValueError):
    pass
