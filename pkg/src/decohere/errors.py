class DecohereError(Exception):
    """Base class for errors raised by this package."""


class DomainError(DecohereError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceCapError(DecohereError):
    """A requested computation exceeds a configured size limit."""


class NumericError(DecohereError, ArithmeticError):
    """A numerical routine failed to converge or produced invalid output."""


class KernelValidityError(NumericError):
    """A decoherence kernel produced a probability outside tolerance."""


class NoDecayError(NumericError):
    """No positive decay rate could be fitted."""
