"""Exception hierarchy.

The CLI maps the three top-level families onto exit codes: ``UsageError``
-> 1, ``ValidationError`` -> 2, ``NumericalError`` -> 3.
"""


class KernelAFAError(Exception):
    """Base class for every error raised by this package."""


class UsageError(KernelAFAError):
    pass


class ValidationError(KernelAFAError, ValueError):
    """An input violates a documented invariant."""


class ParseError(ValidationError):
    """A file could not be parsed. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionMismatch(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class NOutOfRange(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class MaskOutOfRange(ValidationError, IndexError):
    pass


class WeightOutOfRange(ValidationError):
    pass


class WidthOutOfRange(ValidationError):
    pass


class DegenerateBand(ValidationError):
    pass


class NegativeWeight(ValidationError):
    pass


class NonPositiveScale(ValidationError):
    pass


class EmptyBackground(ValidationError):
    pass


class NTooLargeForPermutations(ValidationError):
    pass


class NumericalError(KernelAFAError, ArithmeticError):
    pass


class Overflow(NumericalError, OverflowError):
    pass


class DegenerateKernel(NumericalError):
    """No positive weight on coalition sizes 1..n-1."""


class AllZeroInterior(DegenerateKernel):
    pass


class SingularSystem(NumericalError):
    pass


class NumericalFailure(NumericalError):
    pass
