class ToolkitError(Exception):
    """
    Base exception class for toolkit-specific errors.

    All custom exceptions for the verification toolkit inherit from this class,
    allowing for unified error handling in the harness.
    """
    pass


class ValidationError(ToolkitError):
    """
    Raised when an input violates the preconditions of an operation.

    Examples are a non-unit where a unit is required, elements over different
    primes, or a series whose constant term must vanish but does not.
    """
    pass


class PrecisionError(ToolkitError):
    """
    Raised when an operation runs out of p-adic precision.

    This covers exact divisions that are not exact to the available precision,
    series that stop gaining valuation before their tail is negligible, and
    descent checks that cannot be decided.
    """
    pass


class IntegralityError(PrecisionError):
    """
    Raised when a value that must be integral carries a denominator.
    """
    pass


class DegenerateDivisorError(ToolkitError):
    """
    Raised when a Miller function is evaluated on the support of its divisor.
    """
    pass


class ConfigurationError(ToolkitError):
    """
    Raised when the harness configuration is invalid.

    Triggered by unparsable config files, invalid values or unknown suite names.
    """
    pass
