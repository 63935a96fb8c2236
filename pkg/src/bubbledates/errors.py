"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: parameter/config problems exit with 2,
data problems with 3, and numeric degeneracies with 4.
"""


class BubbleDatesError(Exception):
    """Base class for all package errors."""


class ParameterError(BubbleDatesError, ValueError):
    """Invalid argument, specification, or configuration value."""


class DataError(BubbleDatesError, ValueError):
    """Malformed or inconsistent input data (CSV ingestion, date order)."""


class RangeError(BubbleDatesError, ValueError):
    """An index scan range or evaluation domain is empty or out of bounds."""


class DegenerateFitError(BubbleDatesError, ArithmeticError):
    """Estimated quantities make a statistic undefined.

    Raised when sigma2_hat <= 0, when an explosive fit has phi_a_hat <= 1,
    when a collapse fit has phi_b_hat outside (0, 1), or when a regressor
    has zero variance.  Test-inversion layers treat this as "retain".
    """


class NumericOverflowError(BubbleDatesError, OverflowError):
    """A simulated path or statistic left the representable range."""


class FitError(BubbleDatesError, ValueError):
    """Response-surface regression could not be fit as requested."""
