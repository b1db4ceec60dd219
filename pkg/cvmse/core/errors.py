"""
Error types
Every failure a caller can act on derives from CVMSEError
"""


class CVMSEError(Exception):
    """Base class for cvmse errors"""


class NotDivisible(CVMSEError):
    """Fold count does not divide the sample size"""


class LengthMismatch(CVMSEError):
    """Sample length differs from the fold scheme"""


class DomainMismatch(CVMSEError):
    """Hypothesis and distribution disagree on the label domain"""


class BudgetExceeded(CVMSEError):
    """Exhaustive enumeration would exceed the configured budget"""


class InvalidFoldSize(CVMSEError):
    """Fold size outside the range an operation accepts"""


class FormDomain(CVMSEError):
    """Approximation form evaluated outside its domain"""


class OutOfRange(CVMSEError):
    """Argument outside its admissible range"""


class Inconsistent(CVMSEError):
    """Linear system over F_q has no solution"""


class RTooSmall(CVMSEError):
    """Square-wave prediction requested with R < 1"""


class InputMismatch(CVMSEError):
    """Report and profile were computed on different instances"""


class UsageError(CVMSEError):
    """Invalid experiment configuration"""
