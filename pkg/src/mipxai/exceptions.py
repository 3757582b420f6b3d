"""Exception and warning classes.

Every error carries a short machine-readable ``code`` next to its message so
the CLI can print ``error[CODE]: message`` lines that scripts can grep.
"""


class MIPError(Exception):
    """Base class for all errors raised by mipxai."""

    code = "E_MIP"

    def describe(self):
        return f"error[{self.code}]: {self}"


class InputError(MIPError, ValueError):
    """Rejected input value (non-finite score, bad label, wrong range)."""

    code = "E_INPUT"


class StructuralError(MIPError, ValueError):
    """Feature sets, arities or ranking memberships do not line up."""

    code = "E_STRUCTURE"


class DomainError(MIPError, ValueError):
    """Argument outside the domain where an operation is defined."""

    code = "E_DOMAIN"


class SizeError(MIPError, ValueError):
    code = "E_SIZE"


class UnfitError(MIPError, ValueError):
    """Training data cannot be fitted (e.g. only one class present)."""

    code = "E_UNFIT"


class StratificationError(MIPError, ValueError):
    code = "E_STRATIFY"


class CapabilityError(MIPError, TypeError):
    """Explainer kind does not support the given model family."""

    code = "E_CAPABILITY"


class CostGuardError(MIPError, ValueError):
    code = "E_COST"


class DegenerateDesignError(MIPError, ArithmeticError):
    """Sampled coalition design stayed rank deficient after escalation."""

    code = "E_DEGENERATE"


class UndefinedStatisticError(MIPError, ValueError):
    code = "E_UNDEFINED"


class MatrixDomainError(MIPError, ValueError):
    """Correlation matrix is not symmetric positive semi-definite."""

    code = "E_MATRIX"


class ParseError(MIPError, ValueError):
    code = "E_PARSE"

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class LabelError(MIPError, ValueError):
    code = "E_LABEL"


class EliminationError(MIPError, RuntimeError):
    """Training or explanation failed mid-loop; the partial trace is attached."""

    code = "E_ELIMINATION"

    def __init__(self, message, partial_rankings=(), partial_removed=()):
        super().__init__(message)
        self.partial_rankings = tuple(partial_rankings)
        self.partial_removed = tuple(partial_removed)


class ConvergenceWarning(UserWarning):
    pass


class DataWarning(UserWarning):
    """Constant columns, clipped eigenvalues and similar recoverable issues."""
