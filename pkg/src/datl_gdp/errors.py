"""Exception hierarchy shared across the package."""


class DatlError(Exception):
    """Base class for all package errors."""


class FormatError(DatlError, ValueError):
    pass


class ParseError(DatlError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ValidationError(DatlError, ValueError):
    pass


class UnknownCountryError(DatlError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class EmptyDatasetError(DatlError, ValueError):
    pass


class IncompleteFeaturesError(DatlError, ValueError):
    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class InvalidHyperparameterError(DatlError, ValueError):
    pass


class NumericFailureError(DatlError, ArithmeticError):
    pass


class ConvergenceError(NumericFailureError):
    def __init__(self, message, violation):
        super().__init__(message)
        self.violation = violation


class SizeError(DatlError, ValueError):
    pass


class AllCandidatesFailedError(DatlError, RuntimeError):
    def __init__(self, message, causes=()):
        super().__init__(message)
        self.causes = list(causes)


class InfeasibleFractionError(DatlError, ValueError):
    pass


class UndefinedDenominatorError(DatlError, ZeroDivisionError):
    pass


class DomainError(DatlError, ValueError):
    pass
