"""
Exceptions raised by the qcrb package.

Every error carries the process exit code the command line front end uses
when the error escapes a command: 2 for bad input, 3 for numerical trouble.
"""

from typing import Optional


class QcrbError(Exception):
    exit_code: int = 2


### Input errors ###


class InvalidInput(QcrbError, ValueError):
    exit_code = 2


class InvalidWeight(InvalidInput):
    pass


class FormatError(InvalidInput):
    pass


class InvalidModel(InvalidInput):
    """Model data violates a ModelPoint invariant; `invariant` names which."""

    invariant: str

    def __init__(self, invariant: str, message: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)


### Numerical errors ###


class NumericalFailure(QcrbError, ArithmeticError):
    exit_code = 3
    best_value: Optional[float] = None

    def __init__(self, message: str = "", best_value: Optional[float] = None):
        self.best_value = best_value
        super().__init__(message)


class SingularState(NumericalFailure):
    pass


class SingularBlock(NumericalFailure):
    pass


class DegenerateModel(NumericalFailure):
    pass


class DegenerateCase(NumericalFailure):
    pass


class NotRankOne(NumericalFailure):
    pass


class InternalError(NumericalFailure):
    pass


### Check suite ###


class CheckFailure(QcrbError):
    exit_code = 1
