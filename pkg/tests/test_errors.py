import pytest

from qcrb.errors import (
    CheckFailure,
    DegenerateCase,
    DegenerateModel,
    FormatError,
    InternalError,
    InvalidInput,
    InvalidModel,
    InvalidWeight,
    NotRankOne,
    NumericalFailure,
    QcrbError,
    SingularBlock,
    SingularState,
)


@pytest.mark.parametrize("cls", [InvalidInput, InvalidWeight, FormatError])
def test_input_errors(cls):
    e = cls("bad")
    assert isinstance(e, QcrbError)
    assert isinstance(e, ValueError)
    assert e.exit_code == 2


@pytest.mark.parametrize(
    "cls", [NumericalFailure, SingularState, SingularBlock, DegenerateModel, DegenerateCase, NotRankOne, InternalError]
)
def test_numerical_errors(cls):
    e = cls("failed", best_value=1.5)
    assert isinstance(e, ArithmeticError)
    assert e.exit_code == 3
    assert e.best_value == 1.5
    assert cls("failed").best_value is None


def test_invalid_model_names_invariant():
    e = InvalidModel("trace", "Tr rho = 0.9")
    assert e.invariant == "trace"
    assert str(e) == "trace: Tr rho = 0.9"
    assert str(InvalidModel("hermiticity")) == "hermiticity"
    assert e.exit_code == 2


def test_check_failure():
    e = CheckFailure("chain: holevo >= max_beta")
    assert e.exit_code == 1
    assert not isinstance(e, ArithmeticError)
