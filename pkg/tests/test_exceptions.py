import pytest

from sage_weyl.exceptions import (
    BadGrid,
    BadProfile,
    BadSamples,
    ConfigInvalid,
    ConfigurationError,
    EllipticityViolation,
    NoConvergence,
    NotHermitian,
    NotNegative,
    NumericalError,
    SageWeylError,
    SingularElimination,
    SingularityError,
    SingularKreinBlock,
    SingularSchur,
    SingularSolve,
    UnsupportedModel,
)


def test_sage_weyl_error_default():
    error = SageWeylError()
    assert error.detail == "An unexpected error occurred."
    assert error.code == "error"
    assert error.exit_code == 1
    assert str(error) == "An unexpected error occurred. (Code: error, Exit Code: 1)"


def test_sage_weyl_error_custom():
    error = SageWeylError(detail="Custom error", code="custom_error", exit_code=5)
    assert error.detail == "Custom error"
    assert error.code == "custom_error"
    assert error.exit_code == 5
    assert str(error) == "Custom error (Code: custom_error, Exit Code: 5)"


def test_config_invalid_carries_pointer():
    error = ConfigInvalid("Expected a number.", "/grid/h")
    assert error.pointer == "/grid/h"
    assert error.exit_code == 2
    assert str(error) == (
        "Expected a number. at '/grid/h' (Code: config_invalid, Exit Code: 2)"
    )
    assert error.to_dict() == {
        "code": "config_invalid",
        "detail": "Expected a number.",
        "exit_code": 2,
        "pointer": "/grid/h",
    }


def test_bad_grid():
    error = BadGrid(pointer="/grid/h")
    assert error.detail == "Invalid grid specification."
    assert error.code == "bad_grid"
    assert error.exit_code == 2
    assert isinstance(error, ConfigInvalid)


def test_bad_profile():
    error = BadProfile()
    assert error.code == "bad_profile"
    assert error.pointer == ""


def test_unsupported_model():
    error = UnsupportedModel()
    assert error.code == "unsupported_model"
    assert error.exit_code == 2
    assert isinstance(error, ConfigurationError)


@pytest.mark.parametrize(
    "error_class, code",
    [
        (SingularSolve, "singular_solve"),
        (SingularSchur, "singular_schur"),
        (SingularElimination, "singular_elimination"),
        (SingularKreinBlock, "singular_krein_block"),
    ],
)
def test_singularity_errors(error_class, code):
    error = error_class()
    assert error.code == code
    assert error.exit_code == 3
    assert isinstance(error, SingularityError)
    assert isinstance(error, NumericalError)


@pytest.mark.parametrize(
    "error_class, code",
    [
        (EllipticityViolation, "ellipticity_violation"),
        (NotHermitian, "not_hermitian"),
        (NotNegative, "not_negative"),
        (BadSamples, "bad_samples"),
        (NoConvergence, "no_convergence"),
    ],
)
def test_numerical_errors(error_class, code):
    error = error_class()
    assert error.code == code
    assert error.exit_code == 3
    assert not isinstance(error, SingularityError)


def test_numerical_error_to_dict_has_no_pointer():
    payload = SingularKreinBlock("I - B M(λ) is singular.").to_dict()
    assert payload == {
        "code": "singular_krein_block",
        "detail": "I - B M(λ) is singular.",
        "exit_code": 3,
    }
