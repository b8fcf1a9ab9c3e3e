from typing import Optional


class SageWeylError(Exception):
    """Base class for all sage_weyl exceptions."""

    exit_code: int = 1
    default_detail: str = "An unexpected error occurred."
    default_code: str = "error"

    def __init__(
        self,
        detail: Optional[str] = None,
        code: Optional[str] = None,
        exit_code: Optional[int] = None,
    ):
        if detail is None:
            detail = self.default_detail
        if code is None:
            code = self.default_code
        if exit_code is None:
            exit_code = self.exit_code
        super().__init__(detail)
        self.detail: str = detail
        self.code: str = code
        self.exit_code: int = exit_code

    def __str__(self) -> str:
        return f"{self.detail} (Code: {self.code}, Exit Code: {self.exit_code})"

    def to_dict(self) -> dict:
        return {"code": self.code, "detail": self.detail, "exit_code": self.exit_code}


# Configuration errors
class ConfigurationError(SageWeylError):
    """Base class for invalid user input."""

    exit_code = 2
    default_detail = "Invalid configuration."
    default_code = "configuration_error"


class ConfigInvalid(ConfigurationError):
    """Exception raised when an experiment configuration violates the schema.

    The offending field is identified by a JSON pointer relative to the
    document root, e.g. ``/grid/h``.
    """

    default_detail = "Configuration does not match the schema."
    default_code = "config_invalid"

    def __init__(
        self,
        detail: Optional[str] = None,
        pointer: str = "",
        code: Optional[str] = None,
        exit_code: Optional[int] = None,
    ):
        super().__init__(detail, code, exit_code)
        self.pointer: str = pointer

    def __str__(self) -> str:
        return (
            f"{self.detail} at '{self.pointer}' "
            f"(Code: {self.code}, Exit Code: {self.exit_code})"
        )

    def to_dict(self) -> dict:
        payload = super().to_dict()
        payload["pointer"] = self.pointer
        return payload


class BadGrid(ConfigInvalid):
    """Exception raised for non-positive extents or spacings that do not tile them."""

    default_detail = "Invalid grid specification."
    default_code = "bad_grid"


class BadProfile(ConfigInvalid):
    """Exception raised for unbounded or non-finite potential pieces."""

    default_detail = "Invalid half-line potential profile."
    default_code = "bad_profile"


class UnsupportedModel(ConfigurationError):
    """Exception raised when an operation needs a model kind it was not given."""

    default_detail = "Operation is not available for this model."
    default_code = "unsupported_model"


# Numerical errors
class NumericalError(SageWeylError):
    """Base class for numerical failures."""

    exit_code = 3
    default_detail = "A numerical error occurred."
    default_code = "numerical_error"


class SingularityError(NumericalError):
    """Base class for singular linear systems."""

    default_detail = "Singular linear system."
    default_code = "singularity_error"


class SingularSolve(SingularityError):
    """Exception raised when the spectral parameter lies on the Neumann spectrum."""

    default_detail = "Spectral parameter is too close to the spectrum of A0."
    default_code = "singular_solve"


class SingularSchur(SingularityError):
    """Exception raised when the interior block of the Schur reduction is singular.

    This happens when the spectral parameter hits the Dirichlet spectrum.
    """

    default_detail = "Schur complement reduction is singular."
    default_code = "singular_schur"


class SingularElimination(SingularityError):
    """Exception raised when a boundary condition does not fix the boundary values."""

    default_detail = "Boundary values cannot be eliminated."
    default_code = "singular_elimination"


class SingularKreinBlock(SingularityError):
    """Exception raised when I - B M(lambda) is singular."""

    default_detail = "Krein block I - B M(lambda) is singular."
    default_code = "singular_krein_block"


class EllipticityViolation(NumericalError):
    """Exception raised when the coefficient matrix is not uniformly positive."""

    default_detail = "Coefficient field is not uniformly elliptic."
    default_code = "ellipticity_violation"


class NotHermitian(NumericalError):
    """Exception raised when a matrix fails the symmetry check."""

    default_detail = "Matrix is not Hermitian."
    default_code = "not_hermitian"


class NotNegative(NumericalError):
    """Exception raised when a boundary parameter has a positive part."""

    default_detail = "Boundary parameter is not negative semidefinite."
    default_code = "not_negative"


class BadSamples(NumericalError):
    """Exception raised for sample sets that cannot support a fit."""

    default_detail = "Samples are not suitable for fitting."
    default_code = "bad_samples"


class NoConvergence(NumericalError):
    """Exception raised when an iterative eigensolver or root finder fails."""

    default_detail = "Iterative solver did not converge."
    default_code = "no_convergence"
