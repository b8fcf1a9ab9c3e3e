import logging
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from sage_weyl.exceptions import ConfigInvalid, NotHermitian
from sage_weyl.helpers.enums import ParameterKind
from sage_weyl.helpers.typings import BoundaryMatrix
from sage_weyl.models.coefficient import CoefficientField
from sage_weyl.utils import hermitian_defect, is_hermitian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundaryParameter:
    """
    The self-adjoint parameter B of a Robin-type extension A_[B].

    Purpose
    -------
    B acts on the boundary coordinates. The extension A_[B] is T restricted to
    {u : Γ₀u = BΓ₁u}; positive parts of B lower the spectrum.

    Attributes
    ----------
    kind : ParameterKind
        How B was specified.
    matrix : BoundaryMatrix
        The materialized Hermitian matrix.
    upper_bound : Optional[float]
        An upper bound for σ(B). Computed as max σ(B) when omitted.

    Raises
    ------
    NotHermitian
        If ``matrix`` fails the symmetry check.
    ValueError
        If a supplied ``upper_bound`` is below max σ(B).
    """

    kind: ParameterKind
    matrix: BoundaryMatrix = field(repr=False)
    upper_bound: Optional[float] = None

    def __post_init__(self) -> None:
        matrix = np.atleast_2d(np.asarray(self.matrix))
        if not np.iscomplexobj(matrix):
            matrix = matrix.astype(float)
        if not is_hermitian(matrix):
            logger.error("Boundary parameter is not Hermitian.")
            raise NotHermitian(
                f"Boundary parameter fails the symmetry check "
                f"(defect {hermitian_defect(matrix):.3e})."
            )
        object.__setattr__(self, "matrix", matrix)
        top = self.max_eigenvalue()
        if self.upper_bound is None:
            object.__setattr__(self, "upper_bound", top)
        elif self.upper_bound < top - 1e-12 * max(1.0, abs(top)):
            raise ValueError("upper_bound is below the largest eigenvalue of B.")

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def is_diagonal(self) -> bool:
        return bool(np.count_nonzero(self.matrix - np.diag(np.diag(self.matrix))) == 0)

    def max_eigenvalue(self) -> float:
        if self.dim == 0:
            return 0.0
        if self.is_diagonal():
            return float(np.max(np.real(np.diag(self.matrix))))
        return float(np.linalg.eigvalsh(self.matrix)[-1])

    @property
    def plus_norm(self) -> float:
        """‖B₊‖, the largest positive eigenvalue of B or zero."""
        return max(0.0, self.max_eigenvalue())

    def scaled(self, omega: float) -> "BoundaryParameter":
        return BoundaryParameter(kind=self.kind, matrix=omega * self.matrix)


def boundary_param(
    spec: Mapping[str, Any], model: Any, pointer: str = "/B"
) -> BoundaryParameter:
    """
    Materializes a boundary parameter from its configuration on a model.

    Parameters
    ----------
    spec : Mapping[str, Any]
        One of ``{"kind": "scalar", "value": b}``,
        ``{"kind": "local", "values": [...]}``,
        ``{"kind": "local", "function": coefficient}``,
        ``{"kind": "nonlocal", "matrix": [[...]]}`` or
        ``{"kind": "nonlocal", "gaussian": {"amplitude": a, "width": w}}``,
        each with an optional multiplicative ``"scale"``.
    model : TripleModel
        Supplies ``boundary_dim`` and ``boundary_coordinates``.
    pointer : str
        JSON pointer of ``spec`` for error messages.

    Returns
    -------
    BoundaryParameter
        The materialized parameter.

    Raises
    ------
    ConfigInvalid
        If the specification is malformed or has the wrong size.
    NotHermitian
        If an explicit nonlocal matrix is not Hermitian.
    """
    if not isinstance(spec, Mapping):
        raise ConfigInvalid("Boundary parameter must be an object.", pointer)
    try:
        kind = ParameterKind(spec.get("kind"))
    except ValueError as exc:
        raise ConfigInvalid(
            f"Unknown boundary parameter kind {spec.get('kind')!r}.", f"{pointer}/kind"
        ) from exc

    dim = model.boundary_dim
    scale = _number(spec.get("scale", 1.0), f"{pointer}/scale")

    if kind is ParameterKind.SCALAR:
        value = _number(spec.get("value"), f"{pointer}/value")
        matrix = value * np.eye(dim)
    elif kind is ParameterKind.LOCAL:
        matrix = np.diag(_local_values(spec, model, pointer))
    elif "gaussian" in spec:
        matrix = _gaussian_kernel(spec["gaussian"], model, f"{pointer}/gaussian")
    elif "matrix" in spec:
        try:
            matrix = np.asarray(spec["matrix"], dtype=complex)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(
                "Matrix entries must be numbers.", f"{pointer}/matrix"
            ) from exc
        if not np.any(matrix.imag):
            matrix = matrix.real
        if matrix.shape != (dim, dim):
            raise ConfigInvalid(
                f"Matrix must be {dim}x{dim}, got {matrix.shape}.", f"{pointer}/matrix"
            )
    else:
        raise ConfigInvalid("Nonlocal parameter needs 'matrix' or 'gaussian'.", pointer)

    parameter = BoundaryParameter(kind=kind, matrix=scale * matrix)
    logger.debug(
        "Boundary parameter %s of size %d, max eigenvalue %.6g",
        kind,
        parameter.dim,
        parameter.upper_bound,
    )
    return parameter


def _number(value: Any, pointer: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid("Expected a number.", pointer)
    if not np.isfinite(value):
        raise ConfigInvalid("Expected a finite number.", pointer)
    return float(value)


def _local_values(spec: Mapping[str, Any], model: Any, pointer: str) -> np.ndarray:
    dim = model.boundary_dim
    if "values" in spec:
        values = spec["values"]
        if isinstance(values, (int, float)) and not isinstance(values, bool):
            values = [values] * dim
        try:
            array = np.asarray(values, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(
                "Local values must be real numbers.", f"{pointer}/values"
            ) from exc
        if array.shape != (dim,) or not np.all(np.isfinite(array)):
            raise ConfigInvalid(
                f"Expected {dim} finite local values.", f"{pointer}/values"
            )
        return array
    if "function" in spec:
        field_ = CoefficientField.from_spec(spec["function"], f"{pointer}/function")
        return field_(model.boundary_coordinates)
    raise ConfigInvalid("Local parameter needs 'values' or 'function'.", pointer)


def _gaussian_kernel(spec: Any, model: Any, pointer: str) -> np.ndarray:
    if not isinstance(spec, Mapping):
        raise ConfigInvalid("Gaussian kernel must be an object.", pointer)
    amplitude = _number(spec.get("amplitude", 1.0), f"{pointer}/amplitude")
    width = _number(spec.get("width"), f"{pointer}/width")
    if width <= 0:
        raise ConfigInvalid("Kernel width must be positive.", f"{pointer}/width")
    points = np.atleast_2d(np.asarray(model.boundary_coordinates, dtype=float))
    distances = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
    kernel = amplitude * np.exp(-distances / (2.0 * width**2))
    return 0.5 * (kernel + kernel.conj().T)
