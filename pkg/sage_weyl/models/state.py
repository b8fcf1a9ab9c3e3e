from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from sage_weyl.helpers.typings import BoundaryMatrix, BoundaryVector, InteriorVector


@dataclass(frozen=True)
class ExtendedState:
    """
    An element of dom T, described by what the boundary maps and T need.

    Purpose
    -------
    Discrete models read everything off ``interior`` and ``boundary`` (the node
    values). The half-line model cannot differentiate grid samples exactly, so
    its states also carry the flux ``-u'(0)`` and the image ``T u`` on the
    quadrature grid.

    Attributes
    ----------
    interior : InteriorVector
        The H-component, one value per interior node or quadrature point.
    boundary : BoundaryVector
        Boundary values u|_∂, which is what Γ₁ returns.
    flux : Optional[BoundaryVector]
        Γ₀u when the model cannot recover it from the node values.
    image : Optional[InteriorVector]
        T u when the model cannot apply T to samples exactly.
    """

    interior: InteriorVector
    boundary: BoundaryVector
    flux: Optional[BoundaryVector] = None
    image: Optional[InteriorVector] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "interior", np.atleast_1d(np.asarray(self.interior)))
        object.__setattr__(self, "boundary", np.atleast_1d(np.asarray(self.boundary)))
        if self.flux is not None:
            object.__setattr__(self, "flux", np.atleast_1d(np.asarray(self.flux)))
        if self.image is not None:
            object.__setattr__(self, "image", np.asarray(self.image))

    def __add__(self, other: "ExtendedState") -> "ExtendedState":
        return ExtendedState(
            interior=self.interior + other.interior,
            boundary=self.boundary + other.boundary,
            flux=_combine(self.flux, other.flux),
            image=_combine(self.image, other.image),
        )

    def scaled(self, factor: complex) -> "ExtendedState":
        return ExtendedState(
            interior=factor * self.interior,
            boundary=factor * self.boundary,
            flux=None if self.flux is None else factor * self.flux,
            image=None if self.image is None else factor * self.image,
        )

    def euclidean_norm(self) -> float:
        return float(np.linalg.norm(np.concatenate([self.interior, self.boundary])))


def _combine(left, right):
    if left is None or right is None:
        return None
    return left + right


@dataclass(frozen=True)
class WeylValue:
    """The Weyl function M evaluated at one spectral parameter."""

    lam: complex
    matrix: BoundaryMatrix = field(repr=False)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def hermitian_part_min_eigenvalue(self) -> float:
        hermitian = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(hermitian)[0])

    def quadratic_form(self, phi: BoundaryVector) -> complex:
        """Returns (M(λ)φ, φ) in the Euclidean pairing of the boundary coordinates."""
        phi = np.asarray(phi)
        return complex(np.vdot(phi, self.matrix @ phi))

    def conjugate_symmetry_defect(self, other: "WeylValue") -> float:
        """
        Relative distance between this value and the adjoint of ``other``.

        ``other`` is expected to be the value at the conjugate parameter.
        """
        scale = max(np.linalg.norm(self.matrix), np.finfo(float).tiny)
        return float(np.linalg.norm(self.matrix - other.matrix.conj().T) / scale)
