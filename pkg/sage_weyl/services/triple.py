import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np

from sage_weyl.decorators import resolvent_point_required
from sage_weyl.exceptions import ConfigInvalid
from sage_weyl.helpers.typings import (
    BoundaryMatrix,
    BoundaryVector,
    InteriorVector,
    MatrixLike,
    SpectralParameter,
)
from sage_weyl.models.state import ExtendedState, WeylValue

logger = logging.getLogger(__name__)

NEAR_SPECTRUM = 1e-8


class TripleModel(ABC):
    """
    A boundary triple {𝒢, Γ₀, Γ₁} for a maximal operator T in a Hilbert space H.

    Purpose
    -------
    Concrete models supply the inner products, T, the boundary maps and one
    solver, :meth:`solve_extended`, which returns the unique extended state u
    with (T - λ)u = f and Γ₀u = φ. The γ-field, the Weyl function, the
    resolvent of A₀ = T↾ker Γ₀ and the Krein formula are all built from it.

    Attributes
    ----------
    min_sigma_A0 : float
        Lowest point of σ(A₀), computed once at construction.
    spectral_radius : float
        Scale used by the "near the spectrum" tolerance.

    Notes
    -----
    Models are immutable after construction; every evaluation allocates its own
    factorizations, so concurrent λ-sweeps need no locking.
    """

    min_sigma_A0: float
    spectral_radius: float

    @property
    @abstractmethod
    def state_dim(self) -> int: ...

    @property
    @abstractmethod
    def boundary_dim(self) -> int: ...

    @property
    @abstractmethod
    def boundary_coordinates(self) -> np.ndarray: ...

    @abstractmethod
    def apply_T(self, state: ExtendedState) -> InteriorVector: ...

    @abstractmethod
    def trace0(self, state: ExtendedState) -> BoundaryVector: ...

    def trace1(self, state: ExtendedState) -> BoundaryVector:
        return state.boundary

    @abstractmethod
    def inner(self, f: InteriorVector, g: InteriorVector) -> complex:
        """The inner product of H, linear in ``f``."""

    @abstractmethod
    def boundary_inner(self, phi: BoundaryVector, psi: BoundaryVector) -> complex:
        """The inner product of 𝒢, linear in ``phi``."""

    @abstractmethod
    def ensure_resolvent_point(self, lam: SpectralParameter) -> None:
        """Raises SingularSolve when λ is within tolerance of σ(A₀)."""

    @abstractmethod
    def solve_extended(
        self, lam: SpectralParameter, rhs: InteriorVector, phi: BoundaryVector
    ) -> ExtendedState:
        """Returns u with (T - λ)u = rhs and Γ₀u = phi."""

    @abstractmethod
    def weyl_matrix(self, lam: SpectralParameter) -> BoundaryMatrix: ...

    @abstractmethod
    def robin_matrix(self, b_matrix: BoundaryMatrix) -> MatrixLike:
        """A_[B] as a Hermitian operator in mass-orthonormal interior coordinates."""

    @abstractmethod
    def robin_solve(
        self, b_matrix: BoundaryMatrix, lam: SpectralParameter, rhs: InteriorVector
    ) -> InteriorVector:
        """Solves (A_[B] - λ)u = rhs directly, without the Krein formula."""

    @abstractmethod
    def robin_min_sigma(
        self, b_matrix: BoundaryMatrix, shift: Optional[float] = None
    ) -> float: ...

    @abstractmethod
    def dirichlet_matrix(self) -> MatrixLike:
        """A₁ = T↾ker Γ₁ in mass-orthonormal interior coordinates."""

    @abstractmethod
    def dirichlet_min_sigma(self) -> float: ...

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """A JSON-ready summary used in reports."""

    @property
    def decay_anchor(self) -> float:
        """Default envelope anchor mu; at most min σ(A₀)."""
        return self.min_sigma_A0

    def weyl_limit(self) -> BoundaryMatrix:
        """lim M(λ) as λ → -∞; zero unless the model overrides it."""
        return np.zeros((self.boundary_dim,) * 2)

    def norm(self, f: InteriorVector) -> float:
        return float(np.sqrt(max(self.inner(f, f).real, 0.0)))

    def boundary_norm(self, phi: BoundaryVector) -> float:
        return float(np.sqrt(max(self.boundary_inner(phi, phi).real, 0.0)))

    def random_state(
        self, rng: np.random.Generator, complex_values: bool = True
    ) -> ExtendedState:
        """
        Draws an extended state as u = (A₀ - λ)⁻¹f + γ(λ)φ for random f and φ.

        Every element of dom T has this form for a fixed λ in ρ(A₀).
        """
        lam = self.min_sigma_A0 - 1.0
        rhs = _random_vector(rng, self.state_dim, complex_values)
        phi = _random_vector(rng, self.boundary_dim, complex_values)
        return self.solve_extended(lam, rhs, phi)

    def random_boundary_vector(
        self, rng: np.random.Generator, complex_values: bool = True
    ) -> BoundaryVector:
        return _random_vector(rng, self.boundary_dim, complex_values)

    def random_interior_vector(
        self, rng: np.random.Generator, complex_values: bool = True
    ) -> InteriorVector:
        return _random_vector(rng, self.state_dim, complex_values)


def _random_vector(
    rng: np.random.Generator, size: int, complex_values: bool
) -> np.ndarray:
    vector = rng.standard_normal(size)
    if complex_values:
        vector = vector + 1j * rng.standard_normal(size)
    return vector


def _boundary_vector(model: TripleModel, phi: BoundaryVector) -> np.ndarray:
    phi = np.atleast_1d(np.asarray(phi))
    if phi.shape != (model.boundary_dim,):
        raise ConfigInvalid(
            f"Boundary vector must have length {model.boundary_dim}, got {phi.shape}.",
            pointer="/phi",
        )
    return phi


def _interior_vector(model: TripleModel, f: InteriorVector) -> np.ndarray:
    f = np.atleast_1d(np.asarray(f))
    if f.shape != (model.state_dim,):
        raise ConfigInvalid(
            f"Interior vector must have length {model.state_dim}, got {f.shape}.",
            pointer="/f",
        )
    return f


@resolvent_point_required
def gamma_field(
    model: TripleModel, lam: SpectralParameter, phi: BoundaryVector
) -> ExtendedState:
    """
    Evaluates the γ-field: the solution of (T - λ)u = 0 with Γ₀u = φ.

    Parameters
    ----------
    model : TripleModel
        The boundary triple.
    lam : SpectralParameter
        A point of ρ(A₀).
    phi : BoundaryVector
        Boundary data of length ``model.boundary_dim``.

    Returns
    -------
    ExtendedState
        γ(λ)φ together with its boundary values.

    Raises
    ------
    SingularSolve
        If λ is within tolerance of σ(A₀).
    """
    phi = _boundary_vector(model, phi)
    logger.debug("gamma_field at λ=%s", lam)
    return model.solve_extended(lam, np.zeros(model.state_dim), phi)


@resolvent_point_required
def weyl(model: TripleModel, lam: SpectralParameter) -> WeylValue:
    """
    Evaluates the Weyl function M(λ) = Γ₁γ(λ).

    Raises
    ------
    SingularSolve
        If λ is within tolerance of σ(A₀), where M has poles.
    SingularSchur
        If the Schur reduction of a discrete model is singular (λ on σ(A₁)).
    """
    return WeylValue(lam=complex(lam), matrix=model.weyl_matrix(lam))


def weyl_norm(model: TripleModel, lam: float) -> float:
    """Operator norm of M(λ) on 𝒢, used by the decay samplers."""
    return weyl(model, lam).norm()


@resolvent_point_required
def gamma_adjoint(
    model: TripleModel, lam: SpectralParameter, f: InteriorVector
) -> BoundaryVector:
    """
    Evaluates γ(λ)* f = Γ₁(A₀ - λ̄)⁻¹ f.

    The result satisfies ⟨γ(λ)φ, f⟩_H = ⟨φ, γ(λ)* f⟩_𝒢 for all φ.
    """
    f = _interior_vector(model, f)
    solution = model.solve_extended(np.conj(lam), f, np.zeros(model.boundary_dim))
    return model.trace1(solution)


def green_residual(model: TripleModel, f: ExtendedState, g: ExtendedState) -> float:
    """
    Returns |(Tf, g) - (f, Tg) - [(Γ₁f, Γ₀g) - (Γ₀f, Γ₁g)]|.

    Parameters
    ----------
    model : TripleModel
        The boundary triple.
    f, g : ExtendedState
        Two elements of dom T.

    Returns
    -------
    float
        The defect of the abstract Green identity; round-off for exact models.
    """
    left = model.inner(model.apply_T(f), g.interior) - model.inner(
        f.interior, model.apply_T(g)
    )
    right = model.boundary_inner(
        model.trace1(f), model.trace0(g)
    ) - model.boundary_inner(model.trace0(f), model.trace1(g))
    return float(abs(left - right))


def weyl_derivative_residual(
    model: TripleModel, lam: float, phi: BoundaryVector, h: float
) -> float:
    """
    Compares a central difference of λ ↦ (M(λ)φ, φ) with ‖γ(λ)φ‖².

    Parameters
    ----------
    model : TripleModel
        The boundary triple.
    lam : float
        A real point with [λ - h, λ + h] inside ρ(A₀).
    phi : BoundaryVector
        Boundary data.
    h : float
        Finite-difference step.

    Returns
    -------
    float
        |((M(λ+h)φ, φ) - (M(λ-h)φ, φ)) / 2h - ‖γ(λ)φ‖²|.
    """
    phi = _boundary_vector(model, phi)
    if not np.any(phi):
        return 0.0

    def quadratic(point: float) -> complex:
        return model.boundary_inner(weyl(model, point).matrix @ phi, phi)

    difference = (quadratic(lam + h) - quadratic(lam - h)) / (2.0 * h)
    state = gamma_field(model, lam, phi)
    return float(abs(difference - model.norm(state.interior) ** 2))
