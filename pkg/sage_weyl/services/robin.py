import logging
from typing import Tuple

import numpy as np
from scipy import sparse

from sage_weyl.exceptions import UnsupportedModel
from sage_weyl.helpers.typings import InteriorVector, MatrixLike
from sage_weyl.models.parameter import BoundaryParameter
from sage_weyl.models.state import ExtendedState
from sage_weyl.services.discrete import DiscreteTripleModel
from sage_weyl.services.triple import TripleModel

logger = logging.getLogger(__name__)


def _check_dimension(model: TripleModel, B: BoundaryParameter) -> None:
    if B.dim != model.boundary_dim:
        raise UnsupportedModel(
            f"Boundary parameter has size {B.dim}, "
            f"the model boundary has {model.boundary_dim}."
        )


def assemble_robin(model: TripleModel, B: BoundaryParameter) -> MatrixLike:
    """
    Returns the matrix of A_[B] = T restricted to {Γ₀u = BΓ₁u}.

    Purpose
    -------
    Discrete models eliminate the boundary values through
    (L_∂∂ - wB) u_∂ = -L_∂I u_I and return a Hermitian matrix in
    mass-orthonormal coordinates (a ``LinearOperator`` above the dense limit).
    The half-line model returns the 3-point finite-difference Robin matrix on
    its quadrature grid.

    Parameters
    ----------
    model : TripleModel
        The boundary triple.
    B : BoundaryParameter
        The Robin parameter.

    Returns
    -------
    MatrixLike
        A_[B]; for B = 0 on a dense discrete model this is the cached A₀ matrix.

    Raises
    ------
    SingularElimination
        If L_∂∂ - wB is singular.
    UnsupportedModel
        If the sizes of B and the boundary space differ.
    """
    _check_dimension(model, B)
    discrete = isinstance(model, DiscreteTripleModel)
    if discrete and model.is_dense and not np.any(B.matrix):
        return model.a0_matrix
    logger.debug("Assembling A_[B] for a %s parameter", B.kind)
    return model.robin_matrix(B.matrix)


def robin_pencil(
    model: DiscreteTripleModel, B: BoundaryParameter
) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """
    Returns (L - diag(0, wB), diag(m, 0)) on all nodes.

    The finite eigenvalues of the pencil are σ(A_[B]); the semidefinite mass
    leaves the boundary rows as constraints.
    """
    if not isinstance(model, DiscreteTripleModel):
        raise UnsupportedModel("The node pencil exists for discrete models only.")
    _check_dimension(model, B)
    stiffness = model.shifted_system(0.0, B.matrix)
    mass = sparse.diags(np.concatenate([model.mass, np.zeros(model.boundary_dim)]))
    return sparse.csr_matrix(stiffness), sparse.csr_matrix(mass)


def robin_state(
    model: DiscreteTripleModel, B: BoundaryParameter, interior: InteriorVector
) -> ExtendedState:
    """The element of dom A_[B] with the given interior values."""
    if not isinstance(model, DiscreteTripleModel):
        raise UnsupportedModel("Robin lifts exist for discrete models only.")
    _check_dimension(model, B)
    return model.robin_extension(B.matrix, interior)


def robin_form(
    model: DiscreteTripleModel, B: BoundaryParameter, state: ExtendedState
) -> complex:
    """
    Evaluates a[u] - (BΓ₁u, Γ₁u)_𝒢, the quadratic form of A_[B].

    a[u] = uᴴ L u is the closed form of the model, so that
    (T u, u) = a[u] - (Γ₀u, Γ₁u)_𝒢 for every state; on dom A_[B] the two
    expressions agree.
    """
    if not isinstance(model, DiscreteTripleModel):
        raise UnsupportedModel("The closed form is available for discrete models only.")
    _check_dimension(model, B)
    nodes = np.concatenate([state.interior, state.boundary])
    energy = complex(np.vdot(nodes, model.form @ nodes))
    trace = model.trace1(state)
    return energy - model.boundary_inner(B.matrix @ trace, trace)
