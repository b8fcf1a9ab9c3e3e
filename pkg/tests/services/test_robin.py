import numpy as np
import pytest
import scipy.linalg

from sage_weyl.exceptions import SingularElimination, UnsupportedModel
from sage_weyl.helpers.enums import ParameterKind
from sage_weyl.models.parameter import BoundaryParameter
from sage_weyl.services.robin import (
    assemble_robin,
    robin_form,
    robin_pencil,
    robin_state,
)
from sage_weyl.services.spectral import min_eig
from sage_weyl.utils import is_hermitian, seeded_rng


def _scalar(value, dim):
    return BoundaryParameter(ParameterKind.SCALAR, value * np.eye(dim))


def _random_hermitian(rng, dim, scale=1.0):
    matrix = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (matrix + matrix.conj().T) / np.sqrt(dim)


def _finite_difference_robin(h, b_left, b_right):
    """-u'' on [0, 1] with u(0) and u(1) eliminated by one-sided Robin differences."""
    n = round(1.0 / h) - 1
    diagonal = np.full(n, 2.0 / h)
    diagonal[0] -= 1.0 / (h * (1.0 - h * b_left))
    diagonal[-1] -= 1.0 / (h * (1.0 - h * b_right))
    off = np.ones(n - 1) / h
    stiffness = np.diag(diagonal) - np.diag(off, 1) - np.diag(off, -1)
    mass = np.full(n, h)
    mass[[0, -1]] = 1.5 * h
    return stiffness / np.sqrt(np.outer(mass, mass))


@pytest.mark.parametrize("b_left, b_right", [(2.0, -3.0), (0.0, 10.0), (-5.0, -5.0)])
def test_local_robin_matches_finite_differences(interval_model, b_left, b_right):
    B = BoundaryParameter(ParameterKind.LOCAL, np.diag([b_left, b_right]))
    matrix = assemble_robin(interval_model, B)
    expected = _finite_difference_robin(interval_model.h, b_left, b_right)
    assert matrix.shape == expected.shape
    assert np.max(np.abs(matrix - expected)) <= 1e-12 * np.max(np.abs(expected))


def test_zero_parameter_gives_a0(square_model):
    matrix = assemble_robin(square_model, _scalar(0.0, square_model.boundary_dim))
    assert matrix is square_model.a0_matrix
    assert min_eig(matrix) == pytest.approx(square_model.min_sigma_A0)


def test_robin_matrix_is_hermitian(random_model):
    rng = seeded_rng(3)
    B = BoundaryParameter(ParameterKind.NONLOCAL, _random_hermitian(rng, 4))
    assert is_hermitian(assemble_robin(random_model, B))


def test_pencil_reproduces_spectrum(random_model):
    B = BoundaryParameter(ParameterKind.LOCAL, np.diag([0.5, -0.2, 0.1, 0.3]))
    stiffness, mass = robin_pencil(random_model, B)
    values = scipy.linalg.eigvals(stiffness.toarray(), mass.toarray())
    finite = np.sort(np.real(values[np.isfinite(values)]))
    expected = np.linalg.eigvalsh(assemble_robin(random_model, B))
    assert finite[:5] == pytest.approx(expected[:5], rel=1e-8)


def test_robin_state_satisfies_boundary_condition(random_model):
    rng = seeded_rng(4)
    B = BoundaryParameter(ParameterKind.NONLOCAL, _random_hermitian(rng, 4, 0.5))
    state = robin_state(random_model, B, random_model.random_interior_vector(rng))
    expected = B.matrix @ random_model.trace1(state)
    assert np.allclose(random_model.trace0(state), expected)


def test_robin_form_matches_operator(random_model):
    rng = seeded_rng(5)
    B = BoundaryParameter(ParameterKind.NONLOCAL, _random_hermitian(rng, 4, 0.5))
    state = robin_state(random_model, B, random_model.random_interior_vector(rng))
    pairing = random_model.inner(random_model.apply_T(state), state.interior)
    assert robin_form(random_model, B, state) == pytest.approx(pairing, rel=1e-10)


def test_robin_solve_matches_matrix(square_model):
    rng = seeded_rng(6)
    B = _scalar(2.0, square_model.boundary_dim)
    lam = -1.0 + 0.5j
    f = square_model.random_interior_vector(rng)
    direct = square_model.robin_solve(B.matrix, lam, f)
    root = np.sqrt(square_model.mass)
    matrix = assemble_robin(square_model, B)
    shifted = matrix - lam * np.eye(matrix.shape[0])
    via_matrix = np.linalg.solve(shifted, root * f) / root
    assert np.allclose(direct, via_matrix, rtol=1e-9, atol=1e-12)


def test_spectrum_is_monotone_in_the_parameter(square_model):
    dim = square_model.boundary_dim
    lower = square_model.robin_min_sigma(_scalar(1.0, dim).matrix)
    higher = square_model.robin_min_sigma(_scalar(0.5, dim).matrix)
    assert lower < higher < square_model.min_sigma_A0
    raised = square_model.robin_min_sigma(_scalar(-1.0, dim).matrix)
    assert raised > square_model.min_sigma_A0


def test_singular_elimination(random_model):
    n = random_model.state_dim
    boundary_block = random_model.form.toarray()[n:, n:] / random_model.weight
    B = BoundaryParameter(ParameterKind.NONLOCAL, boundary_block)
    with pytest.raises(SingularElimination):
        assemble_robin(random_model, B)


def test_dimension_mismatch(random_model):
    with pytest.raises(UnsupportedModel):
        assemble_robin(random_model, _scalar(1.0, 3))


def test_discrete_only_helpers(free_halfline):
    B = _scalar(1.0, 1)
    with pytest.raises(UnsupportedModel):
        robin_pencil(free_halfline, B)
    with pytest.raises(UnsupportedModel):
        robin_state(free_halfline, B, np.zeros(free_halfline.state_dim))
    with pytest.raises(UnsupportedModel):
        robin_form(free_halfline, B, None)


def test_halfline_robin_matrix(free_halfline):
    matrix = assemble_robin(free_halfline, _scalar(1.0, 1))
    assert matrix.shape == (free_halfline.state_dim - 1,) * 2
    assert min_eig(matrix, sigma=-3.0) == pytest.approx(-1.0, rel=1e-2)
