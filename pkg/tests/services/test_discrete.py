import numpy as np
import pytest
import scipy.linalg
from scipy import sparse

from sage_weyl.exceptions import (
    BadGrid,
    EllipticityViolation,
    NotHermitian,
    SingularSchur,
)
from sage_weyl.services.discrete import (
    DiscreteTripleModel,
    build_discrete_model,
    random_discrete_model,
)
from sage_weyl.services.spectral import DENSE_LIMIT
from sage_weyl.services.triple import weyl


def _interval(h, coefficients=None):
    return build_discrete_model({"dim": 1, "extents": [1.0], "h": h}, coefficients)


def test_small_interval_dimensions():
    model = _interval(0.25)
    assert (model.state_dim, model.boundary_dim) == (3, 2)
    assert model.weight == 1.0
    assert np.sum(model.mass) == pytest.approx(1.0)


def test_form_is_hermitian(square_model):
    form = square_model.form
    assert abs(form - form.conj().T).max() == 0.0


def test_laplacian_stencil_in_2d():
    model = build_discrete_model({"dim": 2, "extents": [1.0, 1.0], "h": 0.25})
    form = model.form.toarray()
    # centre node of the 5x5 grid is interior
    centre = int(np.argmin(np.sum((model.interior_coordinates - 0.5) ** 2, axis=1)))
    row = form[centre]
    assert row[centre] == pytest.approx(4.0)
    entries = np.round(row[np.abs(row) > 1e-12], 12)
    assert sorted(entries.tolist()) == [-1.0] * 4 + [4.0]


def test_neumann_bottom_is_zero():
    model = _interval(0.1)
    assert model.min_sigma_A0 == pytest.approx(0.0, abs=1e-10)


def test_constant_potential_shifts_spectrum():
    model = _interval(0.1, {"a": 2.5})
    assert model.min_sigma_A0 == pytest.approx(2.5, abs=1e-10)
    assert model.essinf_a == 2.5


def test_dirichlet_converges_at_second_order():
    coarse = abs(_interval(1 / 100).dirichlet_min_sigma() - np.pi**2)
    fine = abs(_interval(1 / 200).dirichlet_min_sigma() - np.pi**2)
    assert 3.5 <= coarse / fine <= 4.6
    assert coarse <= 20 * (1 / 100) ** 2


def test_neumann_second_eigenvalue_converges_at_second_order():
    errors = [
        abs(scipy.linalg.eigvalsh(_interval(h).a0_matrix)[1] - np.pi**2)
        for h in (1 / 50, 1 / 100, 1 / 200)
    ]
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.3 <= coarse / fine <= 4.6
    assert errors[0] <= 10 * (1 / 50) ** 2


def test_weyl_matches_neumann_to_dirichlet_map(interval_model):
    # on [0, 1] at λ = -4 the even and odd modes give coth(1)/2 and tanh(1)/2
    values = np.linalg.eigvalsh(weyl(interval_model, -4.0).matrix)
    expected = sorted([1.0 / (2.0 * np.tanh(1.0)), np.tanh(1.0) / 2.0])
    assert values == pytest.approx(expected, rel=1e-2)


def test_gradient_form_annihilates_constants(square_model):
    residual = square_model.gradient_form @ np.ones(square_model.form.shape[0])
    assert np.max(np.abs(residual)) <= 1e-12


def test_ellipticity_constant(square_model):
    # a11 >= 1.2, a22 = 1, a12 = 0.2 at every cell centre
    assert 0.75 < square_model.ellipticity_E < 1.0


def test_ellipticity_violation():
    with pytest.raises(EllipticityViolation):
        build_discrete_model(
            {"dim": 2, "extents": [1.0, 1.0], "h": 0.25}, {"a12": 1.5}
        )


def test_non_tiling_spacing():
    with pytest.raises(BadGrid) as info:
        _interval(0.3)
    assert info.value.pointer == "/grid/h"


def test_neumann_caps_keep_nodes_interior():
    model = build_discrete_model(
        {"dim": 2, "extents": [1.0, 0.5], "h": 0.25, "boundary_sides": ["y0"]}
    )
    assert model.boundary_dim == 5
    assert np.all(model.boundary_coordinates[:, 1] == 0.0)
    assert model.describe()["boundary_sides"] == ["y0"]


def test_triple_rejects_non_hermitian_form():
    with pytest.raises(NotHermitian):
        DiscreteTripleModel(np.array([[2.0, 1.0], [0.0, 2.0]]), 1)


@pytest.mark.parametrize("n_interior", [0, 2])
def test_triple_needs_both_node_sets(n_interior):
    with pytest.raises(BadGrid):
        DiscreteTripleModel(np.eye(2), n_interior)


def test_triple_rejects_bad_mass():
    with pytest.raises(BadGrid):
        DiscreteTripleModel(np.eye(3), 2, mass=np.array([1.0, -1.0]))


def test_random_model_is_reproducible():
    first = random_discrete_model(10, 3, seed=5)
    second = random_discrete_model(10, 3, seed=5)
    assert first.min_sigma_A0 == second.min_sigma_A0
    assert (first.form != second.form).nnz == 0


def test_random_model_complex_values():
    model = random_discrete_model(10, 3, seed=5, complex_values=True)
    assert np.iscomplexobj(model.form.toarray())
    assert model.min_sigma_A0 > 0


def test_schur_singular_on_dirichlet_spectrum(random_model):
    with pytest.raises(SingularSchur):
        weyl(random_model, random_model.dirichlet_min_sigma())


def test_a0_is_below_a1(square_model):
    assert square_model.min_sigma_A0 <= square_model.dirichlet_min_sigma()


def test_describe(square_model):
    summary = square_model.describe()
    assert summary["kind"] == "discrete-elliptic"
    assert summary["dim"] == 2
    assert summary["boundary"] == square_model.boundary_dim == 32
    assert summary["interior"] == 49


def test_sparse_path_on_large_grid():
    model = build_discrete_model(
        {"dim": 2, "extents": [1.0, 1.0], "h": 1 / 48}, {"a": 1.0}
    )
    assert model.state_dim > DENSE_LIMIT
    assert not model.is_dense
    assert model.min_sigma_A0 == pytest.approx(1.0, abs=1e-8)
    # Dirichlet square: 2π² + 1
    assert model.dirichlet_min_sigma() == pytest.approx(2 * np.pi**2 + 1.0, rel=1e-2)
    assert sparse.issparse(model.dirichlet_matrix())
