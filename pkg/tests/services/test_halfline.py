import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from sage_weyl.exceptions import BadProfile, ConfigInvalid, SingularSolve
from sage_weyl.services.halfline import build_halfline_model
from sage_weyl.services.triple import gamma_field, weyl, weyl_norm

WELL_DEPTH = -3.0


@pytest.fixture(scope="module")
def well():
    """q = -3 on [0, 1] and 0 beyond."""
    return build_halfline_model(profile=[[0.0, 1.0, WELL_DEPTH]])


def _well_weyl(lam):
    inner = np.sqrt(complex(WELL_DEPTH - lam))
    outer = np.sqrt(complex(-lam))
    numerator = np.cosh(inner) + outer / inner * np.sinh(inner)
    denominator = inner * np.sinh(inner) + outer * np.cosh(inner)
    return numerator / denominator


def _shooting_weyl(lam):
    """Integrates the decaying solution from x = 1 back to 0."""
    outer = np.sqrt(-lam)

    def rhs(x, y):
        return [y[1], (WELL_DEPTH - lam) * y[0]]

    solution = solve_ivp(rhs, (1.0, 0.0), [1.0, -outer], rtol=1e-12, atol=1e-14)
    value, slope = solution.y[:, -1]
    return value / -slope


@pytest.mark.parametrize("lam", [-1.0, -4.0, -250.0, -1e6])
def test_free_weyl_closed_form(free_halfline, lam):
    value = weyl(free_halfline, lam).matrix[0, 0]
    assert value == pytest.approx(1.0 / np.sqrt(-lam), rel=1e-12)


@pytest.mark.parametrize("lam", [1.0 + 1.0j, -2.0 - 0.5j, 4.0j])
def test_free_weyl_complex(free_halfline, lam):
    value = weyl(free_halfline, lam).matrix[0, 0]
    assert value == pytest.approx(1.0 / np.sqrt(-lam), rel=1e-12)


@pytest.mark.parametrize("lam", [-5.0, -20.0, -1e3])
def test_well_weyl_against_oracles(well, lam):
    value = weyl(well, lam).matrix[0, 0]
    assert value == pytest.approx(_well_weyl(lam).real, rel=1e-10)
    assert value == pytest.approx(_shooting_weyl(lam), rel=1e-8)


def test_well_weyl_complex(well):
    lam = -1.0 + 2.0j
    assert weyl(well, lam).matrix[0, 0] == pytest.approx(_well_weyl(lam), rel=1e-10)


def test_well_neumann_ground_state(well):
    def secular(lam):
        k = np.sqrt(lam - WELL_DEPTH)
        return k * np.sin(k) - np.sqrt(-lam) * np.cos(k)

    expected = brentq(secular, WELL_DEPTH + 1e-9, -1e-9, xtol=1e-15)
    assert well.min_sigma_A0 == pytest.approx(expected, abs=1e-10)
    assert well.decay_anchor == well.min_sigma_A0 - 1.0


def test_well_dirichlet_ground_state(well):
    def secular(lam):
        k = np.sqrt(lam - WELL_DEPTH)
        return np.cos(k) + np.sqrt(-lam) / k * np.sin(k)

    expected = brentq(secular, WELL_DEPTH + 1e-9, -1e-9, xtol=1e-15)
    assert well.dirichlet_min_sigma() == pytest.approx(expected, abs=1e-10)
    assert well.min_sigma_A0 < well.dirichlet_min_sigma()


def test_free_spectrum(free_halfline):
    assert free_halfline.min_sigma_A0 == 0.0
    assert free_halfline.decay_anchor == 0.0
    assert free_halfline.dirichlet_min_sigma() == 0.0


@pytest.mark.parametrize("lam", [-1.0, 0.0, 2.5, -100.0, 3.0 + 2.0j])
def test_shifted_weyl_closed_form(lam):
    model = build_halfline_model(q0=3.0)
    assert model.min_sigma_A0 == 3.0
    value = weyl(model, lam).matrix[0, 0]
    assert value == pytest.approx(1.0 / np.sqrt(complex(3.0 - lam)), rel=1e-12)


@pytest.mark.parametrize("b", [0.5, 1.0, 3.0, 10.0])
def test_free_robin_ground_state(free_halfline, b):
    min_sigma = free_halfline.robin_min_sigma(np.array([[b]]))
    assert min_sigma == pytest.approx(-(b**2), rel=1e-10)
    assert free_halfline.robin_eigenvalues(b) == pytest.approx([-(b**2)], rel=1e-10)


def test_free_robin_without_bound_state(free_halfline):
    assert free_halfline.robin_eigenvalues(-1.0) == []
    assert free_halfline.robin_min_sigma(np.array([[-1.0]])) == 0.0


def test_finite_difference_robin_converges(free_halfline):
    assert free_halfline.robin_matrix_min_sigma(1.0) == pytest.approx(-1.0, rel=1e-2)


def test_gamma_field_is_exponential(free_halfline):
    state = gamma_field(free_halfline, -1.0, np.array([1.0]))
    assert np.allclose(state.interior, np.exp(-free_halfline.grid), atol=1e-10)
    assert state.flux[0] == 1.0
    assert state.boundary[0] == pytest.approx(1.0)


def test_neumann_resolvent_closed_form(free_halfline):
    # -u'' + u = e^{-2x}, u'(0) = 0
    x = free_halfline.grid
    state = free_halfline.solve_extended(-1.0, np.exp(-2.0 * x), np.zeros(1))
    expected = 2.0 / 3.0 * np.exp(-x) - np.exp(-2.0 * x) / 3.0
    assert np.max(np.abs(state.interior - expected)) <= 1e-5


def test_essential_spectrum_is_rejected(free_halfline):
    with pytest.raises(SingularSolve):
        weyl(free_halfline, 2.0)


def test_neumann_eigenvalue_is_rejected(well):
    with pytest.raises(SingularSolve):
        weyl(well, well.min_sigma_A0)


def test_long_barrier_does_not_overflow():
    model = build_halfline_model(profile=[[0.0, 50.0, 10.0]], radius=60.0)
    assert weyl_norm(model, -1e4) == pytest.approx(1.0 / np.sqrt(1e4 + 10.0), rel=1e-10)


def test_weyl_norm_decays_like_inverse_root(well):
    assert weyl_norm(well, -1e8) == pytest.approx(1e-4, rel=1e-3)


def test_default_radius_and_describe(well):
    summary = well.describe()
    assert summary["radius"] == pytest.approx(31.0)
    assert summary["profile"] == [[0.0, 1.0, WELL_DEPTH]]
    assert len(summary["neumann_eigenvalues"]) == 1


def test_profile_values_are_added_to_background():
    model = build_halfline_model(q0=2.0, profile=[[0.0, 1.0, -1.0]])
    assert model.potential[0] == 1.0
    assert model.potential[-1] == 2.0


@pytest.mark.parametrize(
    "profile", [[[0.0, 1.0, 1.0], [0.5, 2.0, 1.0]], [[1.0, 0.5, 1.0]]]
)
def test_bad_profiles(profile):
    with pytest.raises(BadProfile):
        build_halfline_model(profile=profile)


def test_non_finite_profile():
    with pytest.raises(ConfigInvalid) as info:
        build_halfline_model(profile=[[0.0, float("inf"), 1.0]])
    assert info.value.pointer == "/profile/0/1"
