from unittest.mock import Mock

import numpy as np
import pytest
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from sage_weyl.exceptions import ConfigInvalid, NotHermitian, SingularKreinBlock
from sage_weyl.helpers.enums import CertificateRoute, ParameterKind
from sage_weyl.models.certificate import DecayEnvelope
from sage_weyl.models.parameter import BoundaryParameter
from sage_weyl.services.bounds import asymptotic_slope
from sage_weyl.services.spectral import (
    DENSE_LIMIT,
    SweepRow,
    min_eig,
    resolvent_consistency,
    spectrum_sweep,
    sweep_is_monotone,
)
from sage_weyl.services.triple import weyl
from sage_weyl.utils import seeded_rng


def _scalar(value, dim):
    return BoundaryParameter(ParameterKind.SCALAR, value * np.eye(dim))


def _chain(size):
    off = -np.ones(size - 1)
    return sparse.diags([off, 2.0 * np.ones(size), off], [-1, 0, 1], format="csr")


def test_min_eig_dense():
    assert min_eig(np.diag([3.0, -1.0, 7.0])) == pytest.approx(-1.0)


def test_min_eig_pencil():
    assert min_eig(np.diag([2.0, 6.0]), mass=np.diag([1.0, 2.0])) == pytest.approx(2.0)


def test_min_eig_sparse_shift_invert():
    size = DENSE_LIMIT + 500
    expected = 2.0 - 2.0 * np.cos(np.pi / (size + 1))
    assert min_eig(_chain(size)) == pytest.approx(expected, rel=1e-6)
    assert min_eig(_chain(size), sigma=-0.5) == pytest.approx(expected, rel=1e-6)


def test_min_eig_linear_operator():
    operator = sparse_linalg.aslinearoperator(np.diag(np.arange(50.0) - 3.0))
    assert min_eig(operator) == pytest.approx(-3.0)


def test_min_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        min_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_min_eig_rejects_empty():
    with pytest.raises(ConfigInvalid):
        min_eig(np.zeros((0, 0)))


def test_sweep_rows_are_sorted(interval_model):
    B = _scalar(1.0, 2)
    rows = spectrum_sweep(interval_model, B, [4.0, 0.0, 1.0, 2.0])
    assert [row.omega for row in rows] == [0.0, 1.0, 2.0, 4.0]
    assert rows[0].min_sigma == interval_model.min_sigma_A0
    assert rows[0].certificate.route is CertificateRoute.NEGATIVITY
    assert all(row.certificate.route is CertificateRoute.FORM for row in rows[1:])
    assert sweep_is_monotone(rows)
    assert all(row.slack >= -1e-9 * (1.0 + abs(row.min_sigma)) for row in rows)
    assert set(rows[1].to_row()) == {"omega", "min_sigma", "certificate", "slack"}


def test_sweep_rejects_negative_coupling(interval_model):
    with pytest.raises(ConfigInvalid) as info:
        spectrum_sweep(interval_model, _scalar(1.0, 2), [1.0, -2.0])
    assert info.value.pointer == "/omegas/1"


def test_sweep_does_not_depend_on_jobs(interval_model):
    B = _scalar(1.0, 2)
    omegas = [0.5, 1.0, 2.0, 4.0, 8.0]
    serial = spectrum_sweep(interval_model, B, omegas, jobs=1)
    threaded = spectrum_sweep(interval_model, B, omegas, jobs=4)
    assert [row.to_row() for row in serial] == [row.to_row() for row in threaded]


def test_sweep_on_free_halfline_has_quadratic_slope(free_halfline):
    envelope = DecayEnvelope(
        mu=0.0, C=1.0, alpha=0.5, window=(-1e4, -1.0), min_sigma_A0=0.0
    )
    omegas = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    rows = spectrum_sweep(
        free_halfline, _scalar(1.0, 1), omegas, envelope=envelope, jobs=2
    )
    for row in rows:
        assert row.min_sigma == pytest.approx(-(row.omega**2), rel=1e-9)
        assert row.certificate.route is CertificateRoute.DECAY
        assert row.slack >= -1e-9 * (1.0 + row.omega**2)
    slope = asymptotic_slope(
        [row.omega for row in rows], [row.min_sigma for row in rows]
    )
    assert slope == pytest.approx(2.0, abs=1e-6)


def test_sweep_is_monotone():
    def rows(values):
        return [
            SweepRow(float(index), value, Mock()) for index, value in enumerate(values)
        ]

    assert sweep_is_monotone(rows([0.0, -1.0, -1.0, -4.0]))
    assert sweep_is_monotone(rows([0.0, 1e-12]))
    assert not sweep_is_monotone(rows([0.0, -1.0, -0.5]))


def test_sweep_row_slack():
    certificate = Mock()
    certificate.slack.return_value = 0.25
    row = SweepRow(1.0, -0.75, certificate)
    assert row.slack == 0.25
    certificate.slack.assert_called_once_with(-0.75)


def test_resolvent_consistency(random_model):
    rng = seeded_rng(13)
    matrix = rng.standard_normal((4, 4))
    B = BoundaryParameter(ParameterKind.NONLOCAL, 0.25 * (matrix + matrix.T))
    worst = resolvent_consistency(
        random_model, B, [1.0j, -1.0j, -2.0 + 3.0j], seed=3, n_vectors=4
    )
    assert worst <= 1e-8


def test_resolvent_consistency_is_reproducible(random_model):
    B = _scalar(0.5, 4)
    first = resolvent_consistency(random_model, B, [2.0j], seed=5, n_vectors=3, jobs=1)
    second = resolvent_consistency(random_model, B, [2.0j], seed=5, n_vectors=3, jobs=3)
    assert first == second


def test_resolvent_consistency_honours_block_tolerance(random_model):
    # σ(B M(λ)) sits 1e-8 away from 1
    lam = random_model.min_sigma_A0 - 1.0
    values, vectors = np.linalg.eigh(weyl(random_model, lam).matrix)
    matrix = (1.0 + 1e-8) * np.outer(vectors[:, 0], vectors[:, 0]) / values[0]
    B = BoundaryParameter(ParameterKind.NONLOCAL, matrix)
    assert np.isfinite(resolvent_consistency(random_model, B, [lam], n_vectors=1))
    with pytest.raises(SingularKreinBlock):
        resolvent_consistency(random_model, B, [lam], n_vectors=1, tolerance=1e-6)
