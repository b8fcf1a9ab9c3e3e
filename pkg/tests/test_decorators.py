from unittest.mock import Mock

import numpy as np
import pytest

from sage_weyl.decorators import hermitian_required, resolvent_point_required
from sage_weyl.exceptions import ConfigInvalid, NotHermitian, SingularSolve


@hermitian_required
def trace_of(matrix):
    return float(np.trace(matrix).real)


@resolvent_point_required
def evaluate(model, lam):
    return lam


def test_hermitian_required_accepts_hermitian():
    assert trace_of(np.array([[1.0, 2.0], [2.0, 3.0]])) == 4.0


def test_hermitian_required_rejects_asymmetric():
    with pytest.raises(NotHermitian):
        trace_of(np.array([[1.0, 2.0], [0.0, 3.0]]))


def test_hermitian_required_reads_matrix_attribute():
    parameter = Mock(matrix=np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(NotHermitian):
        trace_of(parameter)


def test_resolvent_point_required_checks_model():
    model = Mock()
    assert evaluate(model, -1.0) == -1.0
    model.ensure_resolvent_point.assert_called_once_with(-1.0)


def test_resolvent_point_required_propagates_singular_solve():
    model = Mock()
    model.ensure_resolvent_point.side_effect = SingularSolve()
    with pytest.raises(SingularSolve):
        evaluate(model, 0.0)


def test_resolvent_point_required_rejects_non_finite():
    model = Mock()
    with pytest.raises(ConfigInvalid):
        evaluate(model, float("nan"))
    model.ensure_resolvent_point.assert_not_called()
