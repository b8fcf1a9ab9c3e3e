import os
import sys

import pytest

# Add the root directory to the sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from sage_weyl.services.discrete import build_discrete_model, random_discrete_model
from sage_weyl.services.halfline import build_halfline_model


@pytest.fixture(scope="session")
def free_halfline():
    """-d²/dx² on (0, ∞), where M(λ) = 1/√(-λ)."""
    return build_halfline_model()


@pytest.fixture(scope="session")
def interval_model():
    """The Laplacian on [0, 1] with both endpoints in the boundary space."""
    return build_discrete_model({"dim": 1, "extents": [1.0], "h": 0.02})


@pytest.fixture(scope="session")
def square_model():
    """A 2D square with variable elliptic coefficients and a potential."""
    return build_discrete_model(
        {"dim": 2, "extents": [1.0, 1.0], "h": 0.125},
        {
            "a11": {"constant": 1.5, "amplitude": 0.3, "wavenumber": [1, 1]},
            "a22": 1.0,
            "a12": 0.2,
            "a": {"constant": 0.5, "amplitude": 0.5, "wavenumber": [0, 1]},
        },
    )


@pytest.fixture
def random_model():
    return random_discrete_model(n_interior=20, n_boundary=4, seed=11)
