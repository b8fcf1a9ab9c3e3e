from functools import wraps

import numpy as np

from sage_weyl.exceptions import ConfigInvalid, NotHermitian
from sage_weyl.utils import hermitian_defect, is_hermitian


def hermitian_required(func):
    """Rejects a first argument (boundary parameter or matrix) that is not Hermitian."""

    @wraps(func)
    def wrapper(B, *args, **kwargs):
        matrix = np.asarray(getattr(B, "matrix", B))
        if not is_hermitian(matrix):
            defect = hermitian_defect(matrix)
            raise NotHermitian(
                f"Matrix fails the symmetry check (defect {defect:.3e})."
            )
        return func(B, *args, **kwargs)

    return wrapper


def resolvent_point_required(func):
    """Ensures the spectral parameter is finite and in the resolvent set of A0."""

    @wraps(func)
    def wrapper(model, lam, *args, **kwargs):
        if not np.isfinite(lam):
            raise ConfigInvalid(
                "Spectral parameter must be finite.", pointer="/lambdas"
            )
        model.ensure_resolvent_point(lam)
        return func(model, lam, *args, **kwargs)

    return wrapper
