import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from sage_weyl.exceptions import ConfigInvalid, NoConvergence, NotHermitian
from sage_weyl.helpers.typings import MatrixLike, SpectralParameter
from sage_weyl.models.certificate import BoundCertificate, DecayEnvelope
from sage_weyl.models.parameter import BoundaryParameter
from sage_weyl.services.bounds import certify_bound
from sage_weyl.services.krein import KREIN_BLOCK_TOLERANCE, krein_resolvent
from sage_weyl.utils import hermitian_defect, is_hermitian, run_parallel, seeded_rng

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000


def min_eig(
    H: MatrixLike,
    mass: Optional[MatrixLike] = None,
    sigma: Optional[float] = None,
) -> float:
    """
    Returns the smallest eigenvalue of a Hermitian matrix or pencil.

    Purpose
    -------
    Up to ``DENSE_LIMIT`` unknowns the dense symmetric solver is used; larger
    problems go through ARPACK in shift-invert mode around ``sigma``, which must
    lie below the bottom of the spectrum. With ``mass`` the pencil H x = λ mass x
    is solved; a semidefinite mass is allowed on the iterative path, where its
    null space produces only infinite eigenvalues.

    Parameters
    ----------
    H : MatrixLike
        Hermitian matrix, sparse matrix, or a ``LinearOperator`` (then the
        smallest algebraic eigenvalue is found without shift-invert).
    mass : Optional[MatrixLike]
        Hermitian positive semidefinite mass matrix.
    sigma : Optional[float]
        Shift for shift-invert; a Gershgorin bound minus one when omitted.

    Returns
    -------
    float
        The smallest eigenvalue.

    Raises
    ------
    NotHermitian
        If H fails the symmetry check.
    NoConvergence
        If ARPACK does not converge.

    Example
    -------
    >>> min_eig(np.diag([3.0, -1.0, 7.0]))
    -1.0
    """
    if isinstance(H, sparse_linalg.LinearOperator):
        return _iterative_smallest(H)
    if not is_hermitian(H):
        logger.error("min_eig called on a non-Hermitian matrix.")
        raise NotHermitian(
            f"Matrix fails the symmetry check (defect {hermitian_defect(H):.3e})."
        )
    size = H.shape[0]
    if size == 0:
        raise ConfigInvalid("Cannot take the spectrum of an empty matrix.")
    if size <= DENSE_LIMIT and (mass is None or _positive_definite(mass)):
        dense = H.toarray() if sparse.issparse(H) else np.asarray(H)
        dense_mass = None
        if mass is not None:
            dense_mass = mass.toarray() if sparse.issparse(mass) else np.asarray(mass)
        logger.debug("Dense eigensolver on %d unknowns", size)
        values = scipy.linalg.eigh(
            dense, dense_mass, eigvals_only=True, subset_by_index=[0, 0]
        )
        return float(values[0])

    if sigma is None:
        sigma = _gershgorin_floor(H, mass) - 1.0
    logger.debug("Shift-invert eigensolver on %d unknowns, sigma=%.6g", size, sigma)
    try:
        values = sparse_linalg.eigsh(
            sparse.csc_matrix(H),
            k=1,
            M=None if mass is None else sparse.csc_matrix(mass),
            sigma=sigma,
            which="LM",
            v0=np.ones(size),
        )[0]
    except sparse_linalg.ArpackNoConvergence as exc:
        logger.error("ARPACK did not converge near sigma=%.6g.", sigma)
        raise NoConvergence(f"Shift-invert did not converge near {sigma:.6g}.") from exc
    except (sparse_linalg.ArpackError, RuntimeError) as exc:
        logger.error("ARPACK failed: %s", exc)
        raise NoConvergence(f"Shift-invert failed: {exc}") from exc
    return float(np.min(np.real(values)))


def _iterative_smallest(operator: sparse_linalg.LinearOperator) -> float:
    size = operator.shape[0]
    try:
        values = sparse_linalg.eigsh(operator, k=1, which="SA", v0=np.ones(size))[0]
    except sparse_linalg.ArpackNoConvergence as exc:
        logger.error("ARPACK did not converge on a matrix-free operator.")
        raise NoConvergence("Smallest eigenvalue iteration did not converge.") from exc
    return float(values[0])


def _positive_definite(mass: MatrixLike) -> bool:
    dense = mass.toarray() if sparse.issparse(mass) else np.asarray(mass)
    return bool(np.all(np.linalg.eigvalsh(dense) > 0))


def _gershgorin_floor(H: MatrixLike, mass: Optional[MatrixLike]) -> float:
    matrix = sparse.csr_matrix(H)
    diagonal = np.real(matrix.diagonal())
    radius = np.asarray(abs(matrix).sum(axis=1)).ravel() - np.abs(diagonal)
    floor = float(np.min(diagonal - radius))
    if mass is None:
        return floor
    weights = sparse.csr_matrix(mass).diagonal().real
    positive = weights[weights > 0]
    # the pencil floor is at least floor / min mass when floor < 0
    return min(floor, 0.0) / float(np.min(positive)) if positive.size else floor


@dataclass(frozen=True)
class SweepRow:
    """One coupling of an ω-sweep: min σ(A_[ωB]) and its certificate."""

    omega: float
    min_sigma: float
    certificate: BoundCertificate

    @property
    def slack(self) -> float:
        return self.certificate.slack(self.min_sigma)

    def to_row(self) -> Dict[str, Any]:
        return {
            "omega": self.omega,
            "min_sigma": self.min_sigma,
            "certificate": self.certificate.value,
            "slack": self.slack,
        }


def spectrum_sweep(
    model,
    B: BoundaryParameter,
    omegas: Sequence[float],
    envelope: Optional[DecayEnvelope] = None,
    jobs: int = 1,
) -> List[SweepRow]:
    """
    Computes min σ(A_[ωB]) and the matching certificate for each coupling ω.

    Parameters
    ----------
    model : TripleModel
        The boundary triple.
    B : BoundaryParameter
        The unscaled parameter.
    omegas : Sequence[float]
        Non-negative couplings.
    envelope : Optional[DecayEnvelope]
        Decay envelope for the decay route; without it the negativity or form
        route is used.
    jobs : int
        Worker threads; rows do not depend on it.

    Returns
    -------
    List[SweepRow]
        Rows sorted by ω.

    Raises
    ------
    ConfigInvalid
        If a coupling is negative.
    """
    for index, omega in enumerate(omegas):
        if omega < 0 or not np.isfinite(omega):
            raise ConfigInvalid("Couplings must be non-negative.", f"/omegas/{index}")

    def evaluate(omega: float) -> SweepRow:
        scaled = B.scaled(omega)
        min_sigma = (
            model.min_sigma_A0 if omega == 0 else model.robin_min_sigma(scaled.matrix)
        )
        certificate = certify_bound(model, scaled, envelope)
        logger.debug(
            "ω=%.6g: min σ=%.12g, certificate=%.12g",
            omega,
            min_sigma,
            certificate.value,
        )
        return SweepRow(
            omega=float(omega), min_sigma=float(min_sigma), certificate=certificate
        )

    rows = run_parallel(evaluate, sorted(float(omega) for omega in omegas), jobs)
    logger.info("Sweep over %d couplings finished", len(rows))
    return rows


def sweep_is_monotone(rows: Sequence[SweepRow], tol: float = 1e-8) -> bool:
    """True when min σ does not increase along the (sorted) rows."""
    values = [row.min_sigma for row in rows]
    return all(
        later <= earlier + tol * (1.0 + abs(earlier))
        for earlier, later in zip(values, values[1:])
    )


def resolvent_consistency(
    model,
    B: BoundaryParameter,
    lambdas: Sequence[SpectralParameter],
    seed: Optional[int] = 0,
    n_vectors: int = 10,
    jobs: int = 1,
    tolerance: float = KREIN_BLOCK_TOLERANCE,
) -> float:
    """
    Returns the worst relative deviation between the Krein formula and a direct solve.

    For every λ, ``n_vectors`` random right-hand sides f are drawn and
    ‖krein_resolvent(f) - (A_[B] - λ)⁻¹f‖ / ‖(A_[B] - λ)⁻¹f‖ is recorded.

    Raises
    ------
    SingularKreinBlock
        If some λ lies on σ(A_[B]).
    SingularSolve
        If some λ lies on σ(A₀).
    """
    rng = seeded_rng(seed)
    tasks = [
        (lam, model.random_interior_vector(rng, complex_values=True))
        for lam in lambdas
        for _ in range(n_vectors)
    ]

    def deviation(task) -> float:
        lam, f = task
        krein = krein_resolvent(model, B, lam, f, tolerance=tolerance)
        direct = model.robin_solve(B.matrix, lam, f)
        scale = model.norm(direct)
        if scale == 0.0:
            return model.norm(krein)
        return model.norm(krein - direct) / scale

    deviations = run_parallel(deviation, tasks, jobs)
    worst = max(deviations, default=0.0)
    logger.info("Krein consistency over %d solves: %.3e", len(tasks), worst)
    return float(worst)
