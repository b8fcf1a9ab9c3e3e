import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from sage_weyl.decorators import hermitian_required, resolvent_point_required
from sage_weyl.exceptions import (
    ConfigInvalid,
    NoConvergence,
    SingularKreinBlock,
    SingularityError,
)
from sage_weyl.helpers.enums import SelfAdjointCriterion, Verdict
from sage_weyl.helpers.typings import (
    BoundaryMatrix,
    InteriorVector,
    SpectralParameter,
)
from sage_weyl.models.parameter import BoundaryParameter
from sage_weyl.models.report import HypothesisReport
from sage_weyl.services.triple import TripleModel, gamma_adjoint, gamma_field, weyl
from sage_weyl.utils import hermitian_defect, hermitian_part, is_hermitian

logger = logging.getLogger(__name__)

KREIN_BLOCK_TOLERANCE = 1e-12
HYPOTHESIS_TOLERANCE = 1e-6
LADDER_DECADES = 5

CONDITION_B_SELFADJOINT = "B self-adjoint"
CONDITION_KREIN_BLOCK = "1 in resolvent set of B M(lambda)"
CONDITION_RANGE = "range of Gamma_0 contains the range of B Gamma_1"
CONDITION_BOUNDED = "B bounded on the boundary space"
CONDITION_A1 = "A1 self-adjoint"


@resolvent_point_required
def resolvent_a0(
    model: TripleModel, lam: SpectralParameter, f: InteriorVector
) -> InteriorVector:
    """
    Solves (A₀ - λ)u = f.

    Raises
    ------
    SingularSolve
        If λ is within tolerance of σ(A₀).
    """
    f = np.asarray(f)
    if not np.any(f):
        return np.zeros(model.state_dim, dtype=np.result_type(f, complex(lam)))
    return model.solve_extended(lam, f, np.zeros(model.boundary_dim)).interior


def krein_block(
    model: TripleModel, B: BoundaryParameter, lam: SpectralParameter
) -> np.ndarray:
    """Returns I - B M(λ)."""
    return np.eye(model.boundary_dim) - B.matrix @ weyl(model, lam).matrix


def krein_resolvent(
    model: TripleModel,
    B: BoundaryParameter,
    lam: SpectralParameter,
    f: InteriorVector,
    tolerance: float = KREIN_BLOCK_TOLERANCE,
) -> InteriorVector:
    """
    Evaluates (A_[B] - λ)⁻¹f through the Krein formula.

    Purpose
    -------
    Returns (A₀ - λ)⁻¹f + γ(λ)(I - BM(λ))⁻¹ B γ(λ̄)* f, which only needs
    solves with A₀ and the Weyl function; no matrix of A_[B] is formed.

    Parameters
    ----------
    model : TripleModel
        The boundary triple.
    B : BoundaryParameter
        The Robin parameter.
    lam : SpectralParameter
        A point of ρ(A₀) ∩ ρ(A_[B]).
    f : InteriorVector
        Right-hand side.
    tolerance : float
        Relative threshold for the smallest singular value of I - BM(λ).

    Returns
    -------
    InteriorVector
        The resolvent applied to f.

    Raises
    ------
    SingularSolve
        If λ is within tolerance of σ(A₀).
    SingularKreinBlock
        If I - BM(λ) is numerically singular, which signals λ ∈ σ(A_[B]).
    """
    base = resolvent_a0(model, lam, f)
    if not np.any(B.matrix) or not np.any(f):
        return base
    coupling = B.matrix @ weyl(model, lam).matrix
    block = np.eye(model.boundary_dim) - coupling
    singular_values = scipy.linalg.svdvals(block)
    threshold = tolerance * (1.0 + np.linalg.norm(coupling, 2))
    if singular_values[-1] <= threshold:
        logger.error(
            "Krein block singular at λ = %s (σ_min = %.3e).", lam, singular_values[-1]
        )
        raise SingularKreinBlock(
            f"I - B M(λ) is singular at λ = {lam}; λ is in the spectrum of A_[B]."
        )
    trace = gamma_adjoint(model, np.conj(lam), f)
    density = scipy.linalg.solve(block, B.matrix @ trace)
    correction = gamma_field(model, lam, density).interior
    return base + correction


@hermitian_required
def split_pm(
    B: Union[BoundaryParameter, BoundaryMatrix]
) -> Tuple[BoundaryMatrix, BoundaryMatrix]:
    """
    Splits B = B₊ - B₋ into positive and negative spectral parts.

    Both parts are positive semidefinite and B₊B₋ = 0. Diagonal inputs are
    split entrywise, so their parts are exact.

    Raises
    ------
    NotHermitian
        If B fails the symmetry check.

    Example
    -------
    >>> plus, minus = split_pm(np.diag([2.0, -3.0]))
    >>> np.diag(plus).tolist(), np.diag(minus).tolist()
    ([2.0, 0.0], [0.0, 3.0])
    """
    matrix = np.atleast_2d(np.asarray(getattr(B, "matrix", B)))
    diagonal = np.diag(matrix)
    if not np.count_nonzero(matrix - np.diag(diagonal)):
        real = np.real(diagonal)
        return np.diag(np.maximum(real, 0.0)), np.diag(np.maximum(-real, 0.0))
    values, vectors = np.linalg.eigh(hermitian_part(matrix))
    plus = (vectors * np.maximum(values, 0.0)) @ vectors.conj().T
    minus = (vectors * np.maximum(-values, 0.0)) @ vectors.conj().T
    return hermitian_part(plus), hermitian_part(minus)


def _default_points(model: TripleModel) -> Tuple[complex, ...]:
    offset = 1.0 + model.spectral_radius
    return (1j * offset, -1j * offset, complex(model.min_sigma_A0 - 1.0))


def check_selfadjoint_hypotheses(
    model: TripleModel,
    B: BoundaryParameter,
    lambdas: Optional[Sequence[SpectralParameter]] = None,
    tolerance: float = HYPOTHESIS_TOLERANCE,
) -> HypothesisReport:
    """
    Checks the hypotheses under which A_[B] is self-adjoint.

    Purpose
    -------
    The Krein block condition 1 ∉ σ(BM(λ)) is tested at each supplied λ; by
    default at ±i(1 + spectral radius) and min σ(A₀) - 1. The range and
    boundedness conditions hold for every finite boundary space and are
    reported as vacuous. Self-adjointness of A₁ is checked as Hermiticity of
    the Dirichlet matrix. The report names the criteria whose hypotheses are
    all met: a complex pair in ℂ₊ and ℂ₋, or a real point of ρ(A₀), which then
    also lies in ρ(A_[B]).

    Parameters
    ----------
    model : TripleModel
        The boundary triple.
    B : BoundaryParameter
        The Robin parameter.
    lambdas : Optional[Sequence[SpectralParameter]]
        Points of ρ(A₀).
    tolerance : float
        Distance of σ(BM(λ)) to 1, relative to 1 + ‖BM(λ)‖, at or below which
        the Krein block check fails. It is looser than the 1e-12 threshold at
        which :func:`krein_resolvent` raises, so near-singular blocks are
        reported before they break a solve.

    Returns
    -------
    HypothesisReport
        One verdict per condition and per λ; never raises for a failed check.
    """
    points = tuple(complex(lam) for lam in (lambdas or _default_points(model)))
    report = HypothesisReport()

    defect = hermitian_defect(B.matrix)
    b_ok = defect <= 1e-12
    report.add(
        CONDITION_B_SELFADJOINT,
        Verdict.PASS if b_ok else Verdict.FAIL,
        {"defect": defect},
    )

    passed_points = []
    for lam in points:
        try:
            coupling = B.matrix @ weyl(model, lam).matrix
        except SingularityError as exc:
            report.add(
                CONDITION_KREIN_BLOCK,
                Verdict.FAIL,
                {"lambda": lam, "error": exc.code},
            )
            continue
        distance = float(np.min(np.abs(np.linalg.eigvals(coupling) - 1.0)))
        ok = distance > tolerance * (1.0 + np.linalg.norm(coupling, 2))
        report.add(
            CONDITION_KREIN_BLOCK,
            Verdict.PASS if ok else Verdict.FAIL,
            {"lambda": lam, "distance": distance},
        )
        if ok:
            passed_points.append(lam)

    report.add(
        CONDITION_RANGE,
        Verdict.VACUOUS,
        "ran Γ₀ is the whole finite-dimensional boundary space",
    )
    report.add(CONDITION_BOUNDED, Verdict.VACUOUS, "B is a finite matrix")
    a1_hermitian = is_hermitian(model.dirichlet_matrix())
    report.add(CONDITION_A1, Verdict.PASS if a1_hermitian else Verdict.FAIL)

    if b_ok and a1_hermitian:
        upper = any(lam.imag > 0 for lam in passed_points)
        lower = any(lam.imag < 0 for lam in passed_points)
        if upper and lower:
            report.variants.append(SelfAdjointCriterion.COMPLEX_PAIR)
        real_points = [lam.real for lam in passed_points if lam.imag == 0.0]
        if real_points:
            report.variants.append(SelfAdjointCriterion.REAL_POINT)
            report.real_points_in_resolvent_set.extend(sorted(real_points))
    logger.info(
        "Self-adjointness check: %s, variants %s", report.passed, report.variants
    )
    return report


def check_lower_bound_hypotheses(
    model: TripleModel,
    B: BoundaryParameter,
    lambdas: Optional[Sequence[float]] = None,
) -> HypothesisReport:
    """
    Checks the hypotheses of the decay lower bound for min σ(A_[B]).

    A₀ must be bounded below, ‖M(λ)‖ must decrease towards zero as λ → -∞
    (strictly decreasing norms along a geometric ladder below the anchor), M(λ)
    must be positive semidefinite below min σ(A₀), and B bounded above.
    """
    anchor = model.decay_anchor
    ladder = (
        sorted(float(np.real(lam)) for lam in lambdas)
        if lambdas
        else sorted(anchor - np.logspace(0, LADDER_DECADES, 2 * LADDER_DECADES + 1))
    )
    report = HypothesisReport()
    bounded = bool(np.isfinite(model.min_sigma_A0))
    report.add(
        "A0 bounded from below",
        Verdict.PASS if bounded else Verdict.FAIL,
        {"min_sigma_A0": model.min_sigma_A0},
    )
    values = [weyl(model, lam) for lam in ladder]
    norms = [value.norm() for value in values]
    decreasing = all(low < high for low, high in zip(norms, norms[1:]))
    report.add(
        "norm of M(lambda) decreases to zero",
        Verdict.PASS if decreasing else Verdict.FAIL,
        {"lambdas": ladder, "norms": norms},
    )
    lowest = min(value.hermitian_part_min_eigenvalue() for value in values)
    report.add(
        "M(lambda) nonnegative below min sigma(A0)",
        Verdict.PASS if lowest > -1e-12 * max(norms) else Verdict.FAIL,
        {"min_eigenvalue": lowest},
    )
    report.add(
        "B bounded from above",
        Verdict.PASS if np.isfinite(B.upper_bound) else Verdict.FAIL,
        {"upper_bound": B.upper_bound},
    )
    report.add(CONDITION_RANGE, Verdict.VACUOUS, "finite-dimensional boundary space")
    return report


def _coupling_radius(model: TripleModel, root: np.ndarray, lam: float) -> float:
    matrix = weyl(model, lam).matrix
    sandwich = hermitian_part(root @ matrix @ root)
    return float(np.linalg.eigvalsh(sandwich)[-1])


def neumann_threshold(model: TripleModel, B: BoundaryParameter) -> float:
    """
    Returns the largest μ₀ below min σ(A₀) with ρ(B₊M(μ₀)) ≤ 1.

    λ ↦ ρ(B₊M(λ)) = max σ(B₊^{1/2} M(λ) B₊^{1/2}) increases on (-∞, min σ(A₀))
    from its limit ρ(B₊M(-∞)), so every λ < μ₀ satisfies the Neumann-series
    condition and lies in ρ(A_[B]). The threshold exists only when that limit
    is below 1. On the half-line M(-∞) = 0; on grid models M(-∞) = L_∂∂⁻¹w,
    which caps the admissible size of B₊. For B ⪰ 0 with such a threshold,
    μ₀ = min σ(A_[B]) whenever that eigenvalue lies below min σ(A₀).

    Raises
    ------
    NoConvergence
        If ρ(B₊M(-∞)) ≥ 1, so that no threshold exists, or if the bracket
        search fails.
    """
    plus, _ = split_pm(B)
    if not np.any(plus):
        return model.min_sigma_A0
    values, vectors = np.linalg.eigh(plus)
    root = (vectors * np.sqrt(np.maximum(values, 0.0))) @ vectors.conj().T

    limit = float(
        np.linalg.eigvalsh(hermitian_part(root @ model.weyl_limit() @ root))[-1]
    )
    if limit >= 1.0:
        logger.error("ρ(B₊M(-∞)) = %.6g is not below 1.", limit)
        raise NoConvergence(
            f"ρ(B₊M(λ)) tends to {limit:.6g} ≥ 1 as λ → -∞; "
            "no Neumann-series threshold exists for this B."
        )

    def excess(lam: float) -> float:
        return _coupling_radius(model, root, lam) - 1.0

    top = model.min_sigma_A0 - 1e-6 * max(1.0, model.spectral_radius)
    if excess(top) <= 0:
        return top
    distance = 1.0
    for _ in range(200):
        bottom = top - distance
        if excess(bottom) < 0:
            return float(
                brentq(excess, bottom, top, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            )
        top, distance = bottom, 2.0 * distance
    logger.error("No Neumann-series threshold found below %.6g.", top)
    raise NoConvergence("ρ(B₊M(λ)) stays above 1; no threshold found.")


def spectral_transfer_residual(
    model: TripleModel, B: BoundaryParameter, lam: float
) -> float:
    """
    Distance between the nonzero spectra of M(λ)^{1/2} B M(λ)^{1/2} and B M(λ).

    Parameters
    ----------
    lam : float
        A real point below min σ(A₀), where M(λ) is positive definite.

    Raises
    ------
    ConfigInvalid
        If λ is not real and below min σ(A₀).
    """
    if np.imag(lam) != 0 or np.real(lam) >= model.min_sigma_A0:
        raise ConfigInvalid("λ must be real and below min σ(A0).", "/lambdas")
    matrix = hermitian_part(weyl(model, float(np.real(lam))).matrix)
    values, vectors = np.linalg.eigh(matrix)
    root = (vectors * np.sqrt(np.maximum(values, 0.0))) @ vectors.conj().T
    symmetric = np.linalg.eigvalsh(hermitian_part(root @ B.matrix @ root))
    general = np.linalg.eigvals(B.matrix @ matrix)
    scale = max(1.0, float(np.max(np.abs(symmetric))), float(np.max(np.abs(general))))
    cutoff = 1e-10 * scale
    symmetric = np.sort(symmetric[np.abs(symmetric) > cutoff])
    general = general[np.abs(general) > cutoff]
    if symmetric.size != general.size:
        return float("inf")
    general = general[np.argsort(np.real(general))]
    return float(np.max(np.abs(symmetric - general), initial=0.0) / scale)
