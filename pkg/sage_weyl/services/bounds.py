import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.optimize import brentq, minimize_scalar
from scipy.sparse import linalg as sparse_linalg

from sage_weyl.exceptions import (
    BadSamples,
    ConfigInvalid,
    NotNegative,
    UnsupportedModel,
)
from sage_weyl.helpers.enums import CertificateRoute
from sage_weyl.helpers.typings import DecaySamples
from sage_weyl.models.certificate import DecayEnvelope, BoundCertificate
from sage_weyl.models.parameter import BoundaryParameter
from sage_weyl.services.krein import split_pm
from sage_weyl.services.triple import TripleModel, weyl_norm
from sage_weyl.utils import run_parallel, spectral_ladder

logger = logging.getLogger(__name__)

MIN_SAMPLES = 8
MIN_NEGATIVE_POINTS = 5
ENVELOPE_INFLATION = 1e-12
NEGATIVITY_TOLERANCE = 1e-12
MONOTONE_TOLERANCE = 1e-10
TRACE_BRACKET_STEPS = 200


def _validated_samples(samples: DecaySamples, mu: float) -> List[Tuple[float, float]]:
    if len(samples) < MIN_SAMPLES:
        raise BadSamples(
            f"A decay fit needs at least {MIN_SAMPLES} samples, got {len(samples)}."
        )
    ordered = sorted((float(lam), float(norm)) for lam, norm in samples)
    for lam, norm in ordered:
        if not (math.isfinite(norm) and norm > 0):
            raise BadSamples(
                f"Norm samples must be positive, got {norm} at λ = {lam}."
            )
        if not lam < mu:
            raise BadSamples(f"Sample λ = {lam} is not below mu = {mu}.")
    norms = [norm for _, norm in ordered]
    for lower, upper in zip(norms, norms[1:]):
        if lower > upper * (1.0 + MONOTONE_TOLERANCE):
            logger.error("Decay samples are not monotone in λ.")
            raise BadSamples("‖M(λ)‖ must not increase as λ decreases.")
    return ordered


def decay_fit(
    samples: DecaySamples,
    mu: float,
    window: Optional[Tuple[float, float]] = None,
    min_sigma_A0: Optional[float] = None,
) -> DecayEnvelope:
    """
    Fits an envelope ‖M(λ)‖ ≤ C/(mu - λ)^alpha to norm samples.

    Purpose
    -------
    The exponent comes from a least-squares line through
    (log(mu - λ), log‖M(λ)‖). It is clamped into (0, 1]; the envelope flags
    the clamp only when the raw exponent exceeds 1. C is then the smallest
    constant for which every sample satisfies the bound.

    Parameters
    ----------
    samples : DecaySamples
        At least 8 pairs (λ, ‖M(λ)‖) with λ < mu.
    mu : float
        Envelope anchor.
    window : Optional[Tuple[float, float]]
        Validated λ-range; the sample range when omitted.
    min_sigma_A0 : Optional[float]
        Recorded for the negativity route.

    Returns
    -------
    DecayEnvelope
        The fitted and validated envelope.

    Raises
    ------
    BadSamples
        For too few samples, non-positive norms, λ ≥ mu, non-monotone norms,
        or a non-decaying fit.

    Example
    -------
    >>> samples = [(-(2.0**k), 2.0 ** (-k / 2)) for k in range(1, 11)]
    >>> envelope = decay_fit(samples, mu=0.0)
    >>> round(envelope.alpha, 10), round(envelope.C, 10)
    (0.5, 1.0)
    """
    ordered = _validated_samples(samples, mu)
    lambdas = np.array([lam for lam, _ in ordered])
    norms = np.array([norm for _, norm in ordered])
    distances = mu - lambdas
    slope, _ = np.polyfit(np.log(distances), np.log(norms), 1)
    raw_alpha = float(-slope)
    if raw_alpha <= 0:
        logger.error("Fitted decay exponent %.6g is not positive.", raw_alpha)
        raise BadSamples(f"Norms do not decay (fitted exponent {raw_alpha:.6g}).")
    clamped = raw_alpha > 1.0 + 1e-9
    if clamped:
        logger.warning("Decay exponent %.6g exceeds 1; clamped to 1.", raw_alpha)
    alpha = 1.0 if raw_alpha >= 1.0 - 1e-12 else raw_alpha
    C = float(np.max(norms * distances**alpha)) * (1.0 + ENVELOPE_INFLATION)
    envelope = DecayEnvelope(
        mu=float(mu),
        C=C,
        alpha=alpha,
        window=window or (float(lambdas[0]), float(lambdas[-1])),
        samples=list(ordered),
        alpha_clamped=clamped,
        raw_alpha=raw_alpha,
        min_sigma_A0=min_sigma_A0,
    )
    logger.debug("Decay fit: mu=%.6g C=%.10g alpha=%.10g", mu, C, alpha)
    return envelope


def certify_decay(
    model: TripleModel,
    window: Tuple[float, float],
    mu: Optional[float] = None,
    samples: int = 24,
    jobs: int = 1,
) -> DecayEnvelope:
    """
    Samples ‖M(λ)‖ on a geometric ladder in the window and fits an envelope.

    After a first fit, the ratio ‖M(λ)‖(mu - λ)^alpha is maximized between
    neighbouring samples around each local maximum and the maximizers are
    added before the final fit, so the constant also covers the gaps.

    Raises
    ------
    ConfigInvalid
        If the window does not lie below mu.
    BadSamples
        If the fit fails.
    """
    mu = model.decay_anchor if mu is None else float(mu)
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi < mu:
        raise ConfigInvalid(
            f"Fit window [{lo}, {hi}] must lie below mu = {mu}.", "/fit_window"
        )
    ladder = spectral_ladder(mu, lo, hi, samples)
    norms = run_parallel(lambda lam: weyl_norm(model, float(lam)), list(ladder), jobs)
    pairs = sorted(zip(ladder.tolist(), norms))
    first = decay_fit(pairs, mu, (lo, hi), model.min_sigma_A0)

    ratios = [norm * (mu - lam) ** first.alpha for lam, norm in pairs]
    brackets = []
    for index, ratio in enumerate(ratios):
        left = ratios[index - 1] if index > 0 else -np.inf
        right = ratios[index + 1] if index + 1 < len(ratios) else -np.inf
        if ratio >= left and ratio >= right:
            brackets.append(
                (pairs[max(index - 1, 0)][0], pairs[min(index + 1, len(pairs) - 1)][0])
            )

    def refine(bracket: Tuple[float, float]) -> Tuple[float, float]:
        result = minimize_scalar(
            lambda lam: -weyl_norm(model, lam) * (mu - lam) ** first.alpha,
            bounds=bracket,
            method="bounded",
            options={"xatol": 1e-10 * max(1.0, abs(bracket[0]))},
        )
        lam = float(result.x)
        return lam, weyl_norm(model, lam)

    extra = run_parallel(refine, brackets, jobs)
    envelope = decay_fit(
        sorted(set(pairs) | set(extra)), mu, (lo, hi), model.min_sigma_A0
    )
    logger.info(
        "Certified envelope on [%.6g, %.6g]: C=%.10g alpha=%.10g (%d samples)",
        lo,
        hi,
        envelope.C,
        envelope.alpha,
        len(envelope.samples),
    )
    return envelope


def _plus_norm(B: BoundaryParameter) -> float:
    plus, _ = split_pm(B)
    return float(np.linalg.norm(plus, 2)) if plus.size else 0.0


def negative_B_guarantee(
    model: TripleModel, B: BoundaryParameter, tolerance: float = NEGATIVITY_TOLERANCE
) -> BoundCertificate:
    """
    Certifies min σ(A_[B]) ≥ min σ(A₀) for B ⪯ 0.

    Raises
    ------
    NotNegative
        If max σ(B) exceeds ``tolerance``.
    """
    top = B.max_eigenvalue()
    if top > tolerance:
        logger.error("B has a positive eigenvalue %.3e.", top)
        raise NotNegative(f"B has a positive eigenvalue {top:.6g}.")
    return BoundCertificate(
        value=float(model.min_sigma_A0),
        route=CertificateRoute.NEGATIVITY,
        inputs={"max_eigenvalue_B": top, "min_sigma_A0": model.min_sigma_A0},
    )


def lower_bound_decay(
    envelope: DecayEnvelope,
    B: BoundaryParameter,
    model: Optional[TripleModel] = None,
) -> BoundCertificate:
    """
    Returns the decay certificate min σ(A_[B]) ≥ mu - (C‖B₊‖)^{1/alpha}.

    When B₊ = 0 the negativity route is taken and the value is min σ(A₀),
    from ``model`` or the envelope. The certificate is marked heuristic when
    its value lies outside the validated window.

    Example
    -------
    >>> envelope = DecayEnvelope(mu=0.0, C=1.0, alpha=0.5, window=(-100.0, -1.0))
    >>> B = BoundaryParameter(ParameterKind.SCALAR, np.array([[3.0]]))
    >>> lower_bound_decay(envelope, B).value
    -9.0
    """
    plus_norm = _plus_norm(B)
    if plus_norm == 0.0:
        if model is not None:
            return negative_B_guarantee(model, B)
        anchor = (
            envelope.mu if envelope.min_sigma_A0 is None else envelope.min_sigma_A0
        )
        return BoundCertificate(
            value=float(anchor),
            route=CertificateRoute.NEGATIVITY,
            inputs={"max_eigenvalue_B": B.max_eigenvalue(), "min_sigma_A0": anchor},
        )
    value = envelope.mu - (envelope.C * plus_norm) ** (1.0 / envelope.alpha)
    lo, hi = envelope.window
    return BoundCertificate(
        value=float(value),
        route=CertificateRoute.DECAY,
        inputs={
            "mu": envelope.mu,
            "C": envelope.C,
            "alpha": envelope.alpha,
            "plus_norm": plus_norm,
            "window": [lo, hi],
        },
        heuristic=not lo <= value <= hi,
    )


def _require_elliptic(model: Any) -> None:
    for attribute in ("gradient_form", "ellipticity_E", "essinf_a"):
        if not hasattr(model, attribute):
            raise UnsupportedModel(
                "The form route needs a grid model with a gradient form."
            )


def trace_constant(model, eps: float) -> float:
    """
    The smallest β with ‖u|_∂‖² ≤ ε‖∇u‖² + β‖u‖² for all mesh functions.

    Purpose
    -------
    With P = εG - diag(0, w·I) on all nodes, β is the largest eigenvalue of
    -P with respect to the interior mass after eliminating the boundary nodes;
    when εG_∂∂ - w·I is not positive definite the boundary values alone violate
    the inequality and β is infinite. β is clamped at 0.

    Parameters
    ----------
    model : DiscreteEllipticModel
        A grid model.
    eps : float
        Positive weight of the gradient term.

    Returns
    -------
    float
        β(ε), possibly ``inf``.

    Notes
    -----
    Constants lie in the kernel of G, so on a bounded domain β(ε) decreases to
    |∂Ω|/|Ω| rather than to 0 as ε grows. Large grids eliminate the interior
    instead and locate β as the root of λ_min(S(β)), see
    :func:`_boundary_trace_constant`.
    """
    _require_elliptic(model)
    if not eps > 0:
        raise ConfigInvalid("The trace weight eps must be positive.")
    n = model.state_dim
    gradient = sparse.csr_matrix(model.gradient_form)
    boundary_block = eps * gradient[n:, n:].toarray()
    boundary_block -= model.weight * np.eye(model.boundary_dim)
    if np.linalg.eigvalsh(boundary_block)[0] <= 0:
        logger.warning(
            "Trace constant is infinite at eps=%.3g (boundary block indefinite).", eps
        )
        return float("inf")
    if not getattr(model, "is_dense", True):
        return _boundary_trace_constant(model, eps, boundary_block)
    pencil = eps * gradient.toarray()
    reduced = pencil[:n, :n] - pencil[:n, n:] @ scipy.linalg.solve(
        boundary_block, pencil[n:, :n], assume_a="pos"
    )
    scaling = 1.0 / np.sqrt(model.mass)
    reduced = 0.5 * (reduced + reduced.T) * np.outer(scaling, scaling)
    lowest = scipy.linalg.eigh(reduced, eigvals_only=True, subset_by_index=[0, 0])[0]
    return float(max(0.0, -lowest))


def _boundary_trace_constant(model, eps: float, boundary_block: np.ndarray) -> float:
    """
    β(ε) on large grids through the boundary Schur complement.

    S(β) = P_∂∂ - P_∂I (εG_II + β·m)⁻¹ P_I∂ is non-decreasing in β, and
    P + β·diag(m, 0) is positive semidefinite exactly when S(β) is. β is the
    root of the lowest eigenvalue of S, bracketed by doubling.
    """
    n = model.state_dim
    gradient = sparse.csr_matrix(model.gradient_form)
    interior_block = (eps * gradient[:n, :n]).tocsc()
    coupling = (eps * gradient[:n, n:]).toarray()
    mass = sparse.diags(model.mass, format="csc")

    def lowest(beta: float) -> float:
        factor = sparse_linalg.splu((interior_block + beta * mass).tocsc())
        schur = boundary_block - coupling.conj().T @ factor.solve(coupling)
        return float(np.linalg.eigvalsh(0.5 * (schur + schur.conj().T))[0])

    if lowest(0.0) >= 0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(TRACE_BRACKET_STEPS):
        if lowest(hi) >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BadSamples(f"Could not bracket the trace constant at eps={eps:.3g}.")
    return float(brentq(lowest, lo, hi, xtol=1e-12 * hi, rtol=1e-12))


def form_lower_bound(model, B: BoundaryParameter) -> BoundCertificate:
    """
    Certifies min σ(A_[B]) ≥ essinf a - β(E/‖B₊‖)·‖B₊‖.

    Delegates to :func:`negative_B_guarantee` when B₊ = 0.
    """
    plus_norm = _plus_norm(B)
    if plus_norm == 0.0:
        return negative_B_guarantee(model, B)
    _require_elliptic(model)
    eps = model.ellipticity_E / plus_norm
    beta = trace_constant(model, eps)
    value = model.essinf_a - beta * plus_norm
    return BoundCertificate(
        value=float(value),
        route=CertificateRoute.FORM,
        inputs={
            "E": model.ellipticity_E,
            "beta": beta,
            "eps": eps,
            "essinf_a": model.essinf_a,
            "plus_norm": plus_norm,
        },
    )


def certify_bound(
    model: TripleModel,
    B: BoundaryParameter,
    envelope: Optional[DecayEnvelope] = None,
) -> BoundCertificate:
    """Chooses the negativity, decay or form route, in that order."""
    if _plus_norm(B) == 0.0:
        return negative_B_guarantee(model, B)
    if envelope is not None:
        return lower_bound_decay(envelope, B, model)
    return form_lower_bound(model, B)


def asymptotic_slope(omegas: Sequence[float], minsigmas: Sequence[float]) -> float:
    """
    Log-log slope of |min σ(A_[ωB])| against ω over the largest couplings.

    Only points with min σ < 0 enter; the slope is fitted through the upper
    half of them.

    Raises
    ------
    BadSamples
        With fewer than five negative points.
    """
    pairs = sorted(
        (float(omega), float(value))
        for omega, value in zip(omegas, minsigmas)
        if omega > 0 and value < 0
    )
    if len(pairs) < MIN_NEGATIVE_POINTS:
        raise BadSamples(
            f"Need at least {MIN_NEGATIVE_POINTS} couplings with negative min σ, "
            f"got {len(pairs)}."
        )
    top = pairs[len(pairs) // 2 :]
    x = np.log([omega for omega, _ in top])
    y = np.log([-value for _, value in top])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def small_coupling_table(
    model: TripleModel,
    B: BoundaryParameter,
    omegas: Sequence[float],
    envelope: DecayEnvelope,
    jobs: int = 1,
) -> List[Dict[str, Any]]:
    """
    Rows (ω, F(ω), F⁺(ω), (C‖B₊‖ω)^{1/alpha}) for small couplings.

    F(ω) = min σ(A₀) - min σ(A_[ωB]) and F⁺ its positive part; ``holds``
    records F⁺(ω) ≤ (C‖B₊‖ω)^{1/alpha}.
    """
    plus_norm = _plus_norm(B)

    def row(omega: float) -> Dict[str, Any]:
        shift = model.min_sigma_A0 - model.robin_min_sigma(B.scaled(omega).matrix)
        bound = (envelope.C * plus_norm * omega) ** (1.0 / envelope.alpha)
        f_plus = max(0.0, shift)
        return {
            "omega": omega,
            "F": shift,
            "F_plus": f_plus,
            "bound": bound,
            "holds": f_plus <= bound * (1.0 + 1e-10) + 1e-12,
        }

    return run_parallel(row, sorted(float(omega) for omega in omegas), jobs)


def dirichlet_min_sigma(model: TripleModel) -> float:
    """min σ(A₁), an upper anchor for min σ(A_[ωB]) over all couplings."""
    return model.dirichlet_min_sigma()
