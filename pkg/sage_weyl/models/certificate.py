import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from sage_weyl.exceptions import BadSamples
from sage_weyl.helpers.enums import CertificateRoute
from sage_weyl.helpers.typings import DecaySamples

logger = logging.getLogger(__name__)

ENVELOPE_SLACK = 1e-12


@dataclass(frozen=True)
class DecayEnvelope:
    """
    A validated bound ‖M(λ)‖ ≤ C / (mu - λ)^alpha on the window [λ_lo, λ_hi].

    Attributes
    ----------
    mu : float
        Anchor below (or at) min σ(A₀).
    C : float
        Positive envelope constant, inflated so that every sample satisfies the bound.
    alpha : float
        Decay exponent in (0, 1].
    window : Tuple[float, float]
        The λ-range the samples cover, with ``window[1] < mu``.
    samples : DecaySamples
        ``(λ, ‖M(λ)‖)`` pairs sorted by λ.
    alpha_clamped : bool
        True when the fitted slope exceeded 1 and alpha was clamped.
    raw_alpha : float
        The unclamped least-squares exponent.
    min_sigma_A0 : Optional[float]
        min σ(A₀) of the model the samples came from, when known.

    Raises
    ------
    BadSamples
        If alpha or C are out of range, or a sample violates the envelope.
    """

    mu: float
    C: float
    alpha: float
    window: Tuple[float, float]
    samples: DecaySamples = field(default_factory=list, repr=False)
    alpha_clamped: bool = False
    raw_alpha: Optional[float] = None
    min_sigma_A0: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise BadSamples(f"Decay exponent {self.alpha} is outside (0, 1].")
        if not (np.isfinite(self.C) and self.C > 0):
            raise BadSamples(f"Envelope constant {self.C} must be positive and finite.")
        if self.window[1] >= self.mu:
            raise BadSamples("The validated window must lie strictly below mu.")
        violations = [lam for lam, norm in self.samples if norm > self.bound(lam)]
        if violations:
            logger.error("Envelope fails at %d samples.", len(violations))
            raise BadSamples(f"Envelope fails at λ = {violations[0]:.6g}.")

    def bound(self, lam: float) -> float:
        """Returns C / (mu - λ)^alpha."""
        return self.C / (self.mu - lam) ** self.alpha

    def holds(self, lam: float, norm: float) -> bool:
        return norm <= self.bound(lam)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu": self.mu,
            "C": self.C,
            "alpha": self.alpha,
            "raw_alpha": self.raw_alpha,
            "alpha_clamped": self.alpha_clamped,
            "window": list(self.window),
            "min_sigma_A0": self.min_sigma_A0,
            "sample_count": len(self.samples),
        }


@dataclass(frozen=True)
class BoundCertificate:
    """
    A lower bound for min σ(A_[B]) and the argument behind it.

    Attributes
    ----------
    value : float
        The certified lower bound.
    route : CertificateRoute
        Which argument produced ``value``.
    inputs : Dict[str, Any]
        Provenance: the envelope, the negativity witness, or (E, β, essinf a).
    heuristic : bool
        True when the bound relies on the decay envelope outside its validated window.
    """

    value: float
    route: CertificateRoute
    inputs: Dict[str, Any] = field(default_factory=dict)
    heuristic: bool = False

    def slack(self, min_sigma: float) -> float:
        return float(min_sigma - self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "route": str(self.route),
            "inputs": self.inputs,
            "heuristic": self.heuristic,
        }
