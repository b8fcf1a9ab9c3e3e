import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.optimize import brentq

from sage_weyl.exceptions import SingularSolve, UnsupportedModel
from sage_weyl.helpers.typings import (
    BoundaryMatrix,
    BoundaryVector,
    InteriorVector,
    SpectralParameter,
)
from sage_weyl.models.config import HalfLineSpec, PotentialPiece
from sage_weyl.models.state import ExtendedState
from sage_weyl.services.spectral import min_eig
from sage_weyl.services.triple import NEAR_SPECTRUM, TripleModel

logger = logging.getLogger(__name__)

CHUNK_EXPONENT = 30.0
SCAN_POINTS = 2000
SCAN_GEOMETRIC_POINTS = 400
DEFAULT_TAIL = 30.0

Segment = Tuple[float, float, float]


def _transfer(kappa: complex, t: Union[float, np.ndarray]) -> Tuple[Any, Any]:
    """Returns cosh(κt) and sinh(κt)/κ, the latter continued to t at κ = 0."""
    c = np.cosh(kappa * t)
    if abs(kappa) < 1e-300:
        return c, t + 0j * c
    return c, np.sinh(kappa * t) / kappa


class HalfLineModel(TripleModel):
    """
    The Schrödinger operator -d²/dx² + q on (0, ∞) with Γ₀u = -u'(0), Γ₁u = u(0).

    Purpose
    -------
    q equals q0 on [X, ∞) and q0 plus a piecewise-constant perturbation on
    [0, X]. The decaying solution ψ(·, λ) is exact: e^{-κ₀(x-X)} on the tail
    and transfer matrices over each constant piece, so the Weyl coefficient
    M(λ) = ψ(0)/(-ψ'(0)) carries no discretization error. The Hilbert space is
    sampled on the trapezoid grid x_j = j·dx of [0, R]; resolvents use the exact
    Green's function integrated with the same rule.

    Attributes
    ----------
    spec : HalfLineSpec
        Background, profile and quadrature.
    grid : np.ndarray
        Quadrature nodes.
    weights : np.ndarray
        Trapezoid weights.
    """

    def __init__(self, spec: HalfLineSpec):
        self.spec = spec
        self.q0 = spec.q0
        self.support = spec.support
        radius = spec.radius if spec.radius is not None else self.support + DEFAULT_TAIL
        count = max(int(math.ceil(radius / spec.step)), 2)
        self.step = radius / count
        self.grid = np.arange(count + 1) * self.step
        self.weights = np.full(count + 1, self.step)
        self.weights[[0, -1]] = 0.5 * self.step
        self._segments = self._fill_segments(spec.profile)
        self.potential = self._sample_potential(self.grid)

        values = [self.q0] + [segment[2] for segment in self._segments]
        self.q_min = float(min(values))
        self.spectral_radius = float(max(1.0, *(abs(value) for value in values)))
        self._neumann_eigenvalues = self._roots(
            lambda lam: self._secular(lam, 0.0), 0.0
        )
        self.min_sigma_A0 = (
            self._neumann_eigenvalues[0] if self._neumann_eigenvalues else self.q0
        )
        logger.info(
            "Half-line model: q0=%.6g, %d pieces, %d grid points, min σ(A0)=%.10g",
            self.q0,
            len(spec.profile),
            self.grid.size,
            self.min_sigma_A0,
        )

    def _fill_segments(self, profile: Sequence[PotentialPiece]) -> List[Segment]:
        segments: List[Segment] = []
        position = 0.0
        for piece in profile:
            if piece.left > position:
                segments.append((position, piece.left, self.q0))
            segments.append((piece.left, piece.right, self.q0 + piece.value))
            position = piece.right
        return segments

    def _sample_potential(self, points: np.ndarray) -> np.ndarray:
        values = np.full(points.shape, self.q0, dtype=float)
        for left, right, value in self._segments:
            values[(points >= left) & (points < right)] = value
        return values

    @property
    def state_dim(self) -> int:
        return int(self.grid.size)

    @property
    def boundary_dim(self) -> int:
        return 1

    @property
    def boundary_coordinates(self) -> np.ndarray:
        return np.zeros((1, 1))

    @property
    def decay_anchor(self) -> float:
        if self._neumann_eigenvalues:
            return self.min_sigma_A0 - 1.0
        return self.min_sigma_A0

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "halfline",
            "q0": self.q0,
            "profile": [[left, right, value] for left, right, value in self._segments],
            "step": self.step,
            "radius": float(self.grid[-1]),
            "min_sigma_A0": self.min_sigma_A0,
            "neumann_eigenvalues": list(self._neumann_eigenvalues),
        }

    # -- exact solutions -------------------------------------------------

    def _chunks(self, lam: SpectralParameter) -> List[Tuple[float, float, complex]]:
        """Pieces of [0, X] short enough that |κ|·length stays below CHUNK_EXPONENT."""
        chunks = []
        for left, right, value in self._segments:
            kappa = np.sqrt(complex(value - lam))
            growth = abs(kappa) * (right - left) / CHUNK_EXPONENT
            pieces = max(1, int(math.ceil(growth)))
            edges = np.linspace(left, right, pieces + 1)
            chunks.extend((edges[i], edges[i + 1], kappa) for i in range(pieces))
        return chunks

    def _tail_kappa(self, lam: SpectralParameter) -> complex:
        return complex(np.sqrt(complex(self.q0 - lam)))

    def _boundary_state(self, lam: SpectralParameter) -> Tuple[complex, complex]:
        """(ψ(0), ψ'(0)) up to a positive factor, normalized to unit size."""
        kappa0 = self._tail_kappa(lam)
        y, dy = 1.0 + 0j, -kappa0
        for left, right, kappa in reversed(self._chunks(lam)):
            c, s = _transfer(kappa, left - right)
            y, dy = y * c + dy * s, y * kappa**2 * s + dy * c
            size = max(abs(y), abs(dy))
            y, dy = y / size, dy / size
        size = max(abs(y), abs(dy))
        return y / size, dy / size

    def _decaying(
        self, lam: SpectralParameter
    ) -> Tuple[np.ndarray, np.ndarray, complex, complex]:
        """
        Samples ψ on the grid as values·exp(logs), normalized so that
        ψ(0) = y0 and ψ'(0) = dy0 exactly.
        """
        kappa0 = self._tail_kappa(lam)
        values = np.empty(self.grid.size, dtype=complex)
        logs = np.empty(self.grid.size)
        tail = self.grid >= self.support
        t = self.grid[tail] - self.support
        values[tail] = np.exp(-1j * kappa0.imag * t)
        logs[tail] = -kappa0.real * t
        y, dy, scale = 1.0 + 0j, -kappa0, 0.0
        for left, right, kappa in reversed(self._chunks(lam)):
            inside = (self.grid >= left) & (self.grid < right)
            c, s = _transfer(kappa, self.grid[inside] - right)
            values[inside] = y * c + dy * s
            logs[inside] = scale
            c, s = _transfer(kappa, left - right)
            y, dy = y * c + dy * s, y * kappa**2 * s + dy * c
            size = max(abs(y), abs(dy))
            y, dy, scale = y / size, dy / size, scale + math.log(size)
        return values, logs - scale, y, dy

    def _regular(
        self, lam: SpectralParameter, b: float
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Samples u₁ with u₁(0) = 1, -u₁'(0) = b as values·exp(logs)."""
        kappa0 = self._tail_kappa(lam)
        values = np.empty(self.grid.size, dtype=complex)
        logs = np.empty(self.grid.size)
        y, dy, scale = 1.0 + 0j, complex(-b), 0.0
        for left, right, kappa in self._chunks(lam):
            inside = (self.grid >= left) & (self.grid < right)
            c, s = _transfer(kappa, self.grid[inside] - left)
            values[inside] = y * c + dy * s
            logs[inside] = scale
            c, s = _transfer(kappa, right - left)
            y, dy = y * c + dy * s, y * kappa**2 * s + dy * c
            size = max(abs(y), abs(dy))
            y, dy, scale = y / size, dy / size, scale + math.log(size)
        tail = self.grid >= self.support
        t = self.grid[tail] - self.support
        decay = np.exp(-2.0 * kappa0 * t)
        values[tail] = np.exp(1j * kappa0.imag * t) * (
            y * 0.5 * (1.0 + decay) + dy * 0.5 * (1.0 - decay) / kappa0
        )
        logs[tail] = scale + kappa0.real * t
        return values, logs

    def _green(
        self, lam: SpectralParameter, rhs: np.ndarray, b: float
    ) -> Tuple[np.ndarray, complex]:
        """
        Solves -u'' + (q - λ)u = rhs, -u'(0) = b·u(0), u decaying.

        Both cumulative integrals of the Green's function are accumulated with
        the exponential scales of ψ and u₁ factored out, so nothing overflows
        when κR is large.
        """
        psi, eps, y0, dy0 = self._decaying(lam)
        regular, tau = self._regular(lam, b)
        wronskian = dy0 + b * y0
        if abs(wronskian) <= 1e-14 * max(abs(dy0), abs(b * y0), 1e-300):
            logger.error("λ = %s is an eigenvalue of the Robin problem b=%s.", lam, b)
            raise SingularSolve(f"λ = {lam} is an eigenvalue for b = {b}.")
        growth = regular * np.exp(np.clip(tau + eps, -700.0, 700.0))
        ratio = np.exp(np.diff(eps)).tolist()
        half = 0.5 * self.step
        left_terms = (growth * rhs).tolist()
        right_terms = (psi * rhs).tolist()
        size = self.grid.size

        forward = [0j] * size
        for j in range(1, size):
            forward[j] = ratio[j - 1] * (forward[j - 1] + half * left_terms[j - 1]) + (
                half * left_terms[j]
            )
        backward = [0j] * size
        for j in range(size - 2, -1, -1):
            backward[j] = ratio[j] * (backward[j + 1] + half * right_terms[j + 1]) + (
                half * right_terms[j]
            )
        solution = (
            -(psi * np.asarray(forward) + growth * np.asarray(backward)) / wronskian
        )
        return solution, wronskian

    def _gamma_samples(self, lam: SpectralParameter) -> Tuple[np.ndarray, complex]:
        """Samples of γ(λ)1 = ψ/(-ψ'(0)) and M(λ)."""
        psi, eps, y0, dy0 = self._decaying(lam)
        if abs(dy0) <= 1e-14 * max(abs(y0), 1e-300):
            logger.error("λ = %s is a Neumann eigenvalue.", lam)
            raise SingularSolve(f"λ = {lam} is an eigenvalue of A0.")
        samples = psi * np.exp(np.maximum(eps, -745.0)) / (-dy0)
        return samples, y0 / (-dy0)

    # -- eigenvalues -------------------------------------------------------

    def _secular(self, lam: float, b: Optional[float]) -> float:
        """Real function whose zeros below q0 are the eigenvalues for -u'(0) = b u(0).

        ``b=None`` stands for the Dirichlet condition u(0) = 0.
        """
        y0, dy0 = self._boundary_state(lam)
        if b is None:
            return float(np.real(y0))
        return float(np.real(dy0 + b * y0))

    def _roots(self, func: Callable[[float], float], b_plus: float) -> List[float]:
        top = self.q0 - 1e-12 * (1.0 + abs(self.q0))
        bottom = min(self.q_min, self.q0) - b_plus**2 - 1.0
        points = np.union1d(
            np.linspace(bottom, top, SCAN_POINTS),
            top
            - np.geomspace(
                1e-12 * (1.0 + abs(self.q0)), top - bottom, SCAN_GEOMETRIC_POINTS
            ),
        )
        points = points[(points >= bottom) & (points <= top)]
        values = np.array([func(point) for point in points])
        roots = []
        for index in range(points.size - 1):
            left, right = values[index], values[index + 1]
            if left == 0.0:
                roots.append(float(points[index]))
            elif left * right < 0:
                roots.append(
                    float(
                        brentq(
                            func,
                            points[index],
                            points[index + 1],
                            xtol=1e-15,
                            rtol=4 * np.finfo(float).eps,
                        )
                    )
                )
        return roots

    def robin_eigenvalues(self, b: float) -> List[float]:
        """All eigenvalues below q0 of the Robin realization -u'(0) = b u(0)."""
        return self._roots(lambda lam: self._secular(lam, b), max(b, 0.0))

    def robin_min_sigma(
        self, b_matrix: BoundaryMatrix, shift: Optional[float] = None
    ) -> float:
        b = float(np.real(np.asarray(b_matrix).reshape(-1)[0]))
        roots = self.robin_eigenvalues(b)
        return roots[0] if roots else self.q0

    def dirichlet_min_sigma(self) -> float:
        roots = self._roots(lambda lam: self._secular(lam, None), 0.0)
        return roots[0] if roots else self.q0

    # -- triple interface ---------------------------------------------------

    def ensure_resolvent_point(self, lam: SpectralParameter) -> None:
        tolerance = NEAR_SPECTRUM * self.spectral_radius
        lam = complex(lam)
        if abs(lam.imag) <= tolerance and lam.real >= self.q0 - tolerance:
            logger.error("λ = %s lies on the essential spectrum [q0, ∞).", lam)
            raise SingularSolve(
                f"λ = {lam} lies on the essential spectrum [{self.q0}, ∞)."
            )
        for eigenvalue in self._neumann_eigenvalues:
            if abs(lam - eigenvalue) < tolerance:
                logger.error("λ = %s is within tolerance of σ(A0).", lam)
                raise SingularSolve(f"λ = {lam} is within tolerance of σ(A0).")

    def apply_T(self, state: ExtendedState) -> InteriorVector:
        if state.image is None:
            raise UnsupportedModel("Half-line states must carry their image T u.")
        return state.image

    def trace0(self, state: ExtendedState) -> BoundaryVector:
        if state.flux is None:
            raise UnsupportedModel("Half-line states must carry their flux -u'(0).")
        return state.flux

    def inner(self, f: InteriorVector, g: InteriorVector) -> complex:
        return complex(np.sum(self.weights * np.asarray(f) * np.conj(g)))

    def boundary_inner(self, phi: BoundaryVector, psi: BoundaryVector) -> complex:
        return complex(np.sum(np.asarray(phi) * np.conj(psi)))

    def solve_extended(
        self, lam: SpectralParameter, rhs: InteriorVector, phi: BoundaryVector
    ) -> ExtendedState:
        rhs = np.asarray(rhs)
        phi = np.atleast_1d(np.asarray(phi))
        solution = np.zeros(self.grid.size, dtype=complex)
        if np.any(rhs):
            solution = solution + self._green(lam, rhs, 0.0)[0]
        if np.any(phi):
            samples, _ = self._gamma_samples(lam)
            solution = solution + phi[0] * samples
        return ExtendedState(
            interior=solution,
            boundary=solution[:1],
            flux=phi.astype(complex),
            image=rhs + lam * solution,
        )

    def weyl_matrix(self, lam: SpectralParameter) -> BoundaryMatrix:
        y0, dy0 = self._boundary_state(lam)
        if abs(dy0) <= 1e-14 * abs(y0):
            raise SingularSolve(f"λ = {lam} is an eigenvalue of A0.")
        value = y0 / (-dy0)
        if abs(np.imag(lam)) == 0.0 and np.real(lam) < self.q0:
            value = value.real
        return np.array([[value]])

    def robin_solve(
        self, b_matrix: BoundaryMatrix, lam: SpectralParameter, rhs: InteriorVector
    ) -> InteriorVector:
        b = float(np.real(np.asarray(b_matrix).reshape(-1)[0]))
        rhs = np.asarray(rhs)
        if not np.any(rhs):
            return np.zeros(self.grid.size, dtype=complex)
        return self._green(lam, rhs, b)[0]

    # -- finite-difference realizations --------------------------------------

    def _stiffness(self) -> Tuple[sparse.csr_matrix, np.ndarray]:
        """3-point form on the nodes x_0..x_{N-1}; u vanishes at R."""
        nodes = self.grid.size - 1
        main = np.full(nodes, 2.0 / self.step)
        main[0] = 1.0 / self.step
        off = np.full(nodes - 1, -1.0 / self.step)
        mass = self.weights[:nodes].copy()
        stiffness = sparse.diags([off, main, off], [-1, 0, 1], format="csr")
        stiffness = stiffness + sparse.diags(mass * self.potential[:nodes])
        return sparse.csr_matrix(stiffness), mass

    def robin_matrix(self, b_matrix: BoundaryMatrix) -> sparse.csr_matrix:
        b = float(np.real(np.asarray(b_matrix).reshape(-1)[0]))
        stiffness, mass = self._stiffness()
        stiffness = sparse.lil_matrix(stiffness)
        stiffness[0, 0] -= b
        scaling = sparse.diags(1.0 / np.sqrt(mass))
        return sparse.csr_matrix(scaling @ stiffness.tocsr() @ scaling)

    def dirichlet_matrix(self) -> sparse.csr_matrix:
        stiffness, mass = self._stiffness()
        scaling = sparse.diags(1.0 / np.sqrt(mass[1:]))
        return sparse.csr_matrix(scaling @ stiffness[1:, 1:] @ scaling)

    def robin_matrix_min_sigma(self, b: float) -> float:
        """min σ of the finite-difference Robin matrix; converges to robin_min_sigma."""
        floor = self.q_min - max(b, 0.0) ** 2 - 1.0
        return min_eig(self.robin_matrix(np.array([[b]])), sigma=floor)


def build_halfline_model(
    q0: float = 0.0,
    profile: Sequence[Sequence[float]] = (),
    step: float = 0.002,
    radius: Optional[float] = None,
) -> HalfLineModel:
    """
    Builds the half-line model -d²/dx² + q.

    Parameters
    ----------
    q0 : float
        Background potential on [X, ∞).
    profile : Sequence[Sequence[float]]
        Pieces ``[x_left, x_right, value]``; ``value`` is added to q0 there.
    step : float
        Quadrature step.
    radius : Optional[float]
        Truncation radius R of the quadrature; X + 30 by default.

    Raises
    ------
    BadProfile
        For non-finite, overlapping or reversed pieces.

    Example
    -------
    >>> model = build_halfline_model()
    >>> float(weyl(model, -1.0).matrix[0, 0])
    1.0
    """
    quadrature: Dict[str, float] = {"step": step}
    if radius is not None:
        quadrature["radius"] = radius
    spec = HalfLineSpec.from_dict(
        {
            "q0": q0,
            "profile": [list(piece) for piece in profile],
            "quadrature": quadrature,
        }
    )
    return HalfLineModel(spec)
