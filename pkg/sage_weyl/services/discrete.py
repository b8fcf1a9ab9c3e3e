import logging
import warnings
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.linalg import LinAlgWarning
from scipy.sparse import linalg as sparse_linalg

from sage_weyl.exceptions import (
    BadGrid,
    EllipticityViolation,
    NotHermitian,
    SingularElimination,
    SingularSchur,
    SingularSolve,
)
from sage_weyl.helpers.enums import BoundarySide
from sage_weyl.helpers.typings import (
    BoundaryMatrix,
    BoundaryVector,
    InteriorVector,
    MatrixLike,
    SpectralParameter,
)
from sage_weyl.models.config import CoefficientSpec, GridSpec
from sage_weyl.models.state import ExtendedState
from sage_weyl.services.spectral import DENSE_LIMIT, min_eig
from sage_weyl.services.triple import NEAR_SPECTRUM, TripleModel
from sage_weyl.utils import hermitian_defect, hermitian_part, is_hermitian, seeded_rng

logger = logging.getLogger(__name__)

SINGULAR_TOLERANCE = 1e-12


class DiscreteTripleModel(TripleModel):
    """
    The boundary triple of a Hermitian form matrix L on interior ∪ boundary nodes.

    Purpose
    -------
    H is the space of interior node values with the lumped mass inner product
    ⟨f, g⟩ = Σ m_i f_i ḡ_i, and 𝒢 the boundary node values weighted by w.
    With the first ``n_interior`` rows of L interior:

    * T u = m⁻¹ (L u)|_I
    * Γ₁ u = u|_∂
    * Γ₀ u = w⁻¹ (L u)|_∂

    The Green identity is then exact up to round-off. The Weyl function is
    M(λ) = Σ(λ)⁻¹ w, with Σ(λ) = L_∂∂ - L_∂I (L_II - λ m)⁻¹ L_I∂.

    Parameters
    ----------
    form : MatrixLike
        Hermitian matrix L, interior rows first.
    n_interior : int
        Number of interior nodes.
    mass : Optional[np.ndarray]
        Positive interior masses; ones when omitted.
    weight : float
        Boundary weight w > 0.
    interior_coordinates, boundary_coordinates : Optional[np.ndarray]
        Node positions; index positions when omitted.
    spectral_floor : Optional[float]
        A known lower bound for σ(A₀), used as eigensolver shift on large models.

    Raises
    ------
    NotHermitian
        If L fails the symmetry check.
    BadGrid
        If the partition leaves no interior or no boundary node.
    SingularElimination
        If L_∂∂ is singular, so that A₀ is not defined.
    """

    def __init__(
        self,
        form: MatrixLike,
        n_interior: int,
        mass: Optional[np.ndarray] = None,
        weight: float = 1.0,
        interior_coordinates: Optional[np.ndarray] = None,
        boundary_coordinates: Optional[np.ndarray] = None,
        spectral_floor: Optional[float] = None,
    ):
        if not is_hermitian(form):
            logger.error("Form matrix is not Hermitian.")
            defect = hermitian_defect(form)
            raise NotHermitian(
                f"Form matrix fails the symmetry check (defect {defect:.3e})."
            )
        n_total = form.shape[0]
        if not 0 < n_interior < n_total:
            raise BadGrid("Need at least one interior and one boundary node.", "/grid")
        self._n_interior = n_interior
        self._n_boundary = n_total - n_interior
        self._form = sparse.csr_matrix(form)
        self._mass = (
            np.ones(n_interior) if mass is None else np.asarray(mass, dtype=float)
        )
        if self._mass.shape != (n_interior,) or not np.all(self._mass > 0):
            raise BadGrid("Interior masses must be positive.", "/grid")
        if not weight > 0:
            raise BadGrid("Boundary weight must be positive.", "/grid")
        self.weight = float(weight)
        self._sqrt_mass = np.sqrt(self._mass)
        self._interior_coordinates = (
            np.arange(n_interior, dtype=float)[:, None]
            if interior_coordinates is None
            else np.atleast_2d(np.asarray(interior_coordinates, dtype=float))
        )
        self._boundary_coordinates = (
            np.arange(self._n_boundary, dtype=float)[:, None]
            if boundary_coordinates is None
            else np.atleast_2d(np.asarray(boundary_coordinates, dtype=float))
        )
        interior = slice(0, n_interior)
        boundary = slice(n_interior, n_total)
        self._L_ii = self._form[interior, interior].tocsc()
        self._L_ib = self._form[interior, boundary].tocsc()
        self._L_bi = self._form[boundary, interior].tocsc()
        self._L_bb = self._form[boundary, boundary].tocsc()
        self.is_dense = n_interior <= DENSE_LIMIT

        if self.is_dense:
            self.a0_matrix = self.robin_matrix(np.zeros((self._n_boundary,) * 2))
            self._a0_spectrum = scipy.linalg.eigvalsh(self.a0_matrix)
            self._a1_spectrum = scipy.linalg.eigvalsh(self.dirichlet_matrix())
            self.min_sigma_A0 = float(self._a0_spectrum[0])
            self.spectral_radius = float(
                max(
                    np.max(np.abs(self._a0_spectrum)),
                    np.max(np.abs(self._a1_spectrum)),
                )
            )
        else:
            self._a0_spectrum = None
            self._a1_spectrum = None
            self.spectral_radius = self._gershgorin_radius()
            self._floor = (
                -self.spectral_radius
                if spectral_floor is None
                else float(spectral_floor)
            )
            self.min_sigma_A0 = self.robin_min_sigma(
                np.zeros((self._n_boundary,) * 2), shift=self._floor - 1.0
            )
        logger.info(
            "Discrete triple: %d interior, %d boundary nodes, min σ(A0) = %.10g",
            self._n_interior,
            self._n_boundary,
            self.min_sigma_A0,
        )

    @property
    def state_dim(self) -> int:
        return self._n_interior

    @property
    def boundary_dim(self) -> int:
        return self._n_boundary

    @property
    def mass(self) -> np.ndarray:
        return self._mass

    @property
    def form(self) -> sparse.csr_matrix:
        return self._form

    @property
    def boundary_coordinates(self) -> np.ndarray:
        return self._boundary_coordinates

    @property
    def interior_coordinates(self) -> np.ndarray:
        return self._interior_coordinates

    @property
    def decay_anchor(self) -> float:
        # min σ(A₀) is an eigenvalue and a pole of M; the envelope needs mu below it.
        return self.min_sigma_A0 - 1.0

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": "discrete",
            "interior": self._n_interior,
            "boundary": self._n_boundary,
            "weight": self.weight,
            "min_sigma_A0": self.min_sigma_A0,
        }

    def _full(self, state: ExtendedState) -> np.ndarray:
        return np.concatenate([state.interior, state.boundary])

    def apply_T(self, state: ExtendedState) -> InteriorVector:
        image = self._form @ self._full(state)
        return image[: self._n_interior] / self._mass

    def trace0(self, state: ExtendedState) -> BoundaryVector:
        image = self._form @ self._full(state)
        return image[self._n_interior :] / self.weight

    def inner(self, f: InteriorVector, g: InteriorVector) -> complex:
        return complex(np.sum(self._mass * np.asarray(f) * np.conj(g)))

    def boundary_inner(self, phi: BoundaryVector, psi: BoundaryVector) -> complex:
        return complex(self.weight * np.sum(np.asarray(phi) * np.conj(psi)))

    def random_state(
        self, rng: np.random.Generator, complex_values: bool = True
    ) -> ExtendedState:
        return ExtendedState(
            interior=self.random_interior_vector(rng, complex_values),
            boundary=self.random_boundary_vector(rng, complex_values),
        )

    def _near(self, spectrum: Optional[np.ndarray], lam: SpectralParameter) -> bool:
        if spectrum is None:
            return False
        distance = np.min(np.abs(spectrum - lam))
        return bool(distance < NEAR_SPECTRUM * max(self.spectral_radius, 1.0))

    def ensure_resolvent_point(self, lam: SpectralParameter) -> None:
        if self._near(self._a0_spectrum, lam):
            logger.error("λ = %s is within tolerance of σ(A0).", lam)
            raise SingularSolve(f"λ = {lam} is within tolerance of σ(A0).")

    def shifted_system(
        self, lam: SpectralParameter, b_matrix: Optional[BoundaryMatrix] = None
    ) -> MatrixLike:
        """L - λ diag(m, 0) - diag(0, w B) on all nodes."""
        shift = np.concatenate([self._mass, np.zeros(self._n_boundary)])
        system = self._form - lam * sparse.diags(shift)
        if b_matrix is not None and np.any(b_matrix):
            boundary_term = sparse.block_diag(
                [
                    sparse.csr_matrix((self._n_interior, self._n_interior)),
                    sparse.csr_matrix(self.weight * np.asarray(b_matrix)),
                ]
            )
            system = system - boundary_term
        return system

    def _solve(
        self, system: MatrixLike, rhs: np.ndarray, error=SingularSolve
    ) -> np.ndarray:
        if self.is_dense:
            with warnings.catch_warnings():
                warnings.simplefilter("error", LinAlgWarning)
                try:
                    return scipy.linalg.solve(system.toarray(), rhs)
                except (LinAlgWarning, scipy.linalg.LinAlgError) as exc:
                    logger.error("Dense solve failed: %s", exc)
                    raise error(
                        f"Linear system is numerically singular: {exc}"
                    ) from exc
        try:
            return sparse_linalg.splu(sparse.csc_matrix(system)).solve(rhs)
        except RuntimeError as exc:
            logger.error("Sparse factorization failed: %s", exc)
            raise error(f"Linear system is singular: {exc}") from exc

    def solve_extended(
        self, lam: SpectralParameter, rhs: InteriorVector, phi: BoundaryVector
    ) -> ExtendedState:
        rhs = np.asarray(rhs)
        phi = np.asarray(phi)
        full_rhs = np.concatenate([self._mass * rhs, self.weight * phi])
        if not np.any(full_rhs):
            return ExtendedState(
                interior=np.zeros(self._n_interior), boundary=np.zeros(self._n_boundary)
            )
        solution = self._solve(self.shifted_system(lam), full_rhs)
        return ExtendedState(
            interior=solution[: self._n_interior], boundary=solution[self._n_interior :]
        )

    def schur_complement(self, lam: SpectralParameter) -> BoundaryMatrix:
        """
        Returns Σ(λ) = L_∂∂ - L_∂I (L_II - λ m)⁻¹ L_I∂.

        Raises
        ------
        SingularSchur
            If λ lies on the Dirichlet spectrum σ(A₁).
        """
        if self._near(self._a1_spectrum, lam):
            logger.error("λ = %s is within tolerance of σ(A1).", lam)
            raise SingularSchur(f"λ = {lam} is within tolerance of σ(A1).")
        block = self._L_ii - lam * sparse.diags(self._mass)
        coupling = self._L_ib.toarray()
        if self.is_dense:
            with warnings.catch_warnings():
                warnings.simplefilter("error", LinAlgWarning)
                try:
                    reduced = scipy.linalg.solve(block.toarray(), coupling)
                except (LinAlgWarning, scipy.linalg.LinAlgError) as exc:
                    raise SingularSchur(f"Interior block is singular: {exc}") from exc
        else:
            try:
                reduced = sparse_linalg.splu(sparse.csc_matrix(block)).solve(coupling)
            except RuntimeError as exc:
                raise SingularSchur(f"Interior block is singular: {exc}") from exc
        return self._L_bb.toarray() - self._L_bi @ reduced

    def weyl_matrix(self, lam: SpectralParameter) -> BoundaryMatrix:
        schur = self.schur_complement(lam)
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            try:
                return scipy.linalg.solve(schur, self.weight * np.eye(self._n_boundary))
            except (LinAlgWarning, scipy.linalg.LinAlgError) as exc:
                logger.error("Schur complement is singular at λ = %s.", lam)
                raise SingularSolve(f"Σ(λ) is singular at λ = {lam}.") from exc

    def weyl_limit(self) -> BoundaryMatrix:
        # Σ(λ) → L_∂∂ as λ → -∞, so M levels off at L_∂∂⁻¹ w instead of vanishing
        return scipy.linalg.solve(
            self._L_bb.toarray(), self.weight * np.eye(self._n_boundary)
        )

    def _elimination_block(self, b_matrix: BoundaryMatrix) -> np.ndarray:
        block = self._L_bb.toarray() - self.weight * np.asarray(b_matrix)
        singular_values = scipy.linalg.svdvals(block)
        if singular_values[-1] <= SINGULAR_TOLERANCE * max(singular_values[0], 1.0):
            logger.error("Boundary elimination block is singular.")
            raise SingularElimination(
                "Γ₀u = BΓ₁u does not determine the boundary values uniquely."
            )
        return block

    def robin_matrix(self, b_matrix: BoundaryMatrix) -> MatrixLike:
        """
        A_[B] on interior unknowns, boundary values eliminated through
        (L_∂∂ - wB) u_∂ = -L_∂I u_I.
        """
        block = self._elimination_block(b_matrix)
        if self.is_dense:
            reduced = self._L_ii.toarray() - self._L_ib @ scipy.linalg.solve(
                block, self._L_bi.toarray()
            )
            scaled = reduced / np.outer(self._sqrt_mass, self._sqrt_mass)
            return hermitian_part(scaled)
        lu = sparse_linalg.splu(sparse.csc_matrix(block))
        dtype = np.result_type(self._form.dtype, np.asarray(b_matrix).dtype)

        def matvec(vector: np.ndarray) -> np.ndarray:
            vector = np.ravel(vector) / self._sqrt_mass
            coupled = np.asarray(self._L_bi @ vector, dtype=dtype)
            correction = self._L_ib @ lu.solve(coupled)
            return (self._L_ii @ vector - correction) / self._sqrt_mass

        return sparse_linalg.LinearOperator(
            (self._n_interior, self._n_interior), matvec=matvec, dtype=dtype
        )

    def robin_extension(
        self, b_matrix: BoundaryMatrix, interior: InteriorVector
    ) -> ExtendedState:
        """Lifts interior values to the state of dom A_[B] with Γ₀u = BΓ₁u."""
        block = self._elimination_block(b_matrix)
        boundary = -scipy.linalg.solve(block, self._L_bi @ np.asarray(interior))
        return ExtendedState(interior=np.asarray(interior), boundary=boundary)

    def robin_solve(
        self, b_matrix: BoundaryMatrix, lam: SpectralParameter, rhs: InteriorVector
    ) -> InteriorVector:
        full_rhs = np.concatenate(
            [self._mass * np.asarray(rhs), np.zeros(self._n_boundary)]
        )
        solution = self._solve(self.shifted_system(lam, b_matrix), full_rhs)
        return solution[: self._n_interior]

    def robin_min_sigma(
        self, b_matrix: BoundaryMatrix, shift: Optional[float] = None
    ) -> float:
        if self.is_dense:
            return min_eig(self.robin_matrix(b_matrix))
        if shift is None:
            values = np.linalg.eigvalsh(hermitian_part(np.asarray(b_matrix)))
            top = max(float(np.max(values)), 0.0)
            ellipticity = getattr(self, "ellipticity_E", 1.0)
            shift = self._floor - 1.0 - 4.0 * top**2 / ellipticity - 4.0 * top
        mass = sparse.diags(np.concatenate([self._mass, np.zeros(self._n_boundary)]))
        return min_eig(self.shifted_system(0.0, b_matrix), mass=mass, sigma=shift)

    def dirichlet_matrix(self) -> MatrixLike:
        scaling = sparse.diags(1.0 / self._sqrt_mass)
        matrix = scaling @ self._L_ii @ scaling
        if self.is_dense:
            return hermitian_part(matrix.toarray())
        return sparse.csr_matrix(matrix)

    def dirichlet_min_sigma(self) -> float:
        if self._a1_spectrum is not None:
            return float(self._a1_spectrum[0])
        return min_eig(
            self._L_ii, mass=sparse.diags(self._mass), sigma=self._floor - 1.0
        )

    def _gershgorin_radius(self) -> float:
        scale = np.concatenate([self._mass, np.full(self._n_boundary, self.weight)])
        row_sums = np.asarray(abs(self._form).sum(axis=1)).ravel()
        return float(np.max(row_sums / scale))


class DiscreteEllipticModel(DiscreteTripleModel):
    """
    The grid discretization of -Σ ∂_j a_jk ∂_k + a on a rectangle or half-strip.

    Attributes
    ----------
    grid : GridSpec
        Extents, spacing and which sides form the boundary space.
    coefficients : CoefficientSpec
        The sampled coefficient fields.
    ellipticity_E : float
        Minimum over cell centres of the smallest eigenvalue of (a_jk).
    essinf_a : float
        Minimum of the potential over interior nodes.
    gradient_form : sparse.csr_matrix
        The form of |∇u|² on all nodes, interior first; used by the trace constant.
    """

    def __init__(
        self,
        form: sparse.csr_matrix,
        n_interior: int,
        mass: np.ndarray,
        weight: float,
        grid: GridSpec,
        coefficients: CoefficientSpec,
        ellipticity_E: float,
        essinf_a: float,
        gradient_form: sparse.csr_matrix,
        interior_coordinates: np.ndarray,
        boundary_coordinates: np.ndarray,
    ):
        self.grid = grid
        self.coefficients = coefficients
        self.ellipticity_E = ellipticity_E
        self.essinf_a = essinf_a
        self.gradient_form = gradient_form
        super().__init__(
            form,
            n_interior,
            mass=mass,
            weight=weight,
            interior_coordinates=interior_coordinates,
            boundary_coordinates=boundary_coordinates,
            spectral_floor=essinf_a,
        )

    @property
    def h(self) -> float:
        return self.grid.h

    def describe(self) -> Dict[str, Any]:
        summary = super().describe()
        summary.update(
            {
                "kind": "discrete-elliptic",
                "dim": self.grid.dim,
                "extents": list(self.grid.extents),
                "h": self.grid.h,
                "boundary_sides": [str(side) for side in self.grid.boundary_sides],
                "ellipticity_E": self.ellipticity_E,
                "essinf_a": self.essinf_a,
            }
        )
        return summary


def _reference_stiffness() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Unit-square P1 stiffness for the tensors e1⊗e1, e2⊗e2 and e1⊗e2 + e2⊗e1.

    The square is split along both diagonals and the two splittings averaged,
    so the mixed term enters symmetrically. Corners are ordered
    (0,0), (1,0), (0,1), (1,1). In 2D these matrices do not depend on h.
    """
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    triangles = ((0, 1, 3), (0, 3, 2), (0, 1, 2), (1, 3, 2))
    tensors = (
        np.array([[1.0, 0.0], [0.0, 0.0]]),
        np.array([[0.0, 0.0], [0.0, 1.0]]),
        np.array([[0.0, 1.0], [1.0, 0.0]]),
    )
    references = []
    for tensor in tensors:
        local = np.zeros((4, 4))
        for triangle in triangles:
            vertices = list(triangle)
            vandermonde = np.column_stack([np.ones(3), corners[vertices]])
            gradients = np.linalg.inv(vandermonde)[1:, :]
            area = 0.5 * abs(np.linalg.det(vandermonde))
            local[np.ix_(vertices, vertices)] += area * gradients.T @ tensor @ gradients
        references.append(0.5 * local)
    return references[0], references[1], references[2]


def _assemble_cells(
    corner_nodes: np.ndarray, local: np.ndarray, n_nodes: int
) -> sparse.csr_matrix:
    n_cells, n_corners = corner_nodes.shape
    rows = np.repeat(corner_nodes, n_corners, axis=1).ravel()
    cols = np.tile(corner_nodes, (1, n_corners)).ravel()
    values = local.reshape(n_cells, n_corners * n_corners).ravel()
    return sparse.coo_matrix((values, (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()


def _ellipticity(a11: np.ndarray, a22: np.ndarray, a12: np.ndarray) -> np.ndarray:
    centre = 0.5 * (a11 + a22)
    radius = np.sqrt((0.5 * (a11 - a22)) ** 2 + a12**2)
    return centre - radius


def build_discrete_model(
    grid: Union[GridSpec, Mapping[str, Any]],
    coefficients: Union[CoefficientSpec, Mapping[str, Any], None] = None,
) -> DiscreteEllipticModel:
    """
    Assembles the discrete elliptic model on a rectangular vertex grid.

    Purpose
    -------
    The stiffness matrix uses the 3-point stencil in 1D and averaged P1
    elements on each grid square in 2D (the 5-point Laplacian when a_jk = δ_jk),
    with a_jk sampled at cell centres. Each boundary node's dual-cell mass is
    lumped onto its inward neighbour, which makes the eliminated Neumann
    condition second-order accurate. The potential sits on interior nodes with
    their lumped mass, so a constant potential shifts σ(A₀) exactly.

    Parameters
    ----------
    grid : GridSpec | Mapping
        Grid specification, parsed with :meth:`GridSpec.from_dict` if a mapping.
    coefficients : CoefficientSpec | Mapping | None
        Coefficient fields; defaults to the Laplacian.

    Returns
    -------
    DiscreteEllipticModel
        The assembled model with exact Hermitian L.

    Raises
    ------
    BadGrid
        For invalid extents or spacing.
    EllipticityViolation
        If the sampled coefficient matrix is not uniformly positive definite.

    Example
    -------
    >>> model = build_discrete_model({"dim": 1, "extents": [1.0], "h": 0.25})
    >>> model.state_dim, model.boundary_dim
    (3, 2)
    """
    if not isinstance(grid, GridSpec):
        grid = GridSpec.from_dict(grid)
    if coefficients is None or not isinstance(coefficients, CoefficientSpec):
        coefficients = CoefficientSpec.from_dict(coefficients or {})

    h = grid.h
    cells = grid.cells
    shape = tuple(count + 1 for count in cells)
    n_nodes = int(np.prod(shape))
    axes = [np.arange(count + 1) for count in cells]
    index = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, grid.dim)
    # x-index fastest
    order = np.lexsort(tuple(index[:, axis] for axis in range(grid.dim)))
    index = index[order]
    coordinates = index * h

    def node_id(*components: np.ndarray) -> np.ndarray:
        node = components[0]
        if grid.dim == 2:
            node = node + components[1] * shape[0]
        return node

    if grid.dim == 1:
        left = np.arange(cells[0])
        corner_nodes = np.column_stack([left, left + 1])
        centres = ((left + 0.5) * h)[:, None]
        a11 = coefficients.a11(centres)
        ellipticity = a11
        unit = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h
        local = a11[:, None, None] * unit
        gradient_local = np.broadcast_to(unit, local.shape)
    else:
        ci, cj = np.meshgrid(np.arange(cells[0]), np.arange(cells[1]), indexing="xy")
        ci, cj = ci.ravel(), cj.ravel()
        corner_nodes = np.column_stack(
            [
                node_id(ci, cj),
                node_id(ci + 1, cj),
                node_id(ci, cj + 1),
                node_id(ci + 1, cj + 1),
            ]
        )
        centres = np.column_stack([(ci + 0.5) * h, (cj + 0.5) * h])
        a11 = coefficients.a11(centres)
        a22 = coefficients.a22(centres)
        a12 = coefficients.a12(centres)
        ellipticity = _ellipticity(a11, a22, a12)
        k11, k22, k12 = _reference_stiffness()
        local = (
            a11[:, None, None] * k11
            + a22[:, None, None] * k22
            + a12[:, None, None] * k12
        )
        gradient_local = np.broadcast_to(k11 + k22, local.shape)

    if not np.all(np.isfinite(local)):
        raise EllipticityViolation("Coefficient samples must be finite.")
    ellipticity_E = float(np.min(ellipticity))
    if ellipticity_E <= 0:
        worst = centres[int(np.argmin(ellipticity))]
        logger.error("Ellipticity fails at %s (E = %.3g).", worst, ellipticity_E)
        raise EllipticityViolation(
            f"Coefficient matrix is not positive definite at x = {worst.tolist()}."
        )

    stiffness = _assemble_cells(corner_nodes, local, n_nodes)
    gradient = _assemble_cells(corner_nodes, np.array(gradient_local), n_nodes)

    # dual-cell masses
    natural_mass = np.full(n_nodes, h**grid.dim)
    for axis, count in enumerate(cells):
        on_edge = (index[:, axis] == 0) | (index[:, axis] == count)
        natural_mass[on_edge] *= 0.5

    sides = set(grid.boundary_sides)
    side_axes = (
        (BoundarySide.X0, BoundarySide.X1),
        (BoundarySide.Y0, BoundarySide.Y1),
    )
    is_boundary = np.zeros(n_nodes, dtype=bool)
    target = index.copy()
    for axis, count in enumerate(cells):
        low_side, high_side = side_axes[axis]
        if low_side in sides:
            low = index[:, axis] == 0
            is_boundary |= low
            target[low, axis] += 1
        if high_side in sides:
            high = index[:, axis] == count
            is_boundary |= high
            target[high, axis] -= 1

    mass = np.where(is_boundary, 0.0, natural_mass)
    boundary_nodes = np.flatnonzero(is_boundary)
    inward = node_id(*(target[boundary_nodes, axis] for axis in range(grid.dim)))
    np.add.at(mass, inward, natural_mass[boundary_nodes])

    interior_nodes = np.flatnonzero(~is_boundary)
    potential = coefficients.a(coordinates[interior_nodes])
    if not np.all(np.isfinite(potential)):
        raise EllipticityViolation("Potential samples must be finite.")
    stiffness = stiffness + sparse.csr_matrix(
        (potential * mass[interior_nodes], (interior_nodes, interior_nodes)),
        shape=(n_nodes, n_nodes),
    )

    permutation = np.concatenate([interior_nodes, boundary_nodes])
    form = sparse.csr_matrix(stiffness[permutation][:, permutation])
    form = (form + form.T) * 0.5
    gradient = sparse.csr_matrix(gradient[permutation][:, permutation])

    logger.debug(
        "Assembled %dD grid %s with %d nodes (%d on the boundary)",
        grid.dim,
        cells,
        n_nodes,
        boundary_nodes.size,
    )
    return DiscreteEllipticModel(
        form=form,
        n_interior=interior_nodes.size,
        mass=mass[interior_nodes],
        weight=h ** (grid.dim - 1),
        grid=grid,
        coefficients=coefficients,
        ellipticity_E=ellipticity_E,
        essinf_a=float(np.min(potential)),
        gradient_form=(gradient + gradient.T) * 0.5,
        interior_coordinates=coordinates[interior_nodes],
        boundary_coordinates=coordinates[boundary_nodes],
    )


def random_discrete_model(
    n_interior: int = 20,
    n_boundary: int = 4,
    seed: Optional[int] = 0,
    complex_values: bool = False,
) -> DiscreteTripleModel:
    """
    Draws a dense random triple with L = GᴴG + 0.1·I and unit weights.

    The boundary block of L is positive definite, so M(λ) stays positive definite
    below min σ(A₀).
    """
    rng = seeded_rng(seed)
    size = n_interior + n_boundary
    factor = rng.standard_normal((size, size))
    if complex_values:
        factor = factor + 1j * rng.standard_normal((size, size))
    factor /= np.sqrt(size)
    form = factor.conj().T @ factor + 0.1 * np.eye(size)
    form = hermitian_part(form)
    logger.debug(
        "Random triple with %d + %d nodes, seed %s", n_interior, n_boundary, seed
    )
    return DiscreteTripleModel(form, n_interior)
