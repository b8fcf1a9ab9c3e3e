import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from sage_weyl.exceptions import BadGrid, BadProfile, ConfigInvalid
from sage_weyl.helpers.enums import BoundarySide, Experiment, ModelKind
from sage_weyl.models.coefficient import CoefficientField

logger = logging.getLogger(__name__)

TILING_TOLERANCE = 1e-9


def _require(raw: Mapping[str, Any], key: str, pointer: str) -> Any:
    if key not in raw:
        raise ConfigInvalid(f"Missing required key '{key}'.", f"{pointer}/{key}")
    return raw[key]


def _as_float(value: Any, pointer: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid("Expected a number.", pointer)
    if not math.isfinite(value):
        raise ConfigInvalid("Expected a finite number.", pointer)
    return float(value)


def _as_int(value: Any, pointer: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid("Expected an integer.", pointer)
    if value < minimum:
        raise ConfigInvalid(f"Expected an integer >= {minimum}.", pointer)
    return value


def _as_mapping(value: Any, pointer: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigInvalid("Expected an object.", pointer)
    return value


def _as_list(value: Any, pointer: str) -> List[Any]:
    if not isinstance(value, list):
        raise ConfigInvalid("Expected a list.", pointer)
    return value


@dataclass(frozen=True)
class GridSpec:
    """
    A rectangular vertex grid [0, L_x] (x [0, L_y]) with spacing h.

    Sides listed in ``boundary_sides`` carry the boundary space; the others are
    Neumann caps whose nodes stay interior unknowns.

    Raises
    ------
    BadGrid
        For non-positive extents or spacing, or a spacing that does not tile
        the extents into at least two cells per axis.
    ConfigInvalid
        For unknown dimensions or sides.
    """

    dim: int
    extents: Tuple[float, ...]
    h: float
    boundary_sides: Tuple[BoundarySide, ...] = ()

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ConfigInvalid("Only 1D and 2D grids are supported.", "/grid/dim")
        if len(self.extents) != self.dim:
            raise ConfigInvalid(f"Expected {self.dim} extents.", "/grid/extents")
        for axis, extent in enumerate(self.extents):
            if not (math.isfinite(extent) and extent > 0):
                raise BadGrid("Extents must be positive.", f"/grid/extents/{axis}")
        if not (math.isfinite(self.h) and self.h > 0):
            raise BadGrid("Grid spacing must be positive.", "/grid/h")
        sides = self.boundary_sides or self.all_sides()
        allowed = set(self.all_sides())
        for index, side in enumerate(sides):
            if side not in allowed:
                raise ConfigInvalid(
                    f"Side {side!r} does not exist in {self.dim}D.",
                    f"/grid/boundary_sides/{index}",
                )
        object.__setattr__(
            self, "boundary_sides", tuple(BoundarySide(side) for side in sides)
        )
        object.__setattr__(self, "_cells", self._count_cells())

    def all_sides(self) -> Tuple[BoundarySide, ...]:
        if self.dim == 1:
            return (BoundarySide.X0, BoundarySide.X1)
        return (BoundarySide.X0, BoundarySide.X1, BoundarySide.Y0, BoundarySide.Y1)

    @property
    def cells(self) -> Tuple[int, ...]:
        return self._cells  # type: ignore[attr-defined]

    def _count_cells(self) -> Tuple[int, ...]:
        counts = []
        for extent in self.extents:
            ratio = extent / self.h
            count = int(round(ratio))
            if abs(ratio - count) > TILING_TOLERANCE * max(1.0, ratio) or count < 2:
                raise BadGrid(
                    f"Spacing {self.h} does not tile extent {extent} into >= 2 cells.",
                    "/grid/h",
                )
            counts.append(count)
        return tuple(counts)

    @classmethod
    def from_dict(cls, raw: Any, pointer: str = "/grid") -> "GridSpec":
        raw = _as_mapping(raw, pointer)
        dim = _as_int(_require(raw, "dim", pointer), f"{pointer}/dim", minimum=1)
        extents = _as_list(_require(raw, "extents", pointer), f"{pointer}/extents")
        sides = raw.get("boundary_sides", [])
        sides = _as_list(sides, f"{pointer}/boundary_sides")
        return cls(
            dim=dim,
            extents=tuple(
                _as_float(value, f"{pointer}/extents/{axis}")
                for axis, value in enumerate(extents)
            ),
            h=_as_float(_require(raw, "h", pointer), f"{pointer}/h"),
            boundary_sides=tuple(str(side) for side in sides),
        )


@dataclass(frozen=True)
class CoefficientSpec:
    """Coefficients of -Σ ∂_j a_jk ∂_k + a; a21 equals a12."""

    a11: CoefficientField = field(default_factory=lambda: CoefficientField(1.0))
    a22: CoefficientField = field(default_factory=lambda: CoefficientField(1.0))
    a12: CoefficientField = field(default_factory=CoefficientField)
    a: CoefficientField = field(default_factory=CoefficientField)

    @classmethod
    def from_dict(cls, raw: Any, pointer: str = "/coeff") -> "CoefficientSpec":
        raw = _as_mapping(raw if raw is not None else {}, pointer)
        unknown = set(raw) - {"a11", "a22", "a12", "a21", "a"}
        if unknown:
            raise ConfigInvalid(f"Unknown coefficient keys {sorted(unknown)}.", pointer)
        if "a21" in raw and raw.get("a21") != raw.get("a12"):
            raise ConfigInvalid(
                "Coefficient matrix must be symmetric.", f"{pointer}/a21"
            )
        defaults = {"a11": 1.0, "a22": 1.0, "a12": 0.0, "a": 0.0}
        return cls(
            **{
                key: CoefficientField.from_spec(
                    raw.get(key, default), f"{pointer}/{key}"
                )
                for key, default in defaults.items()
            }
        )


@dataclass(frozen=True)
class PotentialPiece:
    left: float
    right: float
    value: float


@dataclass(frozen=True)
class HalfLineSpec:
    """
    A half-line operator -d²/dx² + q with q = q0 outside the listed pieces.

    Raises
    ------
    BadProfile
        For non-finite, empty, reversed or overlapping pieces.
    """

    q0: float = 0.0
    profile: Tuple[PotentialPiece, ...] = ()
    step: float = 0.002
    radius: Optional[float] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.q0):
            raise BadProfile("Background potential must be finite.", "/q0")
        ordered = sorted(self.profile, key=lambda piece: piece.left)
        previous_right = 0.0
        for index, piece in enumerate(ordered):
            values = (piece.left, piece.right, piece.value)
            if not all(math.isfinite(value) for value in values):
                raise BadProfile("Profile pieces must be finite.", f"/profile/{index}")
            if piece.left < previous_right or piece.right <= piece.left:
                raise BadProfile(
                    "Profile pieces must be ordered, disjoint and inside [0, X].",
                    f"/profile/{index}",
                )
            previous_right = piece.right
        object.__setattr__(self, "profile", tuple(ordered))
        if not (math.isfinite(self.step) and self.step > 0):
            raise ConfigInvalid("Quadrature step must be positive.", "/quadrature/step")
        if self.radius is not None and not (
            math.isfinite(self.radius) and self.radius > self.support
        ):
            raise ConfigInvalid(
                "Quadrature radius must exceed the profile support.",
                "/quadrature/radius",
            )

    @property
    def support(self) -> float:
        return self.profile[-1].right if self.profile else 0.0

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "HalfLineSpec":
        profile = _as_list(raw.get("profile", []), "/profile")
        pieces = []
        for index, item in enumerate(profile):
            pointer = f"/profile/{index}"
            if not isinstance(item, list) or len(item) != 3:
                raise BadProfile("Each piece is [x_left, x_right, value].", pointer)
            left, right, value = (
                _as_float(entry, f"{pointer}/{slot}") for slot, entry in enumerate(item)
            )
            pieces.append(PotentialPiece(left, right, value))
        quadrature = _as_mapping(raw.get("quadrature", {}), "/quadrature")
        radius = quadrature.get("radius")
        return cls(
            q0=_as_float(raw.get("q0", 0.0), "/q0"),
            profile=tuple(pieces),
            step=_as_float(quadrature.get("step", 0.002), "/quadrature/step"),
            radius=None if radius is None else _as_float(radius, "/quadrature/radius"),
        )


@dataclass(frozen=True)
class RandomSpec:
    interior: int = 20
    boundary: int = 4
    complex_values: bool = False

    @classmethod
    def from_dict(cls, raw: Any, pointer: str = "/random") -> "RandomSpec":
        raw = _as_mapping(raw if raw is not None else {}, pointer)
        complex_values = raw.get("complex", False)
        if not isinstance(complex_values, bool):
            raise ConfigInvalid("Expected a boolean.", f"{pointer}/complex")
        return cls(
            interior=_as_int(raw.get("interior", 20), f"{pointer}/interior", minimum=1),
            boundary=_as_int(raw.get("boundary", 4), f"{pointer}/boundary", minimum=1),
            complex_values=complex_values,
        )


@dataclass(frozen=True)
class FitWindow:
    """The λ-window [lo, hi] of a decay fit; mu defaults to the model's anchor."""

    lo: float
    hi: float
    mu: Optional[float] = None
    samples: int = 24

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ConfigInvalid("Fit window needs lo < hi.", "/fit_window")
        if self.mu is not None and self.hi >= self.mu:
            raise ConfigInvalid("Fit window must lie below mu.", "/fit_window/hi")
        if self.samples < 8:
            raise ConfigInvalid(
                "A decay fit needs at least 8 samples.", "/fit_window/samples"
            )

    @classmethod
    def from_dict(cls, raw: Any, pointer: str = "/fit_window") -> "FitWindow":
        raw = _as_mapping(raw, pointer)
        mu = raw.get("mu")
        return cls(
            lo=_as_float(_require(raw, "lo", pointer), f"{pointer}/lo"),
            hi=_as_float(_require(raw, "hi", pointer), f"{pointer}/hi"),
            mu=None if mu is None else _as_float(mu, f"{pointer}/mu"),
            samples=_as_int(raw.get("samples", 24), f"{pointer}/samples", minimum=1),
        )


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-10
    eigenvalue: float = 1e-8
    symmetry: float = 1e-12
    krein_block: float = 1e-12
    krein_hypothesis: float = 1e-6

    @classmethod
    def from_dict(cls, raw: Any, pointer: str = "/tolerances") -> "Tolerances":
        raw = _as_mapping(raw if raw is not None else {}, pointer)
        unknown = set(raw) - {
            "identity",
            "eigenvalue",
            "symmetry",
            "krein_block",
            "krein_hypothesis",
        }
        if unknown:
            raise ConfigInvalid(f"Unknown tolerance keys {sorted(unknown)}.", pointer)
        values = {key: _as_float(val, f"{pointer}/{key}") for key, val in raw.items()}
        for key, value in values.items():
            if value <= 0:
                raise ConfigInvalid("Tolerances must be positive.", f"{pointer}/{key}")
        return cls(**values)


def _as_complex(value: Any, pointer: str) -> complex:
    if isinstance(value, Mapping):
        return complex(
            _as_float(value.get("re", 0.0), f"{pointer}/re"),
            _as_float(value.get("im", 0.0), f"{pointer}/im"),
        )
    if isinstance(value, list) and len(value) == 2:
        return complex(
            _as_float(value[0], f"{pointer}/0"), _as_float(value[1], f"{pointer}/1")
        )
    return complex(_as_float(value, pointer))


@dataclass(frozen=True)
class ExperimentConfig:
    """
    A parsed experiment configuration.

    Attributes
    ----------
    experiment : Experiment
        Which runner to execute.
    model : ModelKind
        Which model family ``grid``/``coeff``, ``halfline`` or ``random`` describe.
    B : Optional[Mapping[str, Any]]
        Raw boundary-parameter specification, materialized against the model.
    lambdas : Tuple[complex, ...]
        Spectral parameters; real numbers, ``[re, im]`` pairs or ``{re, im}``.
    omegas : Tuple[float, ...]
        Couplings for sweeps.
    """

    experiment: Experiment
    model: ModelKind
    grid: Optional[GridSpec] = None
    coeff: CoefficientSpec = field(default_factory=CoefficientSpec)
    halfline: Optional[HalfLineSpec] = None
    random: Optional[RandomSpec] = None
    B: Optional[Mapping[str, Any]] = None
    lambdas: Tuple[complex, ...] = ()
    omegas: Tuple[float, ...] = ()
    fit_window: Optional[FitWindow] = None
    out: Path = Path("out")
    seed: int = 0
    jobs: int = 1
    tolerances: Tolerances = field(default_factory=Tolerances)
    raw: Dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_dict(cls, raw: Any) -> "ExperimentConfig":
        raw = _as_mapping(raw, "")
        known = {
            "experiment",
            "model",
            "grid",
            "coeff",
            "q0",
            "profile",
            "quadrature",
            "random",
            "B",
            "lambdas",
            "omegas",
            "fit_window",
            "out",
            "seed",
            "jobs",
            "tolerances",
        }
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigInvalid(f"Unknown key '{unknown[0]}'.", f"/{unknown[0]}")
        try:
            experiment = Experiment(_require(raw, "experiment", ""))
        except ValueError as exc:
            raise ConfigInvalid("Unknown experiment.", "/experiment") from exc
        try:
            model = ModelKind(_require(raw, "model", ""))
        except ValueError as exc:
            raise ConfigInvalid("Unknown model kind.", "/model") from exc

        grid = halfline = random_spec = None
        coeff = CoefficientSpec()
        if model is ModelKind.DISCRETE:
            grid = GridSpec.from_dict(_require(raw, "grid", ""))
            coeff = CoefficientSpec.from_dict(raw.get("coeff"))
        elif model is ModelKind.HALFLINE:
            halfline = HalfLineSpec.from_dict(raw)
        else:
            random_spec = RandomSpec.from_dict(raw.get("random"))

        B = raw.get("B")
        if B is not None:
            _as_mapping(B, "/B")
        lambdas = _as_list(raw.get("lambdas", []), "/lambdas")
        omegas = _as_list(raw.get("omegas", []), "/omegas")
        parsed_omegas = tuple(
            _as_float(value, f"/omegas/{index}") for index, value in enumerate(omegas)
        )
        for index, omega in enumerate(parsed_omegas):
            if omega < 0:
                raise ConfigInvalid(
                    "Couplings must be non-negative.", f"/omegas/{index}"
                )
        fit_window = raw.get("fit_window")
        out = raw.get("out", "out")
        if not isinstance(out, str):
            raise ConfigInvalid("Expected a path string.", "/out")
        return cls(
            experiment=experiment,
            model=model,
            grid=grid,
            coeff=coeff,
            halfline=halfline,
            random=random_spec,
            B=B,
            lambdas=tuple(
                _as_complex(value, f"/lambdas/{index}")
                for index, value in enumerate(lambdas)
            ),
            omegas=parsed_omegas,
            fit_window=None if fit_window is None else FitWindow.from_dict(fit_window),
            out=Path(out),
            seed=_as_int(raw.get("seed", 0), "/seed"),
            jobs=_as_int(raw.get("jobs", 1), "/jobs", minimum=1),
            tolerances=Tolerances.from_dict(raw.get("tolerances")),
            raw=dict(raw),
        )

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        """
        Reads and validates a JSON configuration file.

        Raises
        ------
        ConfigInvalid
            If the file is missing, is not JSON, or violates the schema.
        """
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigInvalid(f"Configuration file {path} not found.", "") from exc
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(
                f"Configuration is not valid JSON: {exc.msg}.", ""
            ) from exc
        logger.debug("Loaded configuration from %s", path)
        return cls.from_dict(raw)
