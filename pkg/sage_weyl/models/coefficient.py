import math
from dataclasses import dataclass, field
from typing import Any, Tuple

import numpy as np

from sage_weyl.exceptions import ConfigInvalid


@dataclass(frozen=True)
class CoefficientField:
    """
    A coefficient ``c + a·Π_j cos(2π k_j x_j)`` sampled on grid points.

    Attributes
    ----------
    constant : float
        The mean value c.
    amplitude : float
        The oscillation amplitude a; zero gives a constant coefficient.
    wavenumber : Tuple[float, ...]
        One wavenumber per axis; missing axes use zero (no oscillation).
    """

    constant: float = 0.0
    amplitude: float = 0.0
    wavenumber: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        values = (self.constant, self.amplitude, *self.wavenumber)
        if not all(math.isfinite(value) for value in values):
            raise ConfigInvalid("Coefficient entries must be finite.")

    @classmethod
    def from_spec(cls, spec: Any, pointer: str) -> "CoefficientField":
        """
        Builds a field from a number or a ``{constant, amplitude, wavenumber}`` object.

        Raises
        ------
        ConfigInvalid
            If the specification has the wrong shape; ``pointer`` locates it.
        """
        if isinstance(spec, bool):
            raise ConfigInvalid("Coefficient must be a number or an object.", pointer)
        if isinstance(spec, (int, float)):
            return cls(constant=float(spec))
        if not isinstance(spec, dict):
            raise ConfigInvalid("Coefficient must be a number or an object.", pointer)
        unknown = set(spec) - {"constant", "amplitude", "wavenumber"}
        if unknown:
            raise ConfigInvalid(f"Unknown coefficient keys {sorted(unknown)}.", pointer)
        try:
            wavenumber = spec.get("wavenumber", [])
            if isinstance(wavenumber, (int, float)):
                wavenumber = [wavenumber]
            return cls(
                constant=float(spec.get("constant", 0.0)),
                amplitude=float(spec.get("amplitude", 0.0)),
                wavenumber=tuple(float(k) for k in wavenumber),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(
                "Coefficient entries must be numbers.", pointer
            ) from exc

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """
        Samples the field.

        Parameters
        ----------
        points : np.ndarray
            Array of shape ``(n, d)``.

        Returns
        -------
        np.ndarray
            Array of shape ``(n,)``.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = np.full(points.shape[0], self.constant, dtype=float)
        if self.amplitude == 0.0:
            return values
        modulation = np.ones(points.shape[0])
        for axis, k in enumerate(self.wavenumber[: points.shape[1]]):
            modulation *= np.cos(2.0 * np.pi * k * points[:, axis])
        return values + self.amplitude * modulation
