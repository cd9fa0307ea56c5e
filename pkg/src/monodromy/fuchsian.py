import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dunkl import StandardConnection
from errors import PoleError

logger = logging.getLogger(__name__)

GOLDEN: Final = (1 + 5**0.5) / 2
COINCIDENCE_TOL = 1e-9
PARALLEL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Probe:
    "The affine probe line x₀ + t·v in C²."

    direction: NDArray[np.complex128]
    basepoint: NDArray[np.complex128]

    @classmethod
    def default(cls, attempt: int = 0) -> "Probe":
        "Direction (1, φ) through (1, φ²), perturbed on later attempts."
        shift = 0.1 * attempt * (1 + 0.5j)
        return cls(
            np.array([1, GOLDEN + shift], dtype=np.complex128),
            np.array([1, GOLDEN**2], dtype=np.complex128),
        )

    @classmethod
    def through(cls, basepoint: ArrayLike, attempt: int = 0) -> "Probe":
        return cls(cls.default(attempt).direction, np.asarray(basepoint, dtype=np.complex128))

    def point(self, t: complex) -> NDArray[np.complex128]:
        return self.basepoint + t * self.direction


@dataclass(frozen=True, eq=False)
class FuchsianSystem:
    "Y' = (Σ A_i/(t - ξ_i))·Y on the probe line, based at t₀."

    poles: NDArray[np.complex128]
    residues: NDArray[np.complex128]
    basepoint: complex = 0j
    line_indices: tuple[int, ...] = field(default=())
    "Index in the connection of the line that produced each pole."

    def __post_init__(self) -> None:
        if np.any(np.abs(self.poles - self.basepoint) < COINCIDENCE_TOL):
            raise PoleError(f"Basepoint {self.basepoint} coincides with a pole")
        pair = self.closest_pair()
        scale = max(1.0, float(np.abs(self.poles).max(initial=0.0)))
        if pair is not None and self.min_pole_distance < COINCIDENCE_TOL * scale:
            raise PoleError(f"coincident poles {pair}", pair)

    @property
    def n(self) -> int:
        return int(self.poles.shape[0])

    @property
    def min_pole_distance(self) -> float:
        pair = self.closest_pair()
        if pair is None:
            return np.inf
        return float(abs(self.poles[pair[0]] - self.poles[pair[1]]))

    @property
    def basepoint_clearance(self) -> float:
        return float(np.abs(self.poles - self.basepoint).min())

    def closest_pair(self) -> tuple[int, int] | None:
        pairs = list(combinations(range(self.n), 2))
        if not pairs:
            return None
        return min(pairs, key=lambda p: abs(self.poles[p[0]] - self.poles[p[1]]))


def restrict_to_line(
    conn: StandardConnection, direction: ArrayLike, basepoint: ArrayLike
) -> FuchsianSystem:
    "Pull the connection back to x₀ + t·v; the poles solve ℓ_i(x₀ + ξ_i v) = 0."
    v = np.asarray(direction, dtype=np.complex128).reshape(2)
    x0 = np.asarray(basepoint, dtype=np.complex128).reshape(2)
    forms = conn.linear_forms
    along = forms @ v
    at_base = forms @ x0
    for i, line in enumerate(conn.lines):
        if abs(along[i]) < PARALLEL_TOL * np.linalg.norm(forms[i]) * np.linalg.norm(v):
            raise PoleError(f"Probe line is parallel to line {line}")
        if abs(at_base[i]) < PARALLEL_TOL * np.linalg.norm(forms[i]) * np.linalg.norm(x0):
            raise PoleError(f"Probe basepoint lies on line {line}")
    poles = -at_base / along
    return FuchsianSystem(
        poles=poles,
        residues=np.array(conn.residues),
        basepoint=0j,
        line_indices=tuple(range(conn.n)),
    )
