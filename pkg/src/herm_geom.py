"""Hermitian 2×2 forms, the two models of hyperbolic 3-space and the line-to-sphere map.

A Hermitian form is stored through its Minkowski coordinates (x0, x1, x2, x3), with matrix
((x0 - x1, -(x2 + i x3)), (-(x2 - i x3), x0 + x1)) and determinant
x0² - x1² - x2² - x3². Unit-determinant positive forms are the points of H³.
"""

import logging
from dataclasses import dataclass
from typing import Final, Literal, Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from errors import GeometryError

logger = logging.getLogger(__name__)

INF: Final = "inf"
"Point at infinity of the extended complex plane."

type ExtComplex = complex | Literal["inf"]

BALL_GUARD = 1e-9
HERMITIAN_TOL = 1e-10

# Pauli-like basis of the form coordinates: coords(H) = (x0, x1, x2, x3).
FORM_BASIS: Final = np.array(
    [
        [[1, 0], [0, 1]],
        [[-1, 0], [0, 1]],
        [[0, -1], [-1, 0]],
        [[0, -1j], [1j, 0]],
    ],
    dtype=np.complex128,
)


def is_infinite(z: ExtComplex) -> bool:
    return isinstance(z, str)


def parse_extended(text: str) -> ExtComplex:
    "Parse `inf`, `∞`, `2`, `1+2i` or `1+2j` into an extended complex number."
    cleaned = text.strip().lower().replace(" ", "")
    if cleaned in ("inf", "infinity", "∞"):
        return INF
    return complex(cleaned.replace("i", "j"))


@dataclass(frozen=True, slots=True)
class HermitianForm2:
    x0: float
    x1: float
    x2: float
    x3: float

    @classmethod
    def from_coords(cls, coords: ArrayLike) -> Self:
        c = np.asarray(coords, dtype=float).reshape(4)
        return cls(float(c[0]), float(c[1]), float(c[2]), float(c[3]))

    @classmethod
    def from_matrix(cls, matrix: ArrayLike, tol: float = HERMITIAN_TOL) -> Self:
        m = np.asarray(matrix, dtype=np.complex128).reshape(2, 2)
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.conj().T).max() > tol * scale:
            raise GeometryError(f"Matrix is not Hermitian: {m!r}")
        r, s, t = m[0, 0].real, m[1, 1].real, m[0, 1]
        return cls((r + s) / 2, (s - r) / 2, -t.real, -t.imag)

    @classmethod
    def identity(cls) -> Self:
        return cls(1.0, 0.0, 0.0, 0.0)

    @property
    def coords(self) -> NDArray[np.float64]:
        return np.array([self.x0, self.x1, self.x2, self.x3])

    @property
    def matrix(self) -> NDArray[np.complex128]:
        t = -(self.x2 + 1j * self.x3)
        return np.array(
            [[self.x0 - self.x1, t], [np.conj(t), self.x0 + self.x1]], dtype=np.complex128
        )

    @property
    def det(self) -> float:
        return self.x0**2 - self.x1**2 - self.x2**2 - self.x3**2

    @property
    def trace(self) -> float:
        return 2 * self.x0

    @property
    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def is_positive_definite(self) -> bool:
        return self.det > 0 and self.x0 > 0

    def is_hyperbolic_point(self, tol: float = 1e-10) -> bool:
        return abs(self.det - 1) < tol and self.trace > 0

    def scaled(self, factor: float) -> "HermitianForm2":
        return HermitianForm2.from_coords(factor * self.coords)

    def unimodular(self) -> "HermitianForm2":
        "Rescale a positive form onto the hyperboloid det = 1."
        if not self.is_positive_definite():
            raise GeometryError(f"Form is not positive definite: {self}")
        return self.scaled(1 / np.sqrt(self.det))

    def inner(self, v: ArrayLike, w: ArrayLike) -> complex:
        "h(v, w) = w† H v."
        return complex(np.conj(np.asarray(w)) @ self.matrix @ np.asarray(v))


@dataclass(frozen=True, slots=True)
class ProjLine:
    "The complex line C·(slope, 1) through the origin, or C·(1, 0) for slope ∞."

    slope: ExtComplex

    def __post_init__(self) -> None:
        if not is_infinite(self.slope):
            object.__setattr__(self, "slope", complex(self.slope))

    @classmethod
    def from_vector(cls, v: ArrayLike, tol: float = 1e-14) -> Self:
        z, w = np.asarray(v, dtype=np.complex128).reshape(2)
        if abs(w) <= tol * max(abs(z), abs(w)):
            return cls(INF)
        return cls(complex(z / w))

    @property
    def is_infinite(self) -> bool:
        return is_infinite(self.slope)

    @property
    def vector(self) -> NDArray[np.complex128]:
        "Unit vector spanning the line."
        if is_infinite(self.slope):
            return np.array([1, 0], dtype=np.complex128)
        v = np.array([self.slope, 1], dtype=np.complex128)
        return v / np.linalg.norm(v)

    @property
    def linear_form(self) -> NDArray[np.complex128]:
        "Coefficients (α, β) of a defining equation αz + βw = 0."
        if is_infinite(self.slope):
            return np.array([0, 1], dtype=np.complex128)
        return np.array([1, -complex(self.slope)], dtype=np.complex128)

    def __str__(self) -> str:
        return "inf" if is_infinite(self.slope) else f"{complex(self.slope):g}"


@dataclass(frozen=True, slots=True)
class SpherePoint:
    u: tuple[float, float, float]

    def __post_init__(self) -> None:
        if abs(float(np.linalg.norm(self.u)) - 1) > 1e-12:
            raise GeometryError(f"Not a unit vector: {self.u}")

    @property
    def array(self) -> NDArray[np.float64]:
        return np.array(self.u)


def vector_to_sphere(v: ArrayLike) -> NDArray[np.float64]:
    "Hopf map (|z|² - |w|², 2 Re zw̄, 2 Im zw̄)/(|z|² + |w|²)."
    z, w = np.asarray(v, dtype=np.complex128).reshape(2)
    zw = z * np.conj(w)
    norm = abs(z) ** 2 + abs(w) ** 2
    return np.array([abs(z) ** 2 - abs(w) ** 2, 2 * zw.real, 2 * zw.imag]) / norm


def line_to_sphere(line: ProjLine) -> SpherePoint:
    if line.is_infinite:
        return SpherePoint((1.0, 0.0, 0.0))
    lam = complex(line.slope)
    n = 1 + abs(lam) ** 2
    return SpherePoint(((abs(lam) ** 2 - 1) / n, 2 * lam.real / n, 2 * lam.imag / n))


def sphere_to_line(point: SpherePoint) -> ProjLine:
    x1, x2, x3 = point.u
    if abs(1 - x1) < 1e-15:
        return ProjLine(INF)
    return ProjLine(complex(x2, x3) / (1 - x1))


def projection_matrix(line: ProjLine, form: HermitianForm2) -> NDArray[np.complex128]:
    "Projection with kernel `line`, self-adjoint for `form`: Id - v(v†H)/(v†Hv)."
    if not form.is_positive_definite():
        raise GeometryError(f"Projection needs a positive definite form, got {form}")
    h = form.matrix
    v = line.vector
    row = np.conj(v) @ h
    return np.eye(2, dtype=np.complex128) - np.outer(v, row) / (row @ v).real


def _ball_point(y: ArrayLike) -> NDArray[np.float64]:
    p = np.asarray(y, dtype=float).reshape(3)
    if float(p @ p) >= (1 - BALL_GUARD) ** 2:
        raise GeometryError(f"Point {p} is not inside the open unit ball")
    return p


def busemann(x: SpherePoint, y: ArrayLike) -> float:
    "Busemann function of the ideal point x, normalized to vanish at the centre of the ball."
    p = _ball_point(y)
    diff = x.array - p
    return float(-np.log((1 - p @ p) / (diff @ diff)))


def moebius_on_forms(a: ArrayLike, form: HermitianForm2) -> HermitianForm2:
    "Right action H ↦ A†HA."
    m = np.asarray(a, dtype=np.complex128).reshape(2, 2)
    if abs(np.linalg.det(m)) <= 1e-14 * max(1.0, float(np.abs(m).max()) ** 2):
        raise GeometryError(f"Matrix is singular: {m!r}")
    return HermitianForm2.from_matrix(m.conj().T @ form.matrix @ m)


def ball_to_hyperboloid(y: ArrayLike) -> HermitianForm2:
    p = _ball_point(y)
    r2 = float(p @ p)
    x0 = (1 + r2) / (1 - r2)
    x1, x2, x3 = 2 * p / (1 - r2)
    return HermitianForm2(x0, float(x1), float(x2), float(x3))


def hyperboloid_to_ball(form: HermitianForm2) -> NDArray[np.float64]:
    h = form.unimodular()
    return h.coords[1:] / (1 + h.x0)


def positive_sqrt(form: HermitianForm2) -> NDArray[np.complex128]:
    "Hermitian square root A of a positive form, so that A†A = H."
    if not form.is_positive_definite():
        raise GeometryError(f"Square root needs a positive definite form, got {form}")
    values, vectors = linalg.eigh(form.matrix)
    return (vectors * np.sqrt(values)) @ vectors.conj().T
