"""Möbius maps preserving the four points 0, 1, ∞, λ and the degree-4 quotient cover.

Points of the extended plane are evaluated in homogeneous coordinates (p : q), with ∞ the
point (1 : 0), so no arithmetic is done with an actual infinity.
"""

import logging
from dataclasses import dataclass
from typing import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errors import ArrangementError, GeometryError
from herm_geom import INF, ExtComplex, is_infinite

logger = logging.getLogger(__name__)

COINCIDENCE_TOL = 1e-12
DEGENERATE_LAMBDA_TOL = 1e-12


def to_homogeneous(z: ExtComplex) -> tuple[complex, complex]:
    if is_infinite(z):
        return 1 + 0j, 0j
    return complex(z), 1 + 0j


def from_homogeneous(p: complex, q: complex) -> ExtComplex:
    if abs(q) <= COINCIDENCE_TOL * abs(p):
        return INF
    return complex(p / q)


def _bracket(x: ExtComplex, y: ExtComplex) -> complex:
    "The determinant [x, y] = p_x q_y - p_y q_x of two homogeneous points."
    px, qx = to_homogeneous(x)
    py, qy = to_homogeneous(y)
    return px * qy - py * qx


def ext_distance(x: ExtComplex, y: ExtComplex) -> float:
    "Chordal distance on the Riemann sphere."
    px, qx = to_homogeneous(x)
    py, qy = to_homogeneous(y)
    nx = np.hypot(abs(px), abs(qx))
    ny = np.hypot(abs(py), abs(qy))
    return float(abs(px * qy - py * qx) / (nx * ny))


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    "z ↦ (az + b)/(cz + d), a matrix defined up to scale."

    matrix: NDArray[np.complex128]

    def __post_init__(self) -> None:
        m = self.matrix
        if abs(np.linalg.det(m)) <= 1e-14 * max(1.0, float(np.abs(m).max()) ** 2):
            raise GeometryError(f"Möbius matrix is singular: {m!r}")

    @classmethod
    def of(cls, a: complex, b: complex, c: complex, d: complex) -> Self:
        return cls(np.array([[a, b], [c, d]], dtype=np.complex128))

    @classmethod
    def identity(cls) -> Self:
        return cls(np.eye(2, dtype=np.complex128))

    def __call__(self, z: ExtComplex) -> ExtComplex:
        p, q = to_homogeneous(z)
        m = self.matrix
        return from_homogeneous(m[0, 0] * p + m[0, 1] * q, m[1, 0] * p + m[1, 1] * q)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        "self ∘ other."
        return MoebiusMap(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        m = self.matrix
        return MoebiusMap.of(m[1, 1], -m[0, 1], -m[1, 0], m[0, 0])

    def projectively_equal(self, other: "MoebiusMap", tol: float = 1e-10) -> bool:
        "Whether the matrices agree up to a nonzero scalar."
        u = self.matrix.reshape(-1) / np.linalg.norm(self.matrix)
        v = other.matrix.reshape(-1) / np.linalg.norm(other.matrix)
        return bool(np.abs(np.outer(u, v) - np.outer(v, u)).max() < tol)

    def is_involution(self, tol: float = 1e-10) -> bool:
        return self.compose(self).projectively_equal(MoebiusMap.identity(), tol)


def cross_ratio(x1: ExtComplex, x2: ExtComplex, x3: ExtComplex, x4: ExtComplex) -> ExtComplex:
    "λ = ((x2-x3)/(x2-x1))·((x4-x1)/(x4-x3)), so that (0, 1, ∞, λ) ↦ λ."
    points = (x1, x2, x3, x4)
    for i in range(4):
        for j in range(i + 1, 4):
            if ext_distance(points[i], points[j]) < COINCIDENCE_TOL:
                raise ArrangementError(f"Cross-ratio of coincident points {points[i]}, {points[j]}")
    numerator = _bracket(x2, x3) * _bracket(x4, x1)
    denominator = _bracket(x2, x1) * _bracket(x4, x3)
    return from_homogeneous(numerator, denominator)


def _check_lambda(lam: ExtComplex) -> complex:
    if is_infinite(lam):
        raise ArrangementError("λ = ∞ is a degenerate configuration")
    value = complex(lam)
    if abs(value) < DEGENERATE_LAMBDA_TOL or abs(value - 1) < DEGENERATE_LAMBDA_TOL:
        raise ArrangementError(f"λ = {value} is a degenerate configuration")
    return value


def klein_maps(lam: ExtComplex) -> tuple[MoebiusMap, MoebiusMap, MoebiusMap]:
    """The three non-trivial maps fixing the set {0, 1, ∞, λ}.

    M1 = (z-λ)/(z-1) swaps 0 ↔ λ and 1 ↔ ∞, M2 = λ/z swaps 0 ↔ ∞ and 1 ↔ λ,
    M3 = λ(z-1)/(z-λ) swaps 0 ↔ 1 and ∞ ↔ λ.
    """
    value = _check_lambda(lam)
    return (
        MoebiusMap.of(1, -value, 1, -1),
        MoebiusMap.of(0, value, 1, 0),
        MoebiusMap.of(value, -value, 1, -value),
    )


def _quadratic_roots(a: complex, b: complex, c: complex) -> list[ExtComplex]:
    "Both roots of az² + bz + c in the extended plane; a vanishing a gives the root ∞."
    scale = max(abs(a), abs(b), abs(c))
    if abs(a) <= COINCIDENCE_TOL * scale:
        if abs(b) <= COINCIDENCE_TOL * scale:
            return [INF, INF]
        return [INF, complex(-c / b)]
    return [complex(root) for root in np.roots([a, b, c])]


@dataclass(frozen=True)
class QuotientCover:
    "Φ(z) = λ(z² - 2z + λ)²/(z² - 2λz + λ)², invariant under the Klein maps of λ."

    lam: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", _check_lambda(self.lam))

    def __call__(self, z: ExtComplex) -> ExtComplex:
        p, q = to_homogeneous(z)
        lam = self.lam
        num = p * p - 2 * p * q + lam * q * q
        den = p * p - 2 * lam * p * q + lam * q * q
        return from_homogeneous(lam * num * num, den * den)

    def fixed_points(self) -> tuple[tuple[complex, ...], ...]:
        "Fixed points of M1, M2, M3: roots of z²-2z+λ, z²-λ and z²-2λz+λ."
        lam = self.lam
        return tuple(
            tuple(complex(r) for r in np.roots(coefficients))
            for coefficients in ([1, -2, lam], [1, 0, -lam], [1, -2 * lam, lam])
        )

    def critical_values(self) -> tuple[ExtComplex, ExtComplex, ExtComplex]:
        "Images of the fixed points of M1, M2, M3; these are 0, 1, ∞."
        values = [self(points[0]) for points in self.fixed_points()]
        return values[0], values[1], values[2]

    def preimages(self, y: ExtComplex) -> list[ExtComplex]:
        """The four solutions of Φ(z) = y, counted with multiplicity.

        Φ(z) = y splits as N(z) = s·D(z) with s = ±√(y/λ); each sign gives the quadratic
        (1-s)z² - 2(1-sλ)z + λ(1-s) = 0.
        """
        lam = self.lam
        if is_infinite(y):
            return _quadratic_roots(1, -2 * lam, lam) * 2
        root = complex(np.sqrt(complex(y) / lam))
        found: list[ExtComplex] = []
        for s in (root, -root):
            found.extend(_quadratic_roots(1 - s, -2 * (1 - s * lam), lam * (1 - s)))
        return found


def quotient_cover(lam: ExtComplex) -> QuotientCover:
    return QuotientCover(_check_lambda(lam))


def klein_identity_residual(lam: ExtComplex) -> float:
    "|Φ(λ) - λ|, zero because every one of 0, 1, ∞, λ maps to λ."
    cover = quotient_cover(lam)
    value = cover(cover.lam)
    if is_infinite(value):
        logger.warning(f"Φ(λ) evaluated to ∞ at λ = {cover.lam}")
        return float("inf")
    return float(abs(value - cover.lam))


def invariance_residual(lam: ExtComplex, samples: ArrayLike) -> float:
    "Largest chordal distance between Φ(M_i(z)) and Φ(z) over the samples."
    cover = quotient_cover(lam)
    worst = 0.0
    for z in np.asarray(samples, dtype=np.complex128).reshape(-1):
        base = cover(complex(z))
        for m in klein_maps(lam):
            worst = max(worst, ext_distance(cover(m(complex(z))), base))
    return worst
