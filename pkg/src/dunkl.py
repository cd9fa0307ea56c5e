"""Standard and Dunkl connections on C² with logarithmic poles along lines through 0.

A standard connection is d - Σ A_i dℓ_i/ℓ_i where ℓ_i is a defining equation of the line
L_i, ker A_i = L_i and Σ A_i = c·Id. A Dunkl connection additionally has residues that are
self-adjoint for one positive Hermitian form, found here as the minimizer of a weighted sum
of Busemann functions on the ball model of H³.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from errors import ArrangementError, ConvergenceError, PoleError
from herm_geom import (
    BALL_GUARD,
    INF,
    ExtComplex,
    HermitianForm2,
    ProjLine,
    ball_to_hyperboloid,
    line_to_sphere,
    positive_sqrt,
    projection_matrix,
    vector_to_sphere,
)

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
NEWTON_GRAD_TOL = 1e-12
NEWTON_MAX_ITER = 200
_ARMIJO = 1e-4
_FULL_STEP_GRAD = 1e-6


@dataclass(frozen=True)
class WeightedLines:
    lines: tuple[ProjLine, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lines) != len(self.weights):
            raise ArrangementError(
                f"{len(self.lines)} lines but {len(self.weights)} weights were given"
            )
        if len(self.lines) < 3:
            raise ArrangementError(f"At least 3 lines are needed, got {len(self.lines)}")
        if len(set(self.lines)) != len(self.lines):
            raise ArrangementError(f"Lines must be pairwise distinct: {self.lines}")
        if any(a == 0 for a in self.weights):
            raise ArrangementError(f"Weights must be nonzero: {self.weights}")
        if len({a > 0 for a in self.weights}) > 1:
            raise ArrangementError(f"Weights must share one sign: {self.weights}")

    @classmethod
    def of(cls, slopes: Sequence[ExtComplex], weights: Sequence[float]) -> Self:
        return cls(tuple(ProjLine(s) for s in slopes), tuple(float(a) for a in weights))


@dataclass(frozen=True, eq=False)
class StandardConnection:
    lines: tuple[ProjLine, ...]
    residues: NDArray[np.complex128]
    "Residue matrices A_i, shape (n, 2, 2)."

    @classmethod
    def from_residues(
        cls, lines: Sequence[ProjLine], residues: ArrayLike, check: bool = True
    ) -> Self:
        conn = cls(tuple(lines), np.asarray(residues, dtype=np.complex128).reshape(-1, 2, 2))
        if len(conn.lines) != conn.residues.shape[0]:
            raise ArrangementError("One residue matrix per line is required")
        if check:
            conn.check()
        return conn

    @property
    def n(self) -> int:
        return len(self.lines)

    @property
    def traces(self) -> NDArray[np.complex128]:
        return np.trace(self.residues, axis1=1, axis2=2)

    @property
    def c(self) -> complex:
        return complex(self.traces.sum() / 2)

    @property
    def linear_forms(self) -> NDArray[np.complex128]:
        return np.array([line.linear_form for line in self.lines])

    def kernel_residual(self) -> float:
        return max(
            float(np.linalg.norm(a @ line.vector)) for line, a in zip(self.lines, self.residues)
        )

    def identity_residual(self) -> float:
        return float(np.linalg.norm(self.residues.sum(axis=0) - self.c * np.eye(2)))

    def self_adjoint_residual(self, form: HermitianForm2) -> float:
        h = form.matrix
        return max(float(np.linalg.norm(h @ a - a.conj().T @ h)) for a in self.residues)

    def check(self, tol: float = IDENTITY_TOL) -> None:
        scale = max(1.0, float(np.abs(self.residues).max(initial=0.0)))
        if self.kernel_residual() > tol * scale:
            raise ArrangementError(
                f"Residues do not vanish on their lines ({self.kernel_residual():.3e})"
            )
        if self.identity_residual() > tol * scale:
            raise ArrangementError(
                f"Residues do not sum to c·Id ({self.identity_residual():.3e})"
            )

    def scaled(self, t: float) -> "StandardConnection":
        "The connection d - t Σ A_i dℓ_i/ℓ_i; standard (or Dunkl) whenever self is."
        return StandardConnection(self.lines, t * self.residues)

    def connection_matrix(
        self, point: ArrayLike
    ) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        "Coefficients (Ω_z, Ω_w) of the connection form Ω = Ω_z dz + Ω_w dw at a point."
        x = np.asarray(point, dtype=np.complex128).reshape(2)
        forms = self.linear_forms
        values = forms @ x
        if np.any(np.abs(values) < 1e-14 * max(1.0, float(np.abs(x).max()))):
            raise PoleError(f"Point {x} lies on a singular line")
        omega_z = np.einsum("i,ijk->jk", forms[:, 0] / values, self.residues)
        omega_w = np.einsum("i,ijk->jk", forms[:, 1] / values, self.residues)
        return omega_z, omega_w

    def euler_vector(self, point: ArrayLike) -> NDArray[np.complex128]:
        "E = x/(1 - c), the field with ∇E = Id."
        if abs(1 - self.c) < 1e-12:
            raise ArrangementError("The Euler field is undefined at c = 1")
        return np.asarray(point, dtype=np.complex128) / (1 - self.c)


def stability_check(weighted: WeightedLines) -> bool:
    magnitudes = np.abs(np.asarray(weighted.weights))
    total = magnitudes.sum()
    return bool(np.all(magnitudes < total - magnitudes))


# region barycentre


def _busemann_terms(
    y: NDArray[np.float64], points: NDArray[np.float64], weights: NDArray[np.float64]
) -> tuple[float, NDArray[np.float64], NDArray[np.float64]]:
    "Value, gradient and Hessian of F(y) = Σ a_i b_{x_i}(y) in the ball model."
    d = 1 - y @ y
    diff = y - points
    q = np.einsum("ij,ij->i", diff, diff)
    total = weights.sum()
    value = float(weights @ np.log(q) - total * np.log(d))
    grad = 2 * (weights / q) @ diff + 2 * total * y / d
    hess = (
        2 * np.sum(weights / q) * np.eye(3)
        - 4 * np.einsum("i,ij,ik->jk", weights / q**2, diff, diff)
        + total * (2 * np.eye(3) / d + 4 * np.outer(y, y) / d**2)
    )
    return value, grad, hess


def _newton_direction(grad: NDArray[np.float64], hess: NDArray[np.float64]) -> NDArray[np.float64]:
    try:
        step = -linalg.cho_solve(linalg.cho_factor(hess), grad)
    except linalg.LinAlgError:
        return -grad
    if grad @ step >= 0:
        return -grad
    return step


def dunkl_inner_product(
    weighted: WeightedLines,
    grad_tol: float = NEWTON_GRAD_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> HermitianForm2:
    """Unit-determinant positive form making Σ a_i P_i a multiple of the identity.

    Damped Newton on the ball model, started from half the weighted average of the sphere
    images of the lines.
    """
    if not stability_check(weighted):
        raise ArrangementError(f"Weights {weighted.weights} violate the stability inequality")

    weights = np.abs(np.asarray(weighted.weights))
    points = np.array([line_to_sphere(line).array for line in weighted.lines])
    y = 0.5 * (weights @ points) / weights.sum()

    value, grad, hess = _busemann_terms(y, points, weights)
    iteration = 0
    for iteration in range(max_iter):
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < grad_tol:
            break
        step = _newton_direction(grad, hess)
        slope = float(grad @ step)
        t = 1.0
        while True:
            trial = y + t * step
            if trial @ trial < (1 - BALL_GUARD) ** 2:
                trial_value, trial_grad, trial_hess = _busemann_terms(trial, points, weights)
                # Near the minimum the Armijo test is below rounding of F.
                if grad_norm < _FULL_STEP_GRAD or trial_value <= value + _ARMIJO * t * slope:
                    break
            t /= 2
            if t < 1e-16:
                raise ConvergenceError(
                    f"Line search stalled at iteration {iteration} (|grad F| = {grad_norm:.3e})"
                )
        y, value, grad, hess = trial, trial_value, trial_grad, trial_hess
    else:
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm > 1e3 * grad_tol:
            raise ConvergenceError(
                f"Barycentre solver did not converge in {max_iter} iterations "
                + f"(|grad F| = {grad_norm:.3e})"
            )
        logger.warning(f"Barycentre solver stopped at |grad F| = {grad_norm:.3e}")

    logger.debug(f"Barycentre at {y} after {iteration} iterations")
    return ball_to_hyperboloid(y)


def barycenter_residual(weighted: WeightedLines, form: HermitianForm2) -> float:
    "‖Σ a_i x(A L_i)‖ for the square root A of the form; zero at the Dunkl inner product."
    root = positive_sqrt(form)
    images = np.array([vector_to_sphere(root @ line.vector) for line in weighted.lines])
    return float(np.linalg.norm(np.asarray(weighted.weights) @ images))


# endregion


def dunkl_connection(weighted: WeightedLines) -> StandardConnection:
    form = dunkl_inner_product(weighted)
    residues = [
        a * projection_matrix(line, form) for line, a in zip(weighted.lines, weighted.weights)
    ]
    return StandardConnection.from_residues(weighted.lines, residues)


def dunkl_family(lam: complex, a: float) -> StandardConnection:
    "Residues a·P_i for the lines of slope 0, ∞, 1 and λ, with the unit-weight inner product."
    weighted = WeightedLines.of((0, INF, 1, lam), (1, 1, 1, 1))
    form = dunkl_inner_product(weighted)
    residues = [a * projection_matrix(line, form) for line in weighted.lines]
    return StandardConnection.from_residues(weighted.lines, residues)


def n_line_connection(
    lam: complex, a: float, extra_slopes: Sequence[complex], t: float
) -> StandardConnection:
    "Dunkl connection of the lines 0, 1, ∞, λ (weight a) and extra lines (weight t)."
    slopes: list[ExtComplex] = [0, 1, INF, lam, *extra_slopes]
    weights = [a] * 4 + [t] * len(extra_slopes)
    return dunkl_connection(WeightedLines.of(slopes, weights))


def three_line_connection(a1: complex, a2: complex, a3: complex) -> StandardConnection:
    "The unique standard connection on {z=0}, {w=0}, {z=w} with residue traces a1, a2, a3."
    residues = [
        [[a1, 0], [(a1 + a3 - a2) / 2, 0]],
        [[0, (a2 + a3 - a1) / 2], [0, a2]],
        [[(a2 + a3 - a1) / 2, (a1 - a2 - a3) / 2], [(a2 - a1 - a3) / 2, (a1 + a3 - a2) / 2]],
    ]
    return StandardConnection.from_residues((ProjLine(0), ProjLine(INF), ProjLine(1)), residues)


def b_parameters(a1: float, a2: float, a3: float) -> tuple[float, float, float]:
    return ((a2 + a3 - a1) / 2, (a1 + a3 - a2) / 2, (a1 + a2 - a3) / 2)


def three_line_dunkl_form(a1: float, a2: float, a3: float) -> NDArray[np.float64]:
    "The Hermitian matrix making the three-line residues self-adjoint."
    b1, b2, b3 = b_parameters(a1, a2, a3)
    return np.array([[b2 * (b1 + b3), -b1 * b2], [-b1 * b2, b1 * (b2 + b3)]])


def dunkl_criterion_3(a1: float, a2: float, a3: float) -> tuple[bool, float]:
    b1, b2, b3 = b_parameters(a1, a2, a3)
    det = b1 * b2 * b3 * (b1 + b2 + b3)
    return det > 0, det


_DIHEDRAL_RESIDUES = np.array(
    [
        [[1, 0], [0, 0]],
        [[0, 0], [0, 1]],
        [[0.5, -0.5], [-0.5, 0.5]],
        [[0.5, 0.5], [0.5, 0.5]],
    ],
    dtype=np.complex128,
)


def dihedral_connection(a: float) -> StandardConnection:
    "Dunkl connection of the B₂ arrangement 0, ∞, 1, -1 with equal weights a."
    lines = (ProjLine(0), ProjLine(INF), ProjLine(1), ProjLine(-1))
    return StandardConnection.from_residues(lines, a * _DIHEDRAL_RESIDUES)


def b2_pullback_residual(a: float, sample_points: Sequence[ArrayLike]) -> float:
    """Largest entry of Ω - (G⁻¹ F*Ω̃ G - G⁻¹dG) over the samples.

    F(z, w) = (z², w²), G = diag(2z, 2w) and Ω̃ is the three-line connection with traces
    ((1+a)/2, (1+a)/2, a).
    """
    dihedral = dihedral_connection(a)
    target = three_line_connection((1 + a) / 2, (1 + a) / 2, a)
    worst = 0.0
    for point in sample_points:
        z, w = np.asarray(point, dtype=np.complex128).reshape(2)
        if min(abs(z), abs(w)) < 1e-12:
            raise PoleError(f"Sample ({z}, {w}) lies on a coordinate axis")
        omega = dihedral.connection_matrix((z, w))
        target_z, target_w = target.connection_matrix((z * z, w * w))
        # F* sends dx, dy to 2z dz, 2w dw.
        pulled = (2 * z * target_z, 2 * w * target_w)
        g = np.diag([2 * z, 2 * w])
        g_inv = np.diag([1 / (2 * z), 1 / (2 * w)])
        d_g = (np.diag([1 / z, 0]), np.diag([0, 1 / w]))
        for own, pull, dg in zip(omega, pulled, d_g):
            gauge = g_inv @ pull @ g - dg
            worst = max(worst, float(np.abs(own - gauge).max()))
    return worst

