"""Hermitian forms preserved by a monodromy representation.

A form H is fixed by M when M†HM = H. In the coordinates (x0, x1, x2, x3) of H this is a
real linear condition, so the forms fixed by every generator are the kernel of the positive
semi-definite operator Q = Σ (R_i - Id)ᵀ(R_i - Id), with R_i the action of M_i.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from errors import FlatnessError, GeometryError
from herm_geom import FORM_BASIS, HermitianForm2
from monodromy import MonodromyRep

logger = logging.getLogger(__name__)

KERNEL_REL_TOL = 1e-8
DEGENERATE_TOL = 1e-8
SIGN_TOL = 1e-10
UNIT_TOL = 1e-7
DISTINCT_TOL = 1e-9
FIXED_LINE_TOL = 1e-7
PAIR_RESIDUAL_TOL = 1e-8
INTEGER_TOL = 1e-9


def _coords_of(m: NDArray[np.complex128]) -> NDArray[np.float64]:
    r, s, t = m[0, 0].real, m[1, 1].real, m[0, 1]
    return np.array([(r + s) / 2, (s - r) / 2, -t.real, -t.imag])


def action_on_forms_matrix(a: ArrayLike) -> NDArray[np.float64]:
    "Real 4×4 matrix R with coords(A†HA) = R·coords(H)."
    m = np.asarray(a, dtype=np.complex128).reshape(2, 2)
    return np.column_stack([_coords_of(m.conj().T @ basis @ m) for basis in FORM_BASIS])


def normalized_form(coords: ArrayLike) -> HermitianForm2:
    """Unit Frobenius norm, sign fixed by the first coordinate that is not ~0.

    The coordinates are tested in the order x0 (the half trace), x1, x2, x3.
    """
    x = np.asarray(coords, dtype=float).reshape(4)
    norm = float(np.sqrt(2) * np.linalg.norm(x))
    if norm == 0:
        raise GeometryError("The zero form cannot be normalized")
    x = x / norm
    for value in x:
        if abs(value) >= SIGN_TOL:
            if value < 0:
                x = -x
            break
    return HermitianForm2.from_coords(x)


@dataclass(frozen=True, eq=False)
class QOperator:
    matrix: NDArray[np.float64]
    generator_count: int

    def __post_init__(self) -> None:
        if np.abs(self.matrix - self.matrix.T).max(initial=0.0) > 1e-12 * max(
            1.0, float(np.abs(self.matrix).max(initial=0.0))
        ):
            raise GeometryError("Q operator is not symmetric")

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def residual(self, form: HermitianForm2) -> float:
        "Quadratic value coords·Q·coords, the summed squared defects of the generators."
        x = form.coords
        return float(x @ self.matrix @ x)


def q_from_generators(generators: Sequence[ArrayLike]) -> QOperator:
    q = np.zeros((4, 4))
    count = 0
    for m in generators:
        d = action_on_forms_matrix(m) - np.eye(4)
        q += d.T @ d
        count += 1
    return QOperator((q + q.T) / 2, count)


def q_operator(rep: MonodromyRep) -> QOperator:
    return q_from_generators(list(rep.generators))


@dataclass(frozen=True, eq=False)
class FlatnessReport:
    eigenvalues: NDArray[np.float64]
    "Eigenvalues of Q, ascending."
    det_q: float
    kernel_dim: int
    form: HermitianForm2 | None
    signature: tuple[int, int] | None
    degenerate: bool
    all_flat: bool
    margin: float
    "Smallest over mean eigenvalue of Q; 0 when a flat form exists."

    @property
    def min_eig(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def definite(self) -> bool:
        return self.signature in ((2, 0), (0, 2))

    def matches_signature(self, expected: tuple[int, int]) -> bool:
        "Compare up to the overall sign of the form."
        if self.signature is None:
            return False
        return self.signature in (expected, expected[::-1])


def form_signature(
    form: HermitianForm2, degenerate_tol: float = DEGENERATE_TOL
) -> tuple[tuple[int, int], bool]:
    "Signature (p, q) of a form of unit Frobenius norm and its degeneracy flag."
    values = linalg.eigvalsh(form.matrix)
    p = int(np.sum(values > degenerate_tol))
    q = int(np.sum(values < -degenerate_tol))
    degenerate = abs(form.det) < degenerate_tol
    return (p, q), degenerate


def flatness_report(
    q: QOperator, rel_tol: float = KERNEL_REL_TOL, degenerate_tol: float = DEGENERATE_TOL
) -> FlatnessReport:
    values, vectors = linalg.eigh(q.matrix)
    threshold = rel_tol * max(1.0, float(values[-1]))
    kernel_dim = int(np.sum(values < threshold))
    trace = float(values.sum())
    margin = 0.0 if trace <= 0 else max(0.0, 4 * float(values[0]) / trace)

    form = None
    signature = None
    degenerate = False
    if kernel_dim >= 1:
        form = normalized_form(vectors[:, 0])
        signature, degenerate = form_signature(form, degenerate_tol)
        logger.debug(f"Flat form {form.coords} with signature {signature}")
    return FlatnessReport(
        eigenvalues=values,
        det_q=float(np.prod(values)),
        kernel_dim=kernel_dim,
        form=form,
        signature=signature,
        degenerate=degenerate,
        all_flat=kernel_dim == 4,
        margin=margin,
    )


def euler_direction_defect(report: FlatnessReport, rep: MonodromyRep) -> float | None:
    "Sine of the angle between the null direction of a degenerate flat form and the basepoint."
    if report.form is None or not report.degenerate:
        return None
    values, vectors = linalg.eigh(report.form.matrix)
    # Null direction: eigenvector of the eigenvalue closest to zero.
    null = vectors[:, int(np.argmin(np.abs(values)))]
    x0 = rep.basepoint
    wedge = abs(null[0] * x0[1] - null[1] * x0[0])
    return float(wedge / (np.linalg.norm(null) * np.linalg.norm(x0)))


# region pairs of generators


def _unit_eigenvalues(m: NDArray[np.complex128], name: str) -> NDArray[np.complex128]:
    values = np.linalg.eigvals(m)
    if np.any(np.abs(np.abs(values) - 1) > UNIT_TOL):
        raise FlatnessError(f"Eigenvalues of {name} are not on the unit circle: {values}")
    if abs(values[0] - values[1]) < DISTINCT_TOL:
        raise FlatnessError(f"Eigenvalues of {name} are not distinct: {values}")
    return values


def invariant_form_of_pair(r: ArrayLike, s: ArrayLike) -> HermitianForm2:
    """The form fixed by both R and S, where the two fixed lines meet in the space of forms.

    R and S must have distinct unit eigenvalues, no eigenvalue in common, and RS⁻¹ must
    have eigenvalue 1.
    """
    rm = np.asarray(r, dtype=np.complex128).reshape(2, 2)
    sm = np.asarray(s, dtype=np.complex128).reshape(2, 2)
    r_values = _unit_eigenvalues(rm, "R")
    s_values = _unit_eigenvalues(sm, "S")
    if np.abs(r_values[:, None] - s_values[None, :]).min() < DISTINCT_TOL:
        raise FlatnessError(f"R and S share an eigenvalue: {r_values} and {s_values}")
    quotient = np.linalg.eigvals(rm @ np.linalg.inv(sm))
    if np.abs(quotient - 1).min() > FIXED_LINE_TOL:
        raise FlatnessError(f"RS⁻¹ has no eigenvalue 1 ({quotient}); the fixed lines are skew")

    stacked = np.vstack(
        [action_on_forms_matrix(rm) - np.eye(4), action_on_forms_matrix(sm) - np.eye(4)]
    )
    _, singular, vt = linalg.svd(stacked)
    form = normalized_form(vt[-1])
    h = form.matrix
    residual = max(
        float(np.linalg.norm(rm.conj().T @ h @ rm - h)),
        float(np.linalg.norm(sm.conj().T @ h @ sm - h)),
    )
    scale = max(1.0, float(np.abs(rm).max()) ** 2, float(np.abs(sm).max()) ** 2)
    if residual > PAIR_RESIDUAL_TOL * scale:
        raise FlatnessError(
            f"No common fixed form (residual {residual:.3e}, σ_min {singular[-1]:.3e})", residual
        )
    return form


def _turns(z: complex) -> float:
    "Argument of a unit number in [0, 1)."
    return float(np.mod(np.angle(z) / (2 * np.pi), 1.0))


def interlace(r1: complex, r2: complex, s1: complex, s2: complex) -> bool:
    "Whether the pairs {r1, r2} and {s1, s2} separate each other on the unit circle."
    points = (r1, r2, s1, s2)
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(points[i] - points[j]) < DISTINCT_TOL:
                raise GeometryError(f"Coincident points on the circle: {points[i]}, {points[j]}")
    start = _turns(r1)
    end = np.mod(_turns(r2) - start, 1.0)

    def inside(z: complex) -> bool:
        return 0 < np.mod(_turns(z) - start, 1.0) < end

    return inside(s1) != inside(s2)


def three_line_eigen_arguments(b1: float, b2: float, b3: float) -> tuple[complex, ...]:
    """Eigenvalues r1, r2 of R = exp(-2πic)·M_1 and s1, s2 of S = M_2⁻¹.

    Their conjugates have arguments b1+b2+b3, b1, 0 and b1+b3 in turns.
    """
    turns = (b1 + b2 + b3, b1, 0.0, b1 + b3)
    return tuple(complex(np.exp(-2j * np.pi * t)) for t in turns)


def _fractional(x: float) -> float:
    return x - np.floor(x)


def signature_formula(b1: float, b2: float, b3: float) -> int:
    """p = ⌊{b1} + {b2} + {b3}⌋.

    The flat form of the three-line connection has signature (p, 2-p).
    """
    b = (b1, b2, b3)
    for x in (*b, sum(b)):
        if abs(x - round(x)) < INTEGER_TOL:
            raise FlatnessError(f"Signature formula needs non-integral b_i and Σb_i, got {b}")
    return int(np.floor(sum(_fractional(x) for x in b)))


# endregion
