import logging
from dataclasses import dataclass
from functools import reduce
from itertools import combinations

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from dunkl import StandardConnection
from errors import PoleError
from herm_geom import INF, ProjLine

from .fuchsian import FuchsianSystem, Probe, restrict_to_line
from .integrator import transport_polyline
from .loops import LoopPath, canonical_loops

logger = logging.getLogger(__name__)

INTEGER_TOL = 1e-9
EIGENVALUE_TOL = 1e-6
INVARIANT_LINE_TOL = 1e-7
PROBE_ATTEMPTS = 6
ORDERING_CONVENTION = "clockwise from the widest gap, nearest first; M_1···M_n = exp(2πic)·Id"


def distance_to_integers(x: float) -> float:
    return abs(x - round(x))


@dataclass(frozen=True, eq=False)
class MonodromyRep:
    generators: NDArray[np.complex128]
    "M_1..M_n, shape (n, 2, 2), in loop order."
    c: complex
    traces: tuple[complex, ...]
    "Residue trace of the line behind each generator."
    line_indices: tuple[int, ...]
    probe: Probe
    poles: NDArray[np.complex128]
    loops: tuple[LoopPath, ...] = ()
    ordering: str = ORDERING_CONVENTION

    @property
    def n(self) -> int:
        return int(self.generators.shape[0])

    @property
    def basepoint(self) -> NDArray[np.complex128]:
        return self.probe.basepoint

    @property
    def resonant(self) -> bool:
        return any(distance_to_integers(complex(a).real) < INTEGER_TOL
                   and abs(complex(a).imag) < INTEGER_TOL for a in self.traces)

    def product(self) -> NDArray[np.complex128]:
        return reduce(np.matmul, self.generators, np.eye(2, dtype=np.complex128))

    def eigenvalue_defects(self) -> list[float | None]:
        "Distance of each spectrum to {1, exp(2πi a_i)}; None for integral a_i."
        defects: list[float | None] = []
        for m, a in zip(self.generators, self.traces):
            a = complex(a)
            if distance_to_integers(a.real) < INTEGER_TOL and abs(a.imag) < INTEGER_TOL:
                defects.append(None)
                continue
            expected = np.array([1, np.exp(2j * np.pi * a)])
            found = np.linalg.eigvals(m)
            direct = np.abs(found - expected).max()
            swapped = np.abs(found - expected[::-1]).max()
            defects.append(float(min(direct, swapped)))
        return defects

    def conjugated(self, g: ArrayLike) -> "MonodromyRep":
        "The representation G⁻¹ M_i G."
        gm = np.asarray(g, dtype=np.complex128).reshape(2, 2)
        g_inv = np.linalg.inv(gm)
        return MonodromyRep(
            generators=np.array([g_inv @ m @ gm for m in self.generators]),
            c=self.c,
            traces=self.traces,
            line_indices=self.line_indices,
            probe=self.probe,
            poles=self.poles,
            loops=self.loops,
            ordering=self.ordering,
        )

    def by_line(self, line_index: int) -> NDArray[np.complex128]:
        return self.generators[self.line_indices.index(line_index)]


def transport(system: FuchsianSystem, loop: LoopPath) -> NDArray[np.complex128]:
    return transport_polyline(loop.vertices, system.poles, system.residues)


def _system_for(conn: StandardConnection, probe: Probe | None) -> tuple[FuchsianSystem, Probe]:
    if probe is not None:
        return restrict_to_line(conn, probe.direction, probe.basepoint), probe
    last_error: PoleError | None = None
    for attempt in range(PROBE_ATTEMPTS):
        candidate = Probe.default(attempt)
        try:
            return restrict_to_line(conn, candidate.direction, candidate.basepoint), candidate
        except PoleError as e:
            logger.warning(f"Default probe attempt {attempt} is degenerate: {e}")
            last_error = e
    assert last_error is not None
    raise last_error


def monodromy_rep(
    conn: StandardConnection, probe: Probe | None = None, radius: float | None = None
) -> MonodromyRep:
    system, used = _system_for(conn, probe)
    loops = canonical_loops(system, radius)
    generators = np.array([transport(system, loop) for loop in loops])
    traces = conn.traces
    rep = MonodromyRep(
        generators=generators,
        c=conn.c,
        traces=tuple(complex(traces[loop.target]) for loop in loops),
        line_indices=tuple(system.line_indices[loop.target] for loop in loops),
        probe=used,
        poles=system.poles,
        loops=tuple(loops),
    )
    defects = [d for d in rep.eigenvalue_defects() if d is not None]
    if rep.resonant:
        logger.debug("Resonant residue traces; eigenvalue check skipped for integral ones")
    if defects and max(defects) > EIGENVALUE_TOL:
        logger.warning(f"Generator spectra off by {max(defects):.3e}")
    residual = product_relation_residual(rep)
    if residual > EIGENVALUE_TOL:
        logger.warning(f"Product relation residual {residual:.3e}")
    return rep


def product_relation_residual(rep: MonodromyRep) -> float:
    "‖M_1···M_n - exp(2πic)·Id‖ in the Frobenius norm."
    target = np.exp(2j * np.pi * rep.c) * np.eye(2)
    return float(np.linalg.norm(rep.product() - target))


# region irreducibility


@dataclass(frozen=True)
class SubsetDifference:
    subset: tuple[int, ...]
    value: float
    distance_to_even: float
    positive_even: bool


@dataclass(frozen=True)
class IrreducibilityReport:
    integer_distances: tuple[float, ...]
    subset_differences: tuple[SubsetDifference, ...]
    sum_nonzero: bool
    no_dominant_weight: bool

    @property
    def non_integral(self) -> bool:
        "Every a_i lies off the integers."
        return all(d > INTEGER_TOL for d in self.integer_distances)

    @property
    def differences_off_even(self) -> bool:
        return all(s.distance_to_even > INTEGER_TOL for s in self.subset_differences)

    @property
    def irreducible_by_parity(self) -> bool:
        "Both the non-integrality and the subset-difference conditions hold."
        return self.non_integral and self.differences_off_even

    @property
    def irreducible_unless_positive_even(self) -> bool:
        "Irreducible when no subset difference is a positive even integer."
        return (
            self.sum_nonzero
            and self.no_dominant_weight
            and not any(s.positive_even for s in self.subset_differences)
        )


def irreducibility_conditions(a: ArrayLike) -> IrreducibilityReport:
    values = np.asarray(a, dtype=float).reshape(-1)
    n = values.shape[0]
    if n > 20:
        raise ValueError(f"Subset scan limited to 20 weights, got {n}")
    total = float(values.sum())
    differences: list[SubsetDifference] = []
    for size in range(n + 1):
        for subset in combinations(range(n), size):
            inside = float(values[list(subset)].sum())
            value = 2 * inside - total
            distance = abs(value - 2 * round(value / 2))
            differences.append(
                SubsetDifference(subset, value, distance, distance < INTEGER_TOL and value > 0.5)
            )
    return IrreducibilityReport(
        integer_distances=tuple(distance_to_integers(float(x)) for x in values),
        subset_differences=tuple(differences),
        sum_nonzero=abs(total) > INTEGER_TOL,
        no_dominant_weight=all(abs(2 * x - total) > INTEGER_TOL for x in values),
    )


@dataclass(frozen=True)
class ReducibilityReport:
    line: ProjLine | None
    defective_generator: bool = False


def _wedge_defect(m: NDArray[np.complex128], v: NDArray[np.complex128]) -> float:
    mv = m @ v
    norm = np.linalg.norm(mv) * np.linalg.norm(v)
    if norm == 0:
        return 0.0
    return float(abs(mv[0] * v[1] - mv[1] * v[0]) / norm)


def _eigenlines(m: NDArray[np.complex128]) -> list[NDArray[np.complex128]]:
    "Unit spanning vectors of the distinct eigenlines, each from the null space of m - μ."
    lines: list[NDArray[np.complex128]] = []
    for mu in np.linalg.eigvals(m):
        _, _, vh = linalg.svd(m - mu * np.eye(2))
        v = vh[-1].conj()
        if all(abs(v[0] * w[1] - v[1] * w[0]) > INVARIANT_LINE_TOL for w in lines):
            lines.append(v)
    return lines


def reducibility_detect(rep: MonodromyRep) -> ReducibilityReport:
    "Common invariant line of all generators, tested on the eigenvectors of one generator."
    pivot = None
    for m in rep.generators:
        if np.linalg.norm(m - np.trace(m) / 2 * np.eye(2)) > INVARIANT_LINE_TOL:
            pivot = m
            break
    if pivot is None:
        logger.info("All generators are scalar; every line is invariant")
        return ReducibilityReport(ProjLine(INF))

    candidates = _eigenlines(pivot)
    defective = len(candidates) == 1
    if defective:
        logger.info("Pivot generator is not diagonalizable; testing its only eigenline")
    for v in candidates:
        if all(_wedge_defect(m, v) < INVARIANT_LINE_TOL for m in rep.generators):
            return ReducibilityReport(ProjLine.from_vector(v), defective)
    return ReducibilityReport(None, defective)


# endregion
