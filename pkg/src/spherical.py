"""Spherical cone metrics on CP¹ induced by a unitary standard connection.

A positive flat Hermitian form h and the Euler field E = x/(1-c) define on CP¹ the metric
g = 4·h(V, V)/h(E, E), where V lifts a chart tangent vector h-orthogonally to the fibre.
The metric has curvature 1 and cone angle 2π(1 - a_i) at the point of the line L_i.
"""

import logging
import threading
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Final, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize

from dunkl import StandardConnection
from errors import FlatnessError, PoleError
from flat_forms import flatness_report, q_operator
from herm_geom import ExtComplex, HermitianForm2, is_infinite
from monodromy import MonodromyRep, Probe, detour_polyline, monodromy_rep, transport_along

logger = logging.getLogger(__name__)

FLATNESS_TOL = 1e-7
CONE_POINT_TOL = 1e-12
RING_RADII: Final = (1e-3, 1e-2)
RING_COUNT = 6
RING_ANGLES = 8
RING_CLEARANCE = 2.0
"Other cone points must be this many outer ring radii away."

type ChartName = Literal["finite", "infinity"]


@dataclass(frozen=True, eq=False)
class Chart:
    "The affine line ξ ↦ b0 + ξ·d of C², meeting every line through 0 except C·d."

    name: ChartName
    base: NDArray[np.complex128]
    direction: NDArray[np.complex128]

    def lift(self, xi: complex) -> NDArray[np.complex128]:
        return self.base + xi * self.direction

    def coordinate(self, x: ArrayLike) -> complex:
        v = np.asarray(x, dtype=np.complex128).reshape(2)
        along = complex(np.conj(self.base) @ v)
        if along == 0:
            raise PoleError(f"Point {v} is at infinity in the {self.name} chart")
        return complex(np.conj(self.direction) @ v) / along

    def poles(self, conn: StandardConnection) -> dict[int, complex]:
        "Chart coordinate of each line met by the chart, keyed by line index."
        found: dict[int, complex] = {}
        for i, form in enumerate(conn.linear_forms):
            along = complex(form @ self.direction)
            if along != 0:
                found[i] = -complex(form @ self.base) / along
        return found


CHARTS: Final[dict[ChartName, Chart]] = {
    "finite": Chart(
        "finite", np.array([0, 1], dtype=np.complex128), np.array([1, 0], dtype=np.complex128)
    ),
    "infinity": Chart(
        "infinity", np.array([1, 0], dtype=np.complex128), np.array([0, 1], dtype=np.complex128)
    ),
}


def chart_of_point(point: ExtComplex) -> tuple[Chart, complex]:
    "Chart and coordinate of the point of CP¹ with the given slope."
    if is_infinite(point):
        return CHARTS["infinity"], 0j
    return CHARTS["finite"], complex(point)


@dataclass(frozen=True, eq=False)
class TransportedForm:
    endpoint: NDArray[np.complex128]
    form: HermitianForm2
    path: tuple[NDArray[np.complex128], ...]


@dataclass(frozen=True)
class ConeMetricSample:
    xi: complex
    phi: float
    "Conformal factor: the metric is φ²|dξ|²."
    chart: ChartName = "finite"


def flatness_residual(rep: MonodromyRep, form: HermitianForm2) -> float:
    "Largest ‖M†HM - H‖/‖H‖ over the generators."
    h = form.matrix
    norm = float(np.linalg.norm(h))
    return max(float(np.linalg.norm(m.conj().T @ h @ m - h)) / norm for m in rep.generators)


def _push_form(h: NDArray[np.complex128], y: NDArray[np.complex128]) -> NDArray[np.complex128]:
    "Y⁻†·H·Y⁻¹, the form carried along a frame transport Y."
    y_inv = np.linalg.inv(y)
    pushed = y_inv.conj().T @ h @ y_inv
    return (pushed + pushed.conj().T) / 2


def transport_form(
    conn: StandardConnection,
    form: HermitianForm2,
    path: Sequence[ArrayLike],
    rep: MonodromyRep | None = None,
) -> TransportedForm:
    """Carry the flat form given at path[0] to the end of the polyline.

    The form is checked against the monodromy based at path[0] first; pass `rep` to reuse
    one that was computed there already.
    """
    points = tuple(np.asarray(p, dtype=np.complex128).reshape(2) for p in path)
    if rep is None:
        rep = monodromy_rep(conn, Probe.through(points[0]))
    residual = flatness_residual(rep, form)
    if residual > FLATNESS_TOL:
        raise FlatnessError(f"Form is not flat (residual {residual:.3e})", residual)
    y = transport_along(conn, points)
    result = HermitianForm2.from_matrix(_push_form(form.matrix, y))
    if form.is_positive_definite() and not result.is_positive_definite():
        logger.warning(f"Transported form lost positivity at {points[-1]}")
    return TransportedForm(points[-1], result, points)


def _radial_factors(scale: complex) -> list[complex]:
    "Scalars t with x0·t a path from x0 to scale·x0 that stays off the origin."
    if scale.real < 0 and abs(scale.imag) < 1e-9 * abs(scale):
        return [1, 1j * max(1.0, abs(scale)), scale]
    return [1, scale]


def planar_path(start: complex, end: complex, poles: Sequence[complex]) -> NDArray[np.complex128]:
    "Chart polyline start → end with counter-clockwise detours around the poles in the way."
    pts = np.asarray(poles, dtype=np.complex128).reshape(-1)
    if pts.shape[0] == 0:
        return np.array([start, end], dtype=np.complex128)
    clearance = min(float(np.abs(pts - start).min()), float(np.abs(pts - end).min()))
    radius = 0.5 * clearance
    if pts.shape[0] > 1:
        gaps = np.abs(pts[:, None] - pts[None, :])
        radius = min(radius, 0.25 * float(gaps[~np.eye(pts.shape[0], dtype=bool)].min()))
    return detour_polyline(start, end, pts, radius)


class SphericalMetric:
    "Quotient metric of a unitary connection, with the flat form cached per chart."

    def __init__(
        self,
        conn: StandardConnection,
        form: HermitianForm2 | None = None,
        probe: Probe | None = None,
        rep: MonodromyRep | None = None,
    ):
        traces = conn.traces
        if np.any(np.abs(traces.imag) > 1e-12):
            raise FlatnessError(f"Residue traces must be real, got {traces}")
        if conn.c.real >= 1:
            raise FlatnessError(f"A spherical metric needs c < 1, got c = {conn.c.real:g}")
        if np.any(traces.real >= 1):
            raise FlatnessError(f"A spherical metric needs every a_i < 1, got {traces.real}")

        self.conn = conn
        self.rep = rep if rep is not None else monodromy_rep(conn, probe)
        self.form = self._flat_form(form)
        self._lock = threading.Lock()
        self._chart_bases: dict[ChartName, tuple[complex, NDArray[np.complex128]]] = {}

    @property
    def basepoint(self) -> NDArray[np.complex128]:
        return self.rep.basepoint

    def _flat_form(self, form: HermitianForm2 | None) -> HermitianForm2:
        if form is None:
            report = flatness_report(q_operator(self.rep))
            if report.all_flat:
                # Trivial holonomy: every constant form is flat, take the standard one.
                return HermitianForm2.identity()
            if report.form is None:
                raise FlatnessError(
                    f"No flat Hermitian form (smallest Q eigenvalue {report.min_eig:.3e})",
                    report.min_eig,
                )
            form = report.form
        else:
            residual = flatness_residual(self.rep, form)
            if residual > FLATNESS_TOL:
                raise FlatnessError(f"Form is not flat (residual {residual:.3e})", residual)
        if not (form.det > 0):
            raise FlatnessError(f"Flat form is not definite (det {form.det:.3e})", form.det)
        return form if form.x0 > 0 else form.scaled(-1)

    def _chart_base(self, chart: Chart) -> tuple[complex, NDArray[np.complex128]]:
        "Chart coordinate of the basepoint line and the flat form at its lift."
        with self._lock:
            cached = self._chart_bases.get(chart.name)
        if cached is not None:
            return cached
        x0 = self.basepoint
        xi = chart.coordinate(x0)
        scale = 1 / complex(np.conj(chart.base) @ x0)
        path = [x0 * t for t in _radial_factors(scale)]
        y = transport_along(self.conn, path)
        entry = (xi, _push_form(self.form.matrix, y))
        logger.debug(f"Flat form carried to the {chart.name} chart at ξ = {xi:.6g}")
        with self._lock:
            self._chart_bases[chart.name] = entry
        return entry

    def chart_poles(self, chart: Chart) -> list[complex]:
        return list(chart.poles(self.conn).values())

    def form_at(self, xi: complex, chart: Chart) -> TransportedForm:
        poles = self.chart_poles(chart)
        if poles and min(abs(xi - p) for p in poles) < CONE_POINT_TOL:
            raise PoleError(f"ξ = {xi} is a cone point of the {chart.name} chart")
        start, h_base = self._chart_base(chart)
        planar = planar_path(start, xi, poles)
        lifted = tuple(chart.lift(complex(t)) for t in planar)
        y = transport_along(self.conn, lifted)
        form = HermitianForm2.from_matrix(_push_form(h_base, y))
        return TransportedForm(lifted[-1], form, lifted)

    def phi(self, xi: complex, chart: ChartName = "finite") -> float:
        chosen = CHARTS[chart]
        transported = self.form_at(complex(xi), chosen)
        h = transported.form
        x = transported.endpoint
        d = chosen.direction
        e = x / (1 - self.conn.c.real)
        v = d - (h.inner(d, x) / h.inner(x, x)) * x
        g = 4 * h.inner(v, v).real / h.inner(e, e).real
        return float(np.sqrt(g))

    def sample(self, xi: complex, chart: ChartName = "finite") -> ConeMetricSample:
        return ConeMetricSample(complex(xi), self.phi(xi, chart), chart)

    def samples(
        self, points: Sequence[complex], chart: ChartName = "finite", jobs: int = 1
    ) -> list[ConeMetricSample]:
        "Independent samples, evaluated on a thread pool and returned in input order."
        if jobs <= 1:
            return [self.sample(xi, chart) for xi in points]
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(lambda xi: self.sample(xi, chart), points))


# region curvature and cone angles


def round_conformal_factor(xi: complex) -> float:
    "The unit sphere in stereographic coordinates."
    return 2 / (1 + abs(xi) ** 2)


def gaussian_curvature(phi: Callable[[complex], float], xi: complex, h: float) -> float:
    "K = -Δ log φ / φ² with the fourth-order five-point second difference on each axis."
    weights = (-1.0, 16.0, -30.0, 16.0, -1.0)
    offsets = (-2, -1, 0, 1, 2)
    center = float(np.log(phi(xi)))
    laplacian = 0.0
    for axis in (1.0, 1j):
        total = 0.0
        for weight, k in zip(weights, offsets):
            value = center if k == 0 else float(np.log(phi(xi + k * h * axis)))
            total += weight * value
        laplacian += total / (12 * h * h)
    return -laplacian / phi(xi) ** 2


def conformal_factor(
    conn: StandardConnection,
    form: HermitianForm2 | None,
    xi: complex,
    chart: ChartName = "finite",
    metric: SphericalMetric | None = None,
) -> ConeMetricSample:
    metric = metric if metric is not None else SphericalMetric(conn, form)
    return metric.sample(xi, chart)


def curvature_residual(
    conn: StandardConnection,
    form: HermitianForm2 | None,
    xi: complex,
    h_step: float,
    chart: ChartName = "finite",
    metric: SphericalMetric | None = None,
) -> float:
    "|K - 1| at ξ."
    metric = metric if metric is not None else SphericalMetric(conn, form)
    poles = metric.chart_poles(CHARTS[chart])
    if poles and min(abs(xi - p) for p in poles) <= 4 * h_step:
        raise PoleError(f"Curvature stencil at ξ = {xi} with step {h_step} hits a cone point")
    return abs(gaussian_curvature(lambda z: metric.phi(z, chart), complex(xi), h_step) - 1)


def _ring_model(params: NDArray[np.float64], log_r: NDArray[np.float64]) -> NDArray[np.float64]:
    "β + (α-1)·log r - log(1 + κ·r^{2α}), the ring mean of log φ near a cone point."
    beta, alpha, kappa = params
    return beta + (alpha - 1) * log_r - np.log1p(kappa * np.exp(2 * alpha * log_r))


def cone_angle_estimate(
    conn: StandardConnection,
    form: HermitianForm2 | None,
    point: ExtComplex,
    metric: SphericalMetric | None = None,
) -> float:
    """Cone angle over 2π at the point of CP¹ with the given slope.

    Ring means of log φ remove the harmonic part of the metric; the remaining dependence on
    the radius is fitted with least squares.
    """
    metric = metric if metric is not None else SphericalMetric(conn, form)
    chart, center = chart_of_point(point)
    others = [p for p in metric.chart_poles(chart) if abs(p - center) > CONE_POINT_TOL]
    if others and min(abs(p - center) for p in others) < RING_CLEARANCE * RING_RADII[1]:
        raise PoleError(f"Ring around {point} runs into another cone point")

    radii = np.geomspace(RING_RADII[0], RING_RADII[1], RING_COUNT)
    angles = 2 * np.pi * (np.arange(RING_ANGLES) + 0.5) / RING_ANGLES
    means = np.array(
        [
            np.mean([np.log(metric.phi(center + r * np.exp(1j * t), chart.name)) for t in angles])
            for r in radii
        ]
    )
    log_r = np.log(radii)
    slope, intercept = np.polyfit(log_r, means, 1)
    fit = optimize.least_squares(
        lambda p: _ring_model(p, log_r) - means,
        x0=np.array([intercept, float(np.clip(slope + 1, 0.01, 9.0)), 0.0]),
        bounds=([-np.inf, 1e-3, -0.5], [np.inf, 10.0, np.inf]),
        xtol=1e-14,
        ftol=1e-14,
    )
    alpha = float(fit.x[1])
    logger.debug(f"Cone angle at {point}: linear {slope + 1:.6f}, fitted {alpha:.6f}")
    return alpha


def troyanov_check(alphas: Sequence[float]) -> bool:
    "Whether every 1 - α_j is smaller than the sum of the other 1 - α_i."
    defects = 1 - np.asarray(alphas, dtype=float)
    total = defects.sum()
    return bool(np.all(defects < total - defects))


# endregion
