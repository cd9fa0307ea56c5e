"""Parallel transport of Y' = (Σ w_i A_i/(t - ξ_i))·Y along complex polylines.

Each straight segment is integrated in its own real parameter s ∈ [0, 1] with the
Dormand-Prince 5(4) pair. The step never exceeds half the distance to the nearest active
pole. The kernels are plain numpy code so they run with or without numba.
"""

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dunkl import StandardConnection
from errors import IntegrationError, PoleError

from ._jit import optional_njit

logger = logging.getLogger(__name__)

RTOL = 1e-12
ATOL = 1e-12
PATH_CLEARANCE = 1e-9

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_NON_FINITE = 2
STATUS_STEP_BUDGET = 3
_STATUS_MESSAGES = {
    STATUS_UNDERFLOW: "step-size underflow near a pole",
    STATUS_NON_FINITE: "non-finite values in the solution",
    STATUS_STEP_BUDGET: "step budget exhausted",
}

_MIN_STEP = 1e-14
_MAX_STEPS = 200_000
_FIRST_STEP = 0.0625

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@optional_njit(cache=True)
def _nearest_pole(z, poles, weights):
    best = np.inf
    for i in range(poles.shape[0]):
        if weights[i] != 0.0:
            d = abs(z - poles[i])
            if d < best:
                best = d
    return best


@optional_njit(cache=True)
def _derivative(z, dz, y, poles, residues, weights):
    o00 = 0j
    o01 = 0j
    o10 = 0j
    o11 = 0j
    for i in range(poles.shape[0]):
        if weights[i] != 0.0:
            f = dz * weights[i] / (z - poles[i])
            o00 += f * residues[i, 0, 0]
            o01 += f * residues[i, 0, 1]
            o10 += f * residues[i, 1, 0]
            o11 += f * residues[i, 1, 1]
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = o00 * y[0, 0] + o01 * y[1, 0]
    out[0, 1] = o00 * y[0, 1] + o01 * y[1, 1]
    out[1, 0] = o10 * y[0, 0] + o11 * y[1, 0]
    out[1, 1] = o10 * y[0, 1] + o11 * y[1, 1]
    return out


@optional_njit(cache=True)
def _error_norm(y, y_new, err, rtol, atol):
    worst = 0.0
    for r in range(2):
        for c in range(2):
            scale = atol + rtol * max(abs(y[r, c]), abs(y_new[r, c]))
            e = abs(err[r, c]) / scale
            if not (e < np.inf):
                return np.inf
            if e > worst:
                worst = e
    return worst


@optional_njit(cache=True)
def integrate_segment(za, zb, poles, residues, weights, y0, rtol, atol):
    "Transport y0 along the straight segment za → zb; returns (y, status)."
    y = y0.copy()
    dz = zb - za
    length = abs(dz)
    if length == 0.0:
        return y, STATUS_OK

    s = 0.0
    h = _FIRST_STEP
    k1 = _derivative(za, dz, y, poles, residues, weights)
    steps = 0
    while s < 1.0:
        if steps > _MAX_STEPS:
            return y, STATUS_STEP_BUDGET
        steps += 1

        hmax = 0.5 * _nearest_pole(za + s * dz, poles, weights) / length
        if h > hmax:
            h = hmax
        if h < _MIN_STEP:
            return y, STATUS_UNDERFLOW
        final = s + h >= 1.0
        if final:
            h = 1.0 - s

        k2 = _derivative(za + (s + _C2 * h) * dz, dz, y + h * (_A21 * k1), poles, residues, weights)
        k3 = _derivative(
            za + (s + _C3 * h) * dz, dz, y + h * (_A31 * k1 + _A32 * k2), poles, residues, weights
        )
        k4 = _derivative(
            za + (s + _C4 * h) * dz,
            dz,
            y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
            poles,
            residues,
            weights,
        )
        k5 = _derivative(
            za + (s + _C5 * h) * dz,
            dz,
            y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
            poles,
            residues,
            weights,
        )
        k6 = _derivative(
            za + (s + h) * dz,
            dz,
            y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
            poles,
            residues,
            weights,
        )
        y_new = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _derivative(za + (s + h) * dz, dz, y_new, poles, residues, weights)
        err = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        e = _error_norm(y, y_new, err, rtol, atol)
        if e == np.inf:
            return y, STATUS_NON_FINITE

        if e <= 1.0:
            s = 1.0 if final else s + h
            y = y_new
            k1 = k7
            factor = 5.0 if e == 0.0 else min(5.0, 0.9 * e**-0.2)
        else:
            factor = max(0.2, 0.9 * e**-0.2)
        h = h * factor
    return y, STATUS_OK


@optional_njit(cache=True)
def integrate_polyline(vertices, poles, residues, weights, y0, rtol, atol):
    y = y0.copy()
    for k in range(vertices.shape[0] - 1):
        y, status = integrate_segment(
            vertices[k], vertices[k + 1], poles, residues, weights, y, rtol, atol
        )
        if status != STATUS_OK:
            return y, status
    return y, STATUS_OK


def _check_status(status: int, where: str) -> None:
    if status != STATUS_OK:
        message = _STATUS_MESSAGES.get(status, f"status {status}")
        logger.warning(f"Transport failed along {where}: {message}")
        raise IntegrationError(f"Transport failed along {where}: {message}", status)


def transport_polyline(
    vertices: ArrayLike,
    poles: ArrayLike,
    residues: ArrayLike,
    weights: ArrayLike | None = None,
    y0: ArrayLike | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> NDArray[np.complex128]:
    "Fundamental solution of the Fuchsian system along a polyline in the t-plane."
    verts = np.ascontiguousarray(vertices, dtype=np.complex128).reshape(-1)
    pole_arr = np.ascontiguousarray(poles, dtype=np.complex128).reshape(-1)
    res = np.ascontiguousarray(residues, dtype=np.complex128).reshape(-1, 2, 2)
    w = (
        np.ones(pole_arr.shape[0])
        if weights is None
        else np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)
    )
    start = (
        np.eye(2, dtype=np.complex128)
        if y0 is None
        else np.ascontiguousarray(y0, dtype=np.complex128).reshape(2, 2)
    )
    y, status = integrate_polyline(verts, pole_arr, res, w, start, rtol, atol)
    _check_status(int(status), f"a polyline of {verts.shape[0]} vertices")
    return y


def transport_along(
    conn: StandardConnection,
    path: Sequence[ArrayLike],
    y0: ArrayLike | None = None,
    clearance: float = PATH_CLEARANCE,
) -> NDArray[np.complex128]:
    """Frame transport Y along a polyline in C² that avoids the lines of `conn`.

    On a segment x(s) = p + s·d the form dℓ_i/ℓ_i restricts to ds/(s - ξ_i) with
    ξ_i = -ℓ_i(p)/ℓ_i(d); lines parallel to the segment contribute nothing.
    """
    points = [np.asarray(p, dtype=np.complex128).reshape(2) for p in path]
    forms = conn.linear_forms
    y = np.eye(2, dtype=np.complex128) if y0 is None else np.asarray(y0, dtype=np.complex128)
    segment = np.array([0, 1], dtype=np.complex128)
    for k, (p, q) in enumerate(zip(points, points[1:])):
        d = q - p
        at_start = forms @ p
        along = forms @ d
        active = along != 0
        if np.any(~active & (np.abs(at_start) < clearance * max(1.0, float(np.abs(p).max())))):
            raise PoleError(f"Segment {k} runs inside a singular line")
        poles = np.zeros(conn.n, dtype=np.complex128)
        poles[active] = -at_start[active] / along[active]
        # Distance from each pole to the real interval [0, 1].
        gap = np.abs(poles - np.clip(poles.real, 0, 1))
        if np.any(active & (gap < clearance)):
            line = int(np.argmax(active & (gap < clearance)))
            raise PoleError(f"Segment {k} of the path passes too close to line {conn.lines[line]}")
        y, status = integrate_polyline(
            segment,
            poles,
            np.ascontiguousarray(conn.residues),
            active.astype(np.float64),
            np.ascontiguousarray(y),
            RTOL,
            ATOL,
        )
        _check_status(int(status), f"segment {k} of a C² path")
    return y
