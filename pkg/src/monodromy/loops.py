"""Keyhole loops around the punctures of a probe line.

Loops are listed clockwise as seen from the basepoint, starting after the widest empty
angular gap; collinear poles are listed nearest first. A spoke to a pole passes poles
listed before it on its left and poles listed after it on its right, detouring on a
semicircle of the keyhole radius where needed. With this order the product M_1···M_n of
the transports is the transport around a large positive circle.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errors import PoleError

from .fuchsian import FuchsianSystem

logger = logging.getLogger(__name__)

CIRCLE_VERTICES = 64
DETOUR_VERTICES = 24
_ANGLE_DIGITS = 12

type Side = Literal["left", "right"]


@dataclass(frozen=True, eq=False)
class LoopPath:
    vertices: NDArray[np.complex128]
    target: int
    counter_clockwise: bool = True

    def __post_init__(self) -> None:
        if self.vertices[0] != self.vertices[-1]:
            raise PoleError(f"Loop around pole {self.target} is not closed")

    def winding_number(self, point: complex) -> int:
        rel = self.vertices - point
        turns = np.angle(rel[1:] / rel[:-1]).sum() / (2 * np.pi)
        return int(round(turns))

    def min_distance(self, points: ArrayLike) -> float:
        "Smallest distance from the polyline to any of the points."
        pts = np.asarray(points, dtype=np.complex128).reshape(-1, 1)
        a, b = self.vertices[:-1], self.vertices[1:]
        d = b - a
        length2 = np.maximum(np.abs(d) ** 2, 1e-300)
        s = np.clip(((pts - a) * np.conj(d)).real / length2, 0, 1)
        return float(np.abs(pts - (a + s * d)).min())

    def reversed(self) -> "LoopPath":
        return LoopPath(self.vertices[::-1].copy(), self.target, not self.counter_clockwise)

    def refined(self, factor: int = 2) -> "LoopPath":
        "Same loop with every edge split into `factor` pieces."
        a, b = self.vertices[:-1], self.vertices[1:]
        steps = np.arange(factor) / factor
        inner = (a[:, None] + steps[None, :] * (b - a)[:, None]).reshape(-1)
        return LoopPath(np.append(inner, self.vertices[-1]), self.target, self.counter_clockwise)


def _arc(center: complex, start: complex, sweep: float, count: int) -> NDArray[np.complex128]:
    "Points center + (start - center)·e^{iθ}, θ from 0 to sweep, endpoints included."
    theta = np.linspace(0, sweep, count + 1)
    return center + (start - center) * np.exp(1j * theta)


def detour_polyline(
    start: complex,
    end: complex,
    obstacles: ArrayLike,
    radius: float,
    sides: Sequence[Side] | None = None,
) -> NDArray[np.complex128]:
    """Straight path start → end with a semicircular detour around each obstacle closer
    than `radius` to it; an obstacle is kept on the given side of the direction of travel
    ("left" by default, i.e. the detour runs counter-clockwise around it)."""
    pts = np.asarray(obstacles, dtype=np.complex128).reshape(-1)
    chosen: Sequence[Side] = sides if sides is not None else ["left"] * pts.shape[0]
    delta = end - start
    length = abs(delta)
    if length == 0:
        return np.array([start], dtype=np.complex128)
    u = delta / length

    blockers: list[tuple[float, Side]] = []
    for q, side in zip(pts, chosen):
        rel = (q - start) / u
        if radius <= rel.real <= length - radius and abs(rel.imag) < radius:
            blockers.append((float(rel.real), side))

    vertices: list[complex] = [start]
    for along, side in sorted(blockers):
        entry = start + (along - radius) * u
        sweep = np.pi if side == "left" else -np.pi
        arc = _arc(start + along * u, entry, sweep, DETOUR_VERTICES)
        vertices.extend(complex(v) for v in arc)
    vertices.append(end)
    return np.array(vertices, dtype=np.complex128)


def angular_order(basepoint: complex, poles: ArrayLike) -> list[int]:
    "Clockwise order of the poles seen from the basepoint, nearest first on ties."
    rel = np.asarray(poles, dtype=np.complex128) - basepoint
    angles = np.mod(np.angle(rel), 2 * np.pi)
    if rel.shape[0] == 1:
        return [0]
    ordered = np.sort(angles)
    gaps = np.diff(np.append(ordered, ordered[0] + 2 * np.pi))
    widest = int(np.argmax(gaps))
    cut = ordered[widest] + gaps[widest] / 2
    measured = np.round(np.mod(angles - cut, 2 * np.pi), _ANGLE_DIGITS)
    distance = np.abs(rel)
    return sorted(range(rel.shape[0]), key=lambda i: (-measured[i], distance[i]))


def keyhole_radius(system: FuchsianSystem) -> float:
    return 0.25 * min(system.min_pole_distance, system.basepoint_clearance)


def canonical_loops(system: FuchsianSystem, radius: float | None = None) -> list[LoopPath]:
    auto = keyhole_radius(system)
    r = auto if radius is None else radius
    pair = system.closest_pair()
    if r > auto * (1 + 1e-12):
        raise PoleError(
            f"Keyhole radius {r:.3e} too large for poles {pair} (limit {auto:.3e})", pair
        )
    if r < 1e-12 * max(1.0, float(np.abs(system.poles).max())):
        raise PoleError(f"poles {pair} too close for a keyhole loop", pair)

    t0 = system.basepoint
    order = angular_order(t0, system.poles)
    loops: list[LoopPath] = []
    for rank, target in enumerate(order):
        pole = complex(system.poles[target])
        u = (pole - t0) / abs(pole - t0)
        others = [i for i in order if i != target]
        sides: list[Side] = ["left" if order.index(i) < rank else "right" for i in others]
        spoke = detour_polyline(t0, pole - r * u, system.poles[others], r, sides)
        circle = _arc(pole, pole - r * u, 2 * np.pi, CIRCLE_VERTICES)
        circle[-1] = spoke[-1]
        vertices = np.concatenate([spoke, circle[1:], spoke[::-1][1:]])
        loop = LoopPath(vertices, target)
        _check_loop(loop, system, r)
        loops.append(loop)
    logger.debug(f"Built {len(loops)} keyhole loops of radius {r:.3e}, order {order}")
    return loops


def _check_loop(loop: LoopPath, system: FuchsianSystem, radius: float) -> None:
    for i, pole in enumerate(system.poles):
        expected = 1 if i == loop.target else 0
        if loop.winding_number(complex(pole)) != expected:
            raise PoleError(f"Loop around pole {loop.target} winds wrongly around pole {i}")
    if loop.min_distance(system.poles) < 0.5 * radius:
        raise PoleError(f"Loop around pole {loop.target} passes too close to a pole")
