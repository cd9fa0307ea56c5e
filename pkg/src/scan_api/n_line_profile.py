from collections.abc import Sequence
from typing import Self, override

from configs import EXTRA_WEIGHT, Config
from dunkl import StandardConnection, n_line_connection

from .profile_abc import WeightProfile


class NLineProfile(WeightProfile):
    "Lines 0, 1, ∞, λ with weight a, plus extra lines carrying the small weight t."

    name: str | None = "n-line"

    def __init__(self, extra_slopes: Sequence[complex], t: float) -> None:
        self._extra_slopes: tuple[complex, ...] = tuple(complex(s) for s in extra_slopes)
        self._t: float = float(t)

    @classmethod
    @override
    def from_config(cls, cfg: Config) -> Self:
        return cls(cfg.extra_slopes(), float(cfg[EXTRA_WEIGHT]))

    @property
    def extra_slopes(self) -> tuple[complex, ...]:
        return self._extra_slopes

    @override
    def weights(self, a: float) -> tuple[float, ...]:
        return (a, a, a, a) + (self._t,) * len(self._extra_slopes)

    @override
    def connection(self, lam: complex, a: float) -> StandardConnection:
        return n_line_connection(lam, a, self._extra_slopes, self._t)
