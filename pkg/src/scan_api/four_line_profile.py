from typing import Self, override

from configs import Config
from dunkl import StandardConnection, dunkl_family

from .profile_abc import WeightProfile


class FourLineProfile(WeightProfile):
    "Lines of slope 0, ∞, 1, λ, each with residue trace a."

    name: str | None = "four-equal"

    @classmethod
    @override
    def from_config(cls, cfg: Config) -> Self:
        return cls()

    @override
    def weights(self, a: float) -> tuple[float, ...]:
        return (a, a, a, a)

    @override
    def connection(self, lam: complex, a: float) -> StandardConnection:
        return dunkl_family(lam, a)
