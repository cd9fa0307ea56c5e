from abc import ABC, abstractmethod
from typing import Self

from configs import Config
from dunkl import StandardConnection


class WeightProfile(ABC):
    name: str | None = None
    "Name of the weight profile, as written in the `profile` config key."

    @classmethod
    @abstractmethod
    def from_config(cls, cfg: Config) -> Self: ...

    @abstractmethod
    def weights(self, a: float) -> tuple[float, ...]: ...

    @abstractmethod
    def connection(self, lam: complex, a: float) -> StandardConnection: ...
