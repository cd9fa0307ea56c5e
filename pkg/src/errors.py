class DunklLabError(Exception):
    "Base class of every error raised by the laboratory."


class GeometryError(DunklLabError, ValueError):
    "Point outside the ball, form not positive definite, singular or non-Hermitian matrix."


class ArrangementError(DunklLabError, ValueError):
    "Invalid line arrangement, weights or Möbius data."


class ConvergenceError(DunklLabError, RuntimeError):
    pass


class PoleError(DunklLabError, ValueError):
    "A probe, loop or path comes too close to the singular lines."

    def __init__(self, message: str, pair: tuple[int, int] | None = None) -> None:
        super().__init__(message)
        self.pair: tuple[int, int] | None = pair


class IntegrationError(DunklLabError, RuntimeError):
    def __init__(self, message: str, status: int) -> None:
        super().__init__(message)
        self.status: int = status


class FlatnessError(DunklLabError, ValueError):
    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual: float | None = residual


class ConfigError(DunklLabError, ValueError):
    pass
