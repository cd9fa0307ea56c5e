import copy
import json
import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Literal, TypedDict, override

import numpy as np

from errors import ConfigError
from file_system import CONFIG_FILE, RESULTS_DIR

logger = logging.getLogger(__name__)


# NOTE: below is just a TypedDict for type hinting. The actual Config dict is `Config`
class T_CONFIG_DATA(TypedDict):
    lambda_re: list[float]
    lambda_im: list[float]
    grid: list[int]
    exclusion_radius: float
    a_range: list[float]
    profile: Literal["four-equal", "n-line"]
    extra_lines: list[list[float]]
    extra_weight: float
    kernel_rel_tol: float
    degenerate_tol: float
    zero_tol: float
    seed: int
    refine_samples: int
    out: str
    jobs: int
    json_rows: bool
    timing: bool


LAMBDA_RE = "lambda_re"
LAMBDA_IM = "lambda_im"
GRID = "grid"
EXCLUSION_RADIUS = "exclusion_radius"
A_RANGE = "a_range"
PROFILE = "profile"
EXTRA_LINES = "extra_lines"
EXTRA_WEIGHT = "extra_weight"
KERNEL_REL_TOL = "kernel_rel_tol"
DEGENERATE_TOL = "degenerate_tol"
ZERO_TOL = "zero_tol"
SEED = "seed"
REFINE_SAMPLES = "refine_samples"
OUT = "out"
JOBS = "jobs"
JSON_ROWS = "json_rows"
TIMING = "timing"

DEFAULT_VALUES: T_CONFIG_DATA = {
    LAMBDA_RE: [-2.0, 2.0],
    LAMBDA_IM: [-2.0, 2.0],
    GRID: [7, 7],
    EXCLUSION_RADIUS: 0.05,
    A_RANGE: [0.2, 0.4, 0.1],
    PROFILE: "four-equal",
    EXTRA_LINES: [[2.0, 1.0]],
    EXTRA_WEIGHT: 0.05,
    KERNEL_REL_TOL: 1e-8,
    DEGENERATE_TOL: 1e-8,
    ZERO_TOL: 1e-8,
    SEED: 0,
    REFINE_SAMPLES: 8,
    OUT: str(RESULTS_DIR / "scan.csv"),
    JOBS: 1,
    JSON_ROWS: False,
    TIMING: False,
}

PROFILE_NAMES = ("four-equal", "n-line")


def _read_json(path: Path) -> dict[str, Any]:
    try:
        data = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    # A scan manifest keeps the config under its own key.
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return data  # pyright: ignore[reportUnknownVariableType]


class Config(dict[str, Any]):
    "Scan configuration: defaults, then the user file, then `--config`, then CLI flags."

    def __init__(self, data: Mapping[str, Any] | None = None) -> None:
        super().__init__(copy.deepcopy(DEFAULT_VALUES))
        if data:
            self.update(data)

    @classmethod
    def load(
        cls,
        path: Path | str | None = None,
        overrides: Mapping[str, Any] | None = None,
        user_file: Path | None = CONFIG_FILE,
    ) -> "Config":
        cfg = cls()
        if user_file is not None and user_file.exists():
            logger.debug(f"Reading user config {user_file}")
            cfg.update(_read_json(user_file))
        if path is not None:
            if not Path(path).exists():
                raise ConfigError(f"Config file {path} does not exist")
            cfg.update(_read_json(Path(path)))
        if overrides:
            cfg.update({k: v for k, v in overrides.items() if v is not None})
        cfg.validate()
        return cfg

    @override
    def __setitem__(self, key: str, value: Any, /) -> None:
        if key not in DEFAULT_VALUES:
            raise ConfigError(f'Unknown config key: "{key}"')
        super().__setitem__(key, value)

    @override
    def update(self, *args: Any, **kwargs: Any) -> None:
        for key, value in dict(*args, **kwargs).items():
            self[key] = value

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        _ = path.write_text(json.dumps(self, indent=4), "utf-8")

    # region derived values

    def a_values(self) -> list[float]:
        start, stop, step = (float(x) for x in self[A_RANGE])
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(count)]

    def axis(self, key: str, count: int) -> list[float]:
        low, high = (float(x) for x in self[key])
        if count == 1:
            return [low]
        return [float(x) for x in np.linspace(low, high, count)]

    def lambda_grid(self) -> list[complex]:
        "Grid points in row order: imaginary part outer, real part inner."
        nx, ny = (int(n) for n in self[GRID])
        return [
            complex(re, im)
            for im in self.axis(LAMBDA_IM, ny)
            for re in self.axis(LAMBDA_RE, nx)
        ]

    def extra_slopes(self) -> list[complex]:
        return [complex(float(re), float(im)) for re, im in self[EXTRA_LINES]]

    def tolerances(self) -> dict[str, float]:
        return {key: float(self[key]) for key in (KERNEL_REL_TOL, DEGENERATE_TOL, ZERO_TOL)}

    # endregion

    def validate(self) -> None:
        if not float(self[EXCLUSION_RADIUS]) > 0:
            raise ConfigError(f"exclusion_radius must be positive, got {self[EXCLUSION_RADIUS]}")
        grid = self[GRID]
        if len(grid) != 2 or min(int(n) for n in grid) < 1:
            raise ConfigError(f"grid must hold two positive sizes, got {grid}")
        for key in (LAMBDA_RE, LAMBDA_IM):
            if len(self[key]) != 2 or float(self[key][0]) > float(self[key][1]):
                raise ConfigError(f"{key} must be [min, max], got {self[key]}")
        a_range = self[A_RANGE]
        if len(a_range) != 3:
            raise ConfigError(f"a_range must be [start, stop, step], got {a_range}")
        if not float(a_range[2]) > 0:
            raise ConfigError(f"a_range step must be positive, got {a_range[2]}")
        if float(a_range[1]) < float(a_range[0]):
            raise ConfigError(f"a_range is empty: {a_range}")
        if self[PROFILE] not in PROFILE_NAMES:
            raise ConfigError(f'Unknown weight profile "{self[PROFILE]}"; known: {PROFILE_NAMES}')
        if int(self[JOBS]) < 1:
            raise ConfigError(f"jobs must be at least 1, got {self[JOBS]}")
        if int(self[REFINE_SAMPLES]) < 0:
            raise ConfigError(f"refine_samples must be non-negative, got {self[REFINE_SAMPLES]}")
        if self[PROFILE] == "n-line":
            self._validate_n_line()

    def _validate_n_line(self) -> None:
        t = float(self[EXTRA_WEIGHT])
        extras = self[EXTRA_LINES]
        if not extras:
            raise ConfigError("The n-line profile needs at least one extra line")
        for a in self.a_values():
            weights = np.array([a] * 4 + [t] * len(extras))
            if np.any(weights == 0) or len({w > 0 for w in weights}) > 1:
                raise ConfigError(f"Weights {weights.tolist()} must be nonzero with one sign")
            magnitudes = np.abs(weights)
            if np.any(magnitudes >= magnitudes.sum() - magnitudes):
                raise ConfigError(f"Weights {weights.tolist()} violate the stability inequality")
