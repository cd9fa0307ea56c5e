import json
from pathlib import Path

import pytest

from configs import (
    A_RANGE,
    DEFAULT_VALUES,
    EXTRA_WEIGHT,
    GRID,
    JOBS,
    LAMBDA_IM,
    LAMBDA_RE,
    PROFILE,
    SEED,
    Config,
)
from errors import ConfigError
from file_system import manifest_path


def test_defaults() -> None:
    cfg = Config()
    assert cfg == DEFAULT_VALUES
    assert cfg.a_values() == [0.2, 0.3, 0.4]
    assert len(cfg.lambda_grid()) == 49
    cfg.validate()


def test_lambda_grid_runs_real_part_fastest() -> None:
    cfg = Config({LAMBDA_RE: [0, 1], LAMBDA_IM: [2, 3], GRID: [2, 2]})
    assert cfg.lambda_grid() == [2j, 1 + 2j, 3j, 1 + 3j]
    single = Config({LAMBDA_RE: [-1, 5], LAMBDA_IM: [0, 4], GRID: [1, 1]})
    assert single.lambda_grid() == [-1 + 0j]


def test_unknown_key_is_rejected() -> None:
    cfg = Config()
    with pytest.raises(ConfigError):
        cfg["lambda"] = 2
    with pytest.raises(ConfigError):
        _ = Config({"grid_size": 3})


def test_defaults_are_not_shared() -> None:
    cfg = Config()
    cfg[GRID].append(3)
    assert DEFAULT_VALUES[GRID] == [7, 7]
    assert Config()[GRID] == [7, 7]


def test_load_layers_file_then_overrides(tmp_path: Path) -> None:
    path = tmp_path / "scan.json"
    _ = path.write_text(json.dumps({SEED: 5, GRID: [3, 4]}), "utf-8")
    cfg = Config.load(path, {GRID: [2, 2], JOBS: None}, user_file=None)
    assert cfg[SEED] == 5
    assert cfg[GRID] == [2, 2]
    assert cfg[JOBS] == DEFAULT_VALUES[JOBS]


def test_load_reads_user_file_first(tmp_path: Path) -> None:
    user = tmp_path / "user.json"
    _ = user.write_text(json.dumps({SEED: 9, JOBS: 3}), "utf-8")
    explicit = tmp_path / "scan.json"
    _ = explicit.write_text(json.dumps({SEED: 4}), "utf-8")
    cfg = Config.load(explicit, user_file=user)
    assert cfg[SEED] == 4
    assert cfg[JOBS] == 3


def test_load_unwraps_a_manifest(tmp_path: Path) -> None:
    cfg = Config({SEED: 11, A_RANGE: [0.25, 0.25, 0.1]})
    out = tmp_path / "scan.csv"
    _ = manifest_path(out).write_text(json.dumps({"config": dict(cfg), "rows": 3}), "utf-8")
    loaded = Config.load(manifest_path(out), user_file=None)
    assert loaded[SEED] == 11
    assert loaded.a_values() == [0.25]


def test_save_and_load(tmp_path: Path) -> None:
    path = tmp_path / "nested" / "cfg.json"
    Config({SEED: 3}).save(path)
    assert Config.load(path, user_file=None)[SEED] == 3


def test_missing_file_and_bad_json(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        _ = Config.load(tmp_path / "absent.json", user_file=None)
    broken = tmp_path / "broken.json"
    _ = broken.write_text("{grid: 3", "utf-8")
    with pytest.raises(ConfigError):
        _ = Config.load(broken, user_file=None)
    listed = tmp_path / "list.json"
    _ = listed.write_text("[1, 2]", "utf-8")
    with pytest.raises(ConfigError):
        _ = Config.load(listed, user_file=None)


@pytest.mark.parametrize(
    "overrides",
    [
        {GRID: [0, 3]},
        {GRID: [3]},
        {LAMBDA_RE: [2, -2]},
        {A_RANGE: [0.2, 0.4]},
        {A_RANGE: [0.2, 0.4, 0]},
        {A_RANGE: [0.4, 0.2, 0.1]},
        {PROFILE: "five-line"},
        {JOBS: 0},
        {PROFILE: "n-line", EXTRA_WEIGHT: -0.05},
        {PROFILE: "n-line", EXTRA_WEIGHT: 2.0},
    ],
)
def test_validation_errors(overrides) -> None:
    with pytest.raises(ConfigError):
        _ = Config.load(overrides=overrides, user_file=None)
