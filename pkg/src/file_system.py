from pathlib import Path

from version import DISTRIBUTION

CONFIG_FILE = Path.home() / ".config" / DISTRIBUTION / "config.json"

RESULTS_DIR = Path("results").absolute()

MANIFEST_SUFFIX = ".manifest.json"


def manifest_path(out: Path | str) -> Path:
    "Sidecar next to a scan output: `<out>.manifest.json`."
    path = Path(out)
    return path.with_name(path.name + MANIFEST_SUFFIX)
