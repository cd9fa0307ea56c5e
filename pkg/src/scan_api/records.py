import csv
import json
import logging
from collections.abc import Iterable, Mapping
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Final

from configs import SEED, Config
from file_system import manifest_path
from monodromy.representation import ORDERING_CONVENTION
from version import __version__

logger = logging.getLogger(__name__)

COLUMNS: Final = (
    "lambda_re",
    "lambda_im",
    "a",
    "det_q",
    "min_eig_q",
    "kernel_dim",
    "sig_p",
    "sig_q",
    "degenerate",
    "status",
    "runtime_ms",
)

STATUS_OK = "ok"
STATUS_EXCLUDED = "excluded"

_INT_COLUMNS = frozenset({"kernel_dim", "sig_p", "sig_q"})
_BOOL_COLUMNS = frozenset({"degenerate"})


@dataclass(frozen=True)
class ScanRecord:
    lambda_re: float
    lambda_im: float
    a: float
    det_q: float | None = None
    min_eig_q: float | None = None
    kernel_dim: int | None = None
    sig_p: int | None = None
    sig_q: int | None = None
    degenerate: bool | None = None
    status: str = STATUS_OK
    runtime_ms: float | None = None
    margin: float | None = None
    "Smallest over mean Q eigenvalue; kept out of the written columns."

    @property
    def lam(self) -> complex:
        return complex(self.lambda_re, self.lambda_im)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def definite(self) -> bool:
        return self.sig_p is not None and {self.sig_p, self.sig_q} == {0, 2}

    def row(self) -> dict[str, Any]:
        values = asdict(self)
        return {column: values[column] for column in COLUMNS}


def format_field(value: Any) -> str:
    "CSV text of a value: empty for missing, repr for floats."
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_field(name: str, text: str) -> Any:
    if text == "":
        return None
    if name == "status":
        return text
    if name in _BOOL_COLUMNS:
        return text == "true"
    if name in _INT_COLUMNS:
        return int(text)
    return float(text)


def write_csv(records: Iterable[ScanRecord], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COLUMNS)
        for record in records:
            row = record.row()
            writer.writerow([format_field(row[column]) for column in COLUMNS])


def write_jsonl(records: Iterable[ScanRecord], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            _ = f.write(json.dumps(record.row()) + "\n")


def read_records(path: Path) -> list[ScanRecord]:
    "Records back from a CSV or JSON-lines scan output."
    text = path.read_text("utf-8")
    if path.suffix == ".jsonl":
        return [ScanRecord(**json.loads(line)) for line in text.splitlines() if line.strip()]
    reader = csv.DictReader(text.splitlines())
    return [
        ScanRecord(**{name: _parse_field(name, row[name]) for name in COLUMNS}) for row in reader
    ]


def write_manifest(cfg: Config, out: Path, extra: Mapping[str, Any] | None = None) -> Path:
    "Sidecar with everything needed to rerun the scan; loadable with `--config`."
    manifest = {
        "config": dict(cfg),
        "seed": cfg[SEED],
        "version": __version__,
        "tolerances": cfg.tolerances(),
        "columns": list(COLUMNS),
        "generator_ordering": ORDERING_CONVENTION,
        "note": "numeric witness, not a proof",
    }
    if extra:
        manifest.update(extra)
    path = manifest_path(out)
    _ = path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    logger.info(f"Wrote manifest {path}")
    return path
