"""Scans of the flatness defect over the (λ, a) parameter space."""

import logging
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal

import numpy as np

from configs import (
    DEGENERATE_TOL,
    EXCLUSION_RADIUS,
    GRID,
    JOBS,
    JSON_ROWS,
    KERNEL_REL_TOL,
    LAMBDA_IM,
    LAMBDA_RE,
    OUT,
    REFINE_SAMPLES,
    SEED,
    TIMING,
    ZERO_TOL,
    Config,
)
from dunkl import StandardConnection, dihedral_connection, dunkl_family, n_line_connection
from errors import ConfigError, DunklLabError
from flat_forms import FlatnessReport, flatness_report, q_operator
from monodromy import monodromy_rep

from .profiles import profile_for
from .records import STATUS_EXCLUDED, ScanRecord, write_csv, write_jsonl, write_manifest

logger = logging.getLogger(__name__)

REPLAY_TOL = 1e-9

type Persistence = Literal["everywhere-zero", "isolated-dips", "nowhere-zero"]


def is_excluded(lam: complex, radius: float) -> bool:
    "Whether λ lies within the exclusion radius of 0, 1 or ∞."
    return abs(lam) < radius or abs(lam - 1) < radius or abs(lam) > 1 / radius


def flatness_of(
    conn: StandardConnection,
    rel_tol: float = 1e-8,
    degenerate_tol: float = 1e-8,
) -> FlatnessReport:
    return flatness_report(q_operator(monodromy_rep(conn)), rel_tol, degenerate_tol)


def _record(lam: complex, a: float, report: FlatnessReport) -> ScanRecord:
    sig_p, sig_q = report.signature if report.signature is not None else (None, None)
    return ScanRecord(
        lambda_re=float(lam.real),
        lambda_im=float(lam.imag),
        a=float(a),
        det_q=float(report.det_q),
        min_eig_q=float(report.min_eig),
        kernel_dim=report.kernel_dim,
        sig_p=sig_p,
        sig_q=sig_q,
        degenerate=report.degenerate if report.form is not None else None,
        margin=float(report.margin),
    )


class ScanAPI:
    def __init__(self, cfg: Config) -> None:
        cfg.validate()
        self._cfg: Config = cfg
        self._profile = profile_for(cfg)

    @property
    def config(self) -> Config:
        return self._cfg

    def points(self) -> list[tuple[complex, float]]:
        "Grid points in output order: a outermost, then Im λ, then Re λ."
        lambdas = self._cfg.lambda_grid()
        return [(lam, a) for a in self._cfg.a_values() for lam in lambdas]

    def evaluate(self, lam: complex, a: float) -> ScanRecord:
        if is_excluded(lam, float(self._cfg[EXCLUSION_RADIUS])):
            return ScanRecord(float(lam.real), float(lam.imag), float(a), status=STATUS_EXCLUDED)
        start = time.perf_counter()
        try:
            conn = self._profile.connection(lam, a)
            report = flatness_of(
                conn, float(self._cfg[KERNEL_REL_TOL]), float(self._cfg[DEGENERATE_TOL])
            )
        except (DunklLabError, np.linalg.LinAlgError) as e:
            logger.warning(f"Scan point λ={lam}, a={a} failed: {e}")
            return ScanRecord(
                float(lam.real), float(lam.imag), float(a), status=f"failed:{type(e).__name__}"
            )
        record = _record(lam, a, report)
        if self._cfg[TIMING]:
            record = replace(record, runtime_ms=(time.perf_counter() - start) * 1e3)
        return record

    def scan_grid(self) -> list[ScanRecord]:
        points = self.points()
        jobs = int(self._cfg[JOBS])
        logger.info(f"Scanning {len(points)} points with {jobs} worker(s)")
        if jobs == 1:
            return [self.evaluate(lam, a) for lam, a in points]
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            futures = [
                (index, executor.submit(self.evaluate, lam, a))
                for index, (lam, a) in enumerate(points)
            ]
            done = [(index, future.result()) for index, future in futures]
        return [record for _, record in sorted(done, key=lambda item: item[0])]

    def write(self, records: Sequence[ScanRecord], out: Path | None = None) -> Path:
        path = Path(out if out is not None else self._cfg[OUT])
        if self._cfg[JSON_ROWS]:
            write_jsonl(records, path)
        else:
            write_csv(records, path)
        _ = write_manifest(self._cfg, path, {"rows": len(records)})
        logger.info(f"Wrote {len(records)} records to {path}")
        return path

    def replay(self, record: ScanRecord) -> ScanRecord:
        return self.evaluate(record.lam, record.a)

    def find_generic_example(self) -> "GenericExample":
        records = self.scan_grid()
        return self.refine(records)

    def refine(self, records: Sequence[ScanRecord]) -> "GenericExample":
        "Best grid record by margin, then improved by seeded random trials around it."
        usable = [r for r in records if r.ok and r.margin is not None]
        if not usable:
            raise ConfigError("No grid point could be evaluated")
        best = max(usable, key=lambda r: r.margin or 0.0)
        rng = np.random.default_rng(int(self._cfg[SEED]))
        step_re, step_im = self._grid_steps()
        samples = int(self._cfg[REFINE_SAMPLES]) if step_re or step_im else 0
        trials = 0
        refined = False
        for _ in range(samples):
            u, v = rng.uniform(-0.5, 0.5, size=2)
            offset = complex(u * step_re, v * step_im)
            candidate = self.evaluate(self._clip(best.lam + offset), best.a)
            trials += 1
            if candidate.ok and (candidate.margin or 0.0) > (best.margin or 0.0):
                best, refined = candidate, True
        margin = best.margin or 0.0
        inside = margin < float(self._cfg[ZERO_TOL])
        logger.info(f"Best margin {margin:.3e} at λ={best.lam}, a={best.a}")
        return GenericExample(best, margin, inside, refined, trials, int(self._cfg[SEED]))

    def _clip(self, lam: complex) -> complex:
        "λ moved onto the nearest point of the configured rectangle."
        re_low, re_high = sorted(float(x) for x in self._cfg[LAMBDA_RE])
        im_low, im_high = sorted(float(x) for x in self._cfg[LAMBDA_IM])
        return complex(
            float(np.clip(lam.real, re_low, re_high)), float(np.clip(lam.imag, im_low, im_high))
        )

    def _grid_steps(self) -> tuple[float, float]:
        "Grid spacing along Re λ and Im λ; an axis with a single point is not refined."
        nx, ny = (int(n) for n in self._cfg[GRID])
        steps = []
        for key, count in ((LAMBDA_RE, nx), (LAMBDA_IM, ny)):
            low, high = (float(x) for x in self._cfg[key])
            steps.append((high - low) / (count - 1) if count > 1 else 0.0)
        return steps[0], steps[1]


@dataclass(frozen=True)
class GenericExample:
    record: ScanRecord
    margin: float
    inside_z: bool
    "Margin below the zero tolerance: a flat form exists up to rounding."
    refined: bool
    trials: int
    seed: int
    note: str = "numeric witness, not a proof"


def replay_defect(original: ScanRecord, replayed: ScanRecord) -> float:
    "Largest difference of the numeric fields; inf when the status or a presence differs."
    if original.status != replayed.status:
        return float("inf")
    worst = 0.0
    for name in ("det_q", "min_eig_q"):
        a, b = getattr(original, name), getattr(replayed, name)
        if (a is None) != (b is None):
            return float("inf")
        if a is not None:
            worst = max(worst, abs(a - b))
    for name in ("kernel_dim", "sig_p", "sig_q", "degenerate"):
        if getattr(original, name) != getattr(replayed, name):
            return float("inf")
    return worst


def scan_grid(cfg: Config) -> list[ScanRecord]:
    return ScanAPI(cfg).scan_grid()


def find_generic_example(cfg: Config) -> GenericExample:
    return ScanAPI(cfg).find_generic_example()


# region dihedral windows


def expected_dihedral_definite(a: float) -> bool:
    "a ∈ (0, ½) + 2Z or a ∈ (3/2, 2) + 2Z."
    r = float(np.mod(a, 2.0))
    return 0 < r < 0.5 or 1.5 < r < 2


def dihedral_sweep(
    a_values: Sequence[float], rel_tol: float = 1e-8, degenerate_tol: float = 1e-8
) -> list[ScanRecord]:
    "Flatness records at λ = -1 for each a."
    for a in a_values:
        if abs(a - round(a)) < 1e-6:
            raise ConfigError(f"Dihedral sweep needs a off the integers, got {a}")
    records = []
    for a in a_values:
        report = flatness_of(dihedral_connection(a), rel_tol, degenerate_tol)
        record = _record(-1 + 0j, a, report)
        if record.definite != expected_dihedral_definite(a):
            logger.warning(f"Dihedral a={a}: definiteness {record.definite} outside its window")
        records.append(record)
    return records


# endregion

# region persistence along paths


@dataclass(frozen=True)
class ParameterPath:
    "A one-parameter family t ↦ ∇_t of connections on [t_start, t_end]."

    name: str
    connection: Callable[[float], StandardConnection]
    t_start: float = 0.0
    t_end: float = 1.0

    @classmethod
    def a_line(cls, lam: complex, t_start: float = 0.0, t_end: float = 0.6) -> "ParameterPath":
        "The family of λ with equal weights a(t) = t."
        return cls(f"a-line λ={lam}", lambda t: dunkl_family(lam, t), t_start, t_end)

    @classmethod
    def dihedral(cls, t_start: float = 0.1, t_end: float = 0.9) -> "ParameterPath":
        return cls("dihedral λ=-1", dihedral_connection, t_start, t_end)

    @classmethod
    def scaling(
        cls, conn: StandardConnection, t_start: float = 0.0, t_end: float = 1.0
    ) -> "ParameterPath":
        "t·A_i for the residues A_i of a fixed connection."
        return cls("scaling", conn.scaled, t_start, t_end)

    @classmethod
    def n_line(
        cls,
        lam: complex,
        a: float,
        extra_slopes: Sequence[complex],
        t_start: float = 0.01,
        t_end: float = 0.1,
    ) -> "ParameterPath":
        "Four lines of weight a and extra lines of weight t."
        return cls(
            f"n-line λ={lam}, a={a}",
            lambda t: n_line_connection(lam, a, extra_slopes, t),
            t_start,
            t_end,
        )


@dataclass(frozen=True)
class PersistenceSeries:
    path: str
    ts: tuple[float, ...]
    min_eigs: tuple[float | None, ...]
    zero: tuple[bool, ...]
    statuses: tuple[str, ...] = field(default=())

    @property
    def classification(self) -> Persistence:
        if all(self.zero):
            return "everywhere-zero"
        if any(self.zero):
            return "isolated-dips"
        return "nowhere-zero"


def persistence_path(
    path: ParameterPath,
    samples: int | Sequence[float] = 11,
    zero_tol: float = 1e-8,
    degenerate_tol: float = 1e-8,
) -> PersistenceSeries:
    "Smallest Q eigenvalue along the path; a sample counts as zero when a flat form exists."
    if isinstance(samples, int):
        ts = [float(t) for t in np.linspace(path.t_start, path.t_end, samples)]
    else:
        ts = [float(t) for t in samples]
    min_eigs: list[float | None] = []
    zero: list[bool] = []
    statuses: list[str] = []
    for t in ts:
        try:
            report = flatness_of(path.connection(t), zero_tol, degenerate_tol)
        except (DunklLabError, np.linalg.LinAlgError) as e:
            logger.warning(f"Path {path.name} failed at t={t}: {e}")
            min_eigs.append(None)
            zero.append(False)
            statuses.append(f"failed:{type(e).__name__}")
            continue
        min_eigs.append(report.min_eig)
        zero.append(report.kernel_dim >= 1)
        statuses.append("ok")
    series = PersistenceSeries(path.name, tuple(ts), tuple(min_eigs), tuple(zero), tuple(statuses))
    logger.info(f"Path {path.name}: {series.classification}")
    return series


# endregion
