import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from configs import (
    A_RANGE,
    EXTRA_LINES,
    EXTRA_WEIGHT,
    GRID,
    JOBS,
    JSON_ROWS,
    KERNEL_REL_TOL,
    LAMBDA_IM,
    LAMBDA_RE,
    OUT,
    PROFILE,
    PROFILE_NAMES,
    SEED,
    Config,
)
from dunkl import (
    StandardConnection,
    WeightedLines,
    barycenter_residual,
    dihedral_connection,
    dunkl_connection,
    dunkl_family,
    dunkl_inner_product,
    three_line_connection,
)
from errors import ConfigError, DunklLabError
from file_system import manifest_path
from flat_forms import flatness_report, q_operator
from herm_geom import ExtComplex, parse_extended
from moebius_cover import invariance_residual, klein_identity_residual, klein_maps
from monodromy import (
    irreducibility_conditions,
    monodromy_rep,
    product_relation_residual,
    reducibility_detect,
)
from scan_api import (
    COLUMNS,
    ParameterPath,
    ScanAPI,
    dihedral_sweep,
    expected_dihedral_definite,
    persistence_path,
    read_records,
    replay_defect,
)
from scan_api.scan_api import REPLAY_TOL
from spherical import SphericalMetric, chart_of_point, cone_angle_estimate, curvature_residual
from version import __version__

logger = logging.getLogger(__name__)


# region argument parsing


def _complex(text: str) -> complex:
    value = parse_extended(text)
    if isinstance(value, str):
        raise argparse.ArgumentTypeError("λ must be finite")
    return value


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _complexes(text: str) -> list[complex]:
    return [complex(_complex(x)) for x in text.split(",") if x.strip()]


def _slopes(text: str) -> list[ExtComplex]:
    return [parse_extended(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.lower().replace("x", ",").split(",") if x.strip()]


def _add_connection_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("connection")
    _ = group.add_argument("--lambda", dest="lam", type=_complex, default=-1 + 0j)
    _ = group.add_argument("--a", type=float, default=0.3, help="equal residue trace")
    _ = group.add_argument("--lines", type=_slopes, help="explicit slopes, e.g. 0,inf,1,2+i")
    _ = group.add_argument("--weights", type=_floats, help="weights of --lines")
    _ = group.add_argument("--three", type=_floats, help="three-line traces a1,a2,a3")
    _ = group.add_argument("--dihedral", type=float, help="B2 arrangement with weight a")


def _add_scan_args(parser: argparse.ArgumentParser) -> None:
    _ = parser.add_argument("--config", type=Path, help="JSON config or scan manifest")
    _ = parser.add_argument("--lambda-re", type=_floats, help="min,max")
    _ = parser.add_argument("--lambda-im", type=_floats, help="min,max")
    _ = parser.add_argument("--lambda", dest="lam", type=_complex, help="a single λ")
    _ = parser.add_argument("--grid", type=_ints, help="nx,ny")
    _ = parser.add_argument("--a-range", type=_floats, help="start,stop,step")
    _ = parser.add_argument("--a", type=float, help="a single weight a")
    _ = parser.add_argument("--profile", choices=PROFILE_NAMES)
    _ = parser.add_argument("--extra-lines", type=_complexes, help="extra slopes, n-line profile")
    _ = parser.add_argument("--weights", type=float, help="weight of the extra lines")
    _ = parser.add_argument("--tol", type=float, help="kernel tolerance of Q")
    _ = parser.add_argument("--seed", type=int)
    _ = parser.add_argument("--out", type=str)
    _ = parser.add_argument("--jobs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dunkl-lab", description="Numerical experiments with Dunkl connections on C²."
    )
    _ = parser.add_argument("--verbose", "-v", action="store_true")
    _ = parser.add_argument("--json", action="store_true", help="JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    barycenter = sub.add_parser("barycenter", help="Dunkl inner product of weighted lines")
    _ = barycenter.add_argument("--lines", type=_slopes, required=True)
    _ = barycenter.add_argument("--weights", type=_floats, required=True)

    for name, text in (
        ("connection", "residues of a connection"),
        ("monodromy", "monodromy generators and relations"),
        ("flatform", "invariant Hermitian forms"),
    ):
        _add_connection_args(sub.add_parser(name, help=text))

    dihedral = sub.add_parser("dihedral", help="unitarity windows at λ = -1")
    _ = dihedral.add_argument("--a", type=_floats, default=[0.3, 0.7, 1.8])

    klein = sub.add_parser("klein-check", help="Klein maps and the quotient cover")
    _ = klein.add_argument("--lambda", dest="lam", type=_complex, default=2 + 0j)

    spherical = sub.add_parser("spherical", help="spherical cone metric of a unitary connection")
    _add_connection_args(spherical)
    _ = spherical.add_argument("--xi", type=_complex, default=0.4 + 0.7j)
    _ = spherical.add_argument("--step", type=float, default=1e-2, help="curvature stencil")
    _ = spherical.add_argument("--cones", action="store_true", help="estimate cone angles")

    for name, text in (("scan", "grid scan over (λ, a)"), ("find-example", "best margin")):
        _add_scan_args(sub.add_parser(name, help=text))

    persist = sub.add_parser("persist", help="smallest Q eigenvalue along a path")
    _ = persist.add_argument(
        "--path", choices=("a-line", "dihedral", "n-line", "scaling"), default="a-line"
    )
    _ = persist.add_argument("--lambda", dest="lam", type=_complex, default=2 + 1j)
    _ = persist.add_argument("--a", type=float, default=0.3)
    _ = persist.add_argument("--lines", type=_slopes, default=[2 + 1j], help="extra slopes")
    _ = persist.add_argument("--range", type=_floats, help="t_start,t_end")
    _ = persist.add_argument("--samples", type=int, default=11)
    _ = persist.add_argument("--tol", type=float, default=1e-8)

    replay = sub.add_parser("replay", help="recompute one record of a scan")
    _ = replay.add_argument("--from", dest="source", type=Path, required=True)
    _ = replay.add_argument("--row", type=int, default=0)
    _ = replay.add_argument("--config", type=Path, help="defaults to the scan manifest")
    return parser


# endregion


def _connection(args: argparse.Namespace) -> StandardConnection:
    if args.three is not None:
        if len(args.three) != 3:
            raise DunklLabError(f"--three takes three traces, got {args.three}")
        return three_line_connection(*args.three)
    if args.dihedral is not None:
        return dihedral_connection(args.dihedral)
    if args.lines is not None:
        weights = args.weights if args.weights is not None else [args.a] * len(args.lines)
        return dunkl_connection(WeightedLines.of(args.lines, weights))
    return dunkl_family(args.lam, args.a)


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, np.generic):
        return value.item()
    return value


def _emit(payload: dict[str, Any], as_json: bool) -> None:
    if as_json:
        print(json.dumps(_jsonable(payload), indent=2))
        return
    for key, value in payload.items():
        print(f"{key}: {value}")


# region commands


def cmd_barycenter(args: argparse.Namespace) -> int:
    weighted = WeightedLines.of(args.lines, args.weights)
    form = dunkl_inner_product(weighted)
    _emit(
        {
            "coords": form.coords,
            "det": form.det,
            "matrix": form.matrix,
            "certificate": barycenter_residual(weighted, form),
        },
        args.json,
    )
    return 0


def cmd_connection(args: argparse.Namespace) -> int:
    conn = _connection(args)
    _emit(
        {
            "lines": [str(line) for line in conn.lines],
            "traces": conn.traces,
            "c": conn.c,
            "residues": conn.residues,
            "kernel_residual": conn.kernel_residual(),
            "identity_residual": conn.identity_residual(),
        },
        args.json,
    )
    return 0


def cmd_monodromy(args: argparse.Namespace) -> int:
    conn = _connection(args)
    rep = monodromy_rep(conn)
    reducible = reducibility_detect(rep)
    conditions = irreducibility_conditions(np.real(conn.traces))
    _emit(
        {
            "ordering": rep.ordering,
            "line_order": [str(conn.lines[i]) for i in rep.line_indices],
            "generators": rep.generators,
            "product_residual": product_relation_residual(rep),
            "eigenvalue_defects": rep.eigenvalue_defects(),
            "resonant": rep.resonant,
            "invariant_line": None if reducible.line is None else str(reducible.line),
            "irreducible_by_parity": conditions.irreducible_by_parity,
            "irreducible_unless_positive_even": conditions.irreducible_unless_positive_even,
        },
        args.json,
    )
    return 0


def cmd_flatform(args: argparse.Namespace) -> int:
    report = flatness_report(q_operator(monodromy_rep(_connection(args))))
    _emit(
        {
            "eigenvalues": report.eigenvalues,
            "det_q": report.det_q,
            "kernel_dim": report.kernel_dim,
            "all_flat": report.all_flat,
            "form": None if report.form is None else report.form.coords,
            "signature": report.signature,
            "degenerate": report.degenerate,
            "margin": report.margin,
        },
        args.json,
    )
    return 0


def cmd_dihedral(args: argparse.Namespace) -> int:
    failures = 0
    for record in dihedral_sweep(args.a):
        expected = expected_dihedral_definite(record.a)
        failures += record.definite != expected
        _emit(
            {
                "a": record.a,
                "min_eig_q": record.min_eig_q,
                "signature": (record.sig_p, record.sig_q),
                "definite": record.definite,
                "expected_definite": expected,
            },
            args.json,
        )
    return 1 if failures else 0


def cmd_klein_check(args: argparse.Namespace) -> int:
    maps = klein_maps(args.lam)
    samples = np.random.default_rng(0).normal(size=(8, 2)) @ np.array([1, 1j])
    _emit(
        {
            "identity_residual": klein_identity_residual(args.lam),
            "invariance_residual": invariance_residual(args.lam, samples),
            "involutions": [m.is_involution() for m in maps],
            "closure": maps[0].compose(maps[1]).projectively_equal(maps[2]),
        },
        args.json,
    )
    return 0


def cmd_spherical(args: argparse.Namespace) -> int:
    conn = _connection(args)
    metric = SphericalMetric(conn)
    payload: dict[str, Any] = {
        "xi": args.xi,
        "phi": metric.phi(args.xi),
        "curvature_residual": curvature_residual(conn, None, args.xi, args.step, metric=metric),
    }
    if args.cones:
        angles = {}
        for line, a in zip(conn.lines, conn.traces.real):
            chart, _ = chart_of_point(line.slope)
            angles[str(line)] = {
                "alpha": cone_angle_estimate(conn, None, line.slope, metric=metric),
                "expected": 1 - a,
                "chart": chart.name,
            }
        payload["cone_angles"] = angles
    _emit(payload, args.json)
    return 0


def _scan_config(args: argparse.Namespace) -> Config:
    lambda_re, lambda_im, grid, a_range = args.lambda_re, args.lambda_im, args.grid, args.a_range
    if args.lam is not None:
        if lambda_re is not None or lambda_im is not None:
            raise ConfigError("--lambda cannot be combined with --lambda-re or --lambda-im")
        lam = complex(args.lam)
        lambda_re, lambda_im = [lam.real, lam.real], [lam.imag, lam.imag]
        grid = grid or [1, 1]
    if args.a is not None:
        if a_range is not None:
            raise ConfigError("--a cannot be combined with --a-range")
        a_range = [args.a, args.a, 0.1]
    profile = args.profile
    if profile is None and (args.extra_lines is not None or args.weights is not None):
        profile = "n-line"
    extra_lines = (
        None if args.extra_lines is None else [[s.real, s.imag] for s in args.extra_lines]
    )
    overrides = {
        LAMBDA_RE: lambda_re,
        LAMBDA_IM: lambda_im,
        GRID: grid,
        A_RANGE: a_range,
        PROFILE: profile,
        EXTRA_LINES: extra_lines,
        EXTRA_WEIGHT: args.weights,
        KERNEL_REL_TOL: args.tol,
        SEED: args.seed,
        OUT: args.out,
        JOBS: args.jobs,
        JSON_ROWS: True if args.json else None,
    }
    return Config.load(args.config, overrides)


def cmd_scan(args: argparse.Namespace) -> int:
    api = ScanAPI(_scan_config(args))
    records = api.scan_grid()
    path = api.write(records)
    failed = sum(1 for r in records if r.status.startswith("failed"))
    logger.info(f"{len(records)} records, {failed} failed, written to {path}")
    return 0


def cmd_find_example(args: argparse.Namespace) -> int:
    api = ScanAPI(_scan_config(args))
    example = api.find_generic_example()
    record = example.record
    payload = {column: record.row()[column] for column in COLUMNS}
    payload |= {
        "margin": example.margin,
        "inside_z": example.inside_z,
        "refined": example.refined,
        "seed": example.seed,
        "note": example.note,
    }
    _emit(payload, args.json)
    return 0


def cmd_persist(args: argparse.Namespace) -> int:
    match args.path:
        case "a-line":
            path = ParameterPath.a_line(args.lam)
        case "dihedral":
            path = ParameterPath.dihedral()
        case "n-line":
            path = ParameterPath.n_line(args.lam, args.a, [complex(s) for s in args.lines])
        case _:
            path = ParameterPath.scaling(dunkl_family(args.lam, args.a))
    if args.range is not None:
        path = ParameterPath(path.name, path.connection, args.range[0], args.range[1])
    series = persistence_path(path, args.samples, args.tol)
    for t, value, zero in zip(series.ts, series.min_eigs, series.zero):
        _emit({"t": t, "min_eig_q": value, "zero": zero}, args.json)
    _emit({"path": series.path, "classification": series.classification}, args.json)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    config_path = args.config if args.config is not None else manifest_path(args.source)
    api = ScanAPI(Config.load(config_path if config_path.exists() else None))
    records = read_records(args.source)
    if not 0 <= args.row < len(records):
        raise DunklLabError(f"Row {args.row} out of range (0..{len(records) - 1})")
    original = records[args.row]
    replayed = api.replay(original)
    defect = replay_defect(original, replayed)
    _emit({"original": original.row(), "replayed": replayed.row(), "defect": defect}, args.json)
    return 0 if defect <= REPLAY_TOL else 1


COMMANDS = {
    "barycenter": cmd_barycenter,
    "connection": cmd_connection,
    "monodromy": cmd_monodromy,
    "flatform": cmd_flatform,
    "dihedral": cmd_dihedral,
    "klein-check": cmd_klein_check,
    "spherical": cmd_spherical,
    "scan": cmd_scan,
    "persist": cmd_persist,
    "find-example": cmd_find_example,
    "replay": cmd_replay,
}

# endregion


def cli(argv: Sequence[str] | None = None) -> int:
    arguments = list(sys.argv[1:] if argv is None else argv)
    if "--version" in arguments:
        print(__version__)
        return 0

    args = build_parser().parse_args(arguments)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        return COMMANDS[args.command](args)
    except DunklLabError as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(cli())
