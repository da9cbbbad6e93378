"""Command-line interface.

Four subcommands cover the pipeline: `trivial-score` runs the full sweep for
one test and stores the resulting bound curve, `bound` evaluates a stored
curve at an observed score, `select` picks the best test for observed
correlators, and `mesh` tabulates the selector across the whole region.

Results go to stdout (plain `key = value` lines, or one JSON object with
--json); progress and warnings go to stderr. Exit codes: 0 success,
2 invalid input, 3 missing table entry, 4 correlators outside the region,
5 unwritable output path.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import re
import sys
from dataclasses import dataclass

import numpy as np

from .bell import TSIRELSON_BOUND
from .bounds import (
    DEFAULT_KAPPA,
    THETA_MAX,
    THETA_MIN,
    BoundCurve,
    bound_at,
    compute_curve,
    load_alice_grids,
    load_table,
    save_table,
    validate_supported_theta,
)
from .config import TOLS, Tolerances
from .errors import (
    GchshError,
    InfeasibleScoreError,
    SweepIncompleteError,
    TableError,
    TableIncompleteError,
)
from .optimizer import AngleSearchConfig
from .selector import (
    DEFAULT_SCAN_POINTS,
    OutsideRegionError,
    mesh,
    normalize,
    select,
)

logger = logging.getLogger(__name__)

DEFAULT_TABLE = "gchsh_table.txt"
TABLE_ENV_VAR = "GCHSH_TABLE"


@dataclass(frozen=True)
class ThetaGridSpec:
    """Uniform theta grid for curve families (tables, scans)."""

    lo: float = THETA_MIN
    hi: float = THETA_MAX
    count: int = 33

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    restarts: int = 12
    kappa: float = DEFAULT_KAPPA
    tolerances: Tolerances = TOLS
    table_path: str = DEFAULT_TABLE
    theta_grid: ThetaGridSpec = ThetaGridSpec()


def parse_theta(text: str) -> float:
    """Parse a test angle given as decimal radians or a pi fraction.

    Accepted fraction forms: "pi/4", "3pi/16", "3*pi/16".
    """
    s = text.strip().lower().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    match = re.fullmatch(r"(\d+)?\*?pi/(\d+)", s)
    if not match or int(match.group(2)) == 0:
        raise ValueError(f"cannot parse theta {text!r}: use radians or a pi/N fraction")
    return int(match.group(1) or 1) * math.pi / int(match.group(2))


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, the table env var, and explicit flags."""
    data: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as handle:
                data = json.load(handle)
        except (OSError, json.JSONDecodeError) as err:
            raise ValueError(f"cannot read config file {args.config!r}: {err}") from err
        known = {"seed", "restarts", "kappa", "table_path", "theta_grid"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

    grid_data = data.get("theta_grid", {})
    grid = ThetaGridSpec(
        lo=float(grid_data.get("lo", THETA_MIN)),
        hi=float(grid_data.get("hi", THETA_MAX)),
        count=int(grid_data.get("count", 33)),
    )
    table_path = (
        args.table
        or os.environ.get(TABLE_ENV_VAR)
        or data.get("table_path")
        or DEFAULT_TABLE
    )
    return RunConfig(
        seed=args.seed if args.seed is not None else int(data.get("seed", 0)),
        restarts=args.restarts if args.restarts is not None else int(data.get("restarts", 12)),
        kappa=float(data.get("kappa", DEFAULT_KAPPA)),
        table_path=str(table_path),
        theta_grid=grid,
    )


def _emit(args: argparse.Namespace, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        for key, value in payload.items():
            if isinstance(value, float):
                print(f"{key} = {value:.12g}")
            else:
                print(f"{key} = {value}")


def _load_curves(path: str) -> list[BoundCurve]:
    if not os.path.exists(path):
        return []
    return load_table(path)


def _update_table(path: str, new_curves: list[BoundCurve]) -> None:
    curves = _load_curves(path)
    grids = load_alice_grids(path) if os.path.exists(path) else []
    for new in new_curves:
        curves = [c for c in curves if abs(c.theta - new.theta) > TOLS.theta_match]
        curves.append(new)
    curves.sort(key=lambda c: c.theta)
    save_table(curves, path, alice_grids=grids)


def _find_curve(curves: list[BoundCurve], theta: float) -> BoundCurve | None:
    return next((c for c in curves if abs(c.theta - theta) <= TOLS.theta_match), None)


def _compute_and_store(theta: float, cfg: RunConfig) -> BoundCurve:
    search = AngleSearchConfig(restarts=cfg.restarts, seed=cfg.seed)
    curve = compute_curve(theta, search=search, kappa=cfg.kappa)
    _update_table(cfg.table_path, [curve])
    return curve


def cmd_trivial_score(args: argparse.Namespace, cfg: RunConfig) -> int:
    theta = validate_supported_theta(parse_theta(args.theta))
    logger.info("computing bound curve for theta = %.9f", theta)
    curve = _compute_and_store(theta, cfg)
    _emit(
        args,
        {
            "theta": theta,
            "beta_local": curve.beta_local,
            "beta_star": curve.beta_star,
            "fidelity_star": curve.fidelity_star,
            "slope_star": curve.slope_star,
            "beta_trivial": curve.beta_trivial,
            "table": cfg.table_path,
        },
    )
    return 0


def cmd_bound(args: argparse.Namespace, cfg: RunConfig) -> int:
    theta = validate_supported_theta(parse_theta(args.theta))
    score = float(args.score)
    if score > TSIRELSON_BOUND + 1e-9:
        raise ValueError(
            f"score {score:.12g} exceeds the quantum maximum {TSIRELSON_BOUND:.12g}"
        )
    curve = _find_curve(_load_curves(cfg.table_path), theta)
    if curve is None:
        if not args.compute_missing:
            raise TableIncompleteError(
                f"no stored curve for theta = {theta:.9f}; "
                "rerun with --compute-missing or run trivial-score first"
            )
        curve = _compute_and_store(theta, cfg)
    _emit(
        args,
        {
            "theta": theta,
            "score": score,
            "beta_trivial": curve.beta_trivial,
            "fidelity_bound": bound_at(curve, score),
        },
    )
    return 0


def _scan_thetas(args: argparse.Namespace, cfg: RunConfig) -> np.ndarray:
    if args.theta_points is not None:
        return np.linspace(THETA_MIN, THETA_MAX, int(args.theta_points))
    return cfg.theta_grid.values()


def _curves_for_scan(
    thetas: np.ndarray, args: argparse.Namespace, cfg: RunConfig
) -> list[BoundCurve]:
    curves = _load_curves(cfg.table_path)
    if args.compute_missing:
        missing = [t for t in thetas if _find_curve(curves, t) is None]
        if missing:
            logger.info("computing %d missing bound curves", len(missing))
            fresh = []
            for theta in missing:
                search = AngleSearchConfig(restarts=cfg.restarts, seed=cfg.seed)
                fresh.append(compute_curve(float(theta), search=search, kappa=cfg.kappa))
            _update_table(cfg.table_path, fresh)
            curves = _load_curves(cfg.table_path)
    return curves


def cmd_select(args: argparse.Namespace, cfg: RunConfig) -> int:
    thetas = _scan_thetas(args, cfg)
    curves = _curves_for_scan(thetas, args, cfg)
    nc = normalize(args.x, args.y)
    result = select(args.x, args.y, curves, thetas)
    _emit(
        args,
        {
            "x": float(args.x),
            "y": float(args.y),
            "normalized_x": nc.x,
            "normalized_y": nc.y,
            "transforms": ",".join(nc.transforms) or "none",
            "theta_best": result.theta_best,
            "beta_at_best": result.beta_at_best,
            "fidelity_bound": result.fidelity_bound,
        },
    )
    return 0


def cmd_mesh(args: argparse.Namespace, cfg: RunConfig) -> int:
    delta = float(args.delta)
    if not 0.0 < delta <= 2.0:
        raise ValueError(f"--delta must lie in (0, 2], got {args.delta}")
    thetas = _scan_thetas(args, cfg)
    curves = _curves_for_scan(thetas, args, cfg)
    rows = mesh(delta, curves, thetas)
    try:
        with open(args.out, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["X", "Y", "fidelity", "theta"])
            for x, y, fid, theta in rows:
                writer.writerow([f"{x:.12g}", f"{y:.12g}", f"{fid:.12g}", f"{theta:.12g}"])
    except OSError as err:
        raise _Unwritable(f"cannot write mesh output {args.out!r}: {err}") from err
    _emit(args, {"rows": len(rows), "out": args.out})
    return 0


class _Unwritable(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gchsh",
        description="Self-testing fidelity bounds from generalized CHSH scores.",
    )
    parser.add_argument("--config", help="JSON config file mirroring the run configuration")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    parser.add_argument(
        "--restarts", type=int, default=None, help="angle-search restarts (default 12)"
    )
    parser.add_argument(
        "--table",
        default=None,
        help=f"bound table path (default {DEFAULT_TABLE}; env {TABLE_ENV_VAR} overrides)",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--verbose", action="store_true", help="progress logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trivial-score", help="run the sweep for one theta and store the curve")
    p.add_argument("--theta", required=True, help='test angle: radians or "pi/N"')
    p.set_defaults(func=cmd_trivial_score)

    p = sub.add_parser("bound", help="evaluate a stored bound curve at a score")
    p.add_argument("--theta", required=True, help='test angle: radians or "pi/N"')
    p.add_argument("--score", required=True, type=float, help="observed score")
    p.add_argument(
        "--compute-missing",
        action="store_true",
        help="compute and store the curve if the table lacks it",
    )
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("select", help="pick the best test for observed correlators")
    p.add_argument("--x", required=True, type=float, help="correlator X")
    p.add_argument("--y", required=True, type=float, help="correlator Y")
    p.add_argument(
        "--theta-points",
        type=int,
        default=None,
        help=f"scan grid size (default: configured theta grid; library default {DEFAULT_SCAN_POINTS})",
    )
    p.add_argument("--compute-missing", action="store_true", help="fill table gaps (slow)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("mesh", help="tabulate the selector over the whole region")
    p.add_argument("--delta", required=True, type=float, help="grid pitch")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--theta-points", type=int, default=None, help="scan grid size")
    p.add_argument("--compute-missing", action="store_true", help="fill table gaps (slow)")
    p.set_defaults(func=cmd_mesh)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_run_config(args)
        return args.func(args, cfg)
    except OutsideRegionError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except TableIncompleteError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except _Unwritable as err:
        print(f"error: {err}", file=sys.stderr)
        return 5
    except (ValueError, InfeasibleScoreError, SweepIncompleteError, TableError, GchshError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
