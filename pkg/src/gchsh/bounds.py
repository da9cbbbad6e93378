"""Score sweeps, the trivial-score threshold, and the final fidelity bound.

For a fixed test theta, the worst-case extracted fidelity is minimized on a
descending grid of scores starting at the local bound. The chord slope from a
swept point toward the perfect anchor (2 sqrt 2, 1),

    slope(beta, F) = (1 - F) / (2 sqrt 2 - beta),

rises while the raw curve stays above its convex roof and falls past the
curve's inflection. The last point before the first fall is the roof's
tangency point (beta*, F*); extending that chord down to F = 1/2 gives the
trivial score beta_t, below which the bound collapses to 1/2. The published
bound is then the straight line from (beta_t, 1/2) to (2 sqrt 2, 1).

Curves are persisted as versioned, human-readable text with 12 significant
digits, written atomically (temp file + rename).
"""

from __future__ import annotations

import logging
import math
import os
import tempfile
from dataclasses import dataclass, field, replace

from .bell import TSIRELSON_BOUND, local_bound
from .errors import GchshError, SweepIncompleteError, TableError, TableVersionError
from .maps import AliceParamGrid
from .optimizer import AngleMinimum, AngleSearchConfig, certified_min

logger = logging.getLogger(__name__)

THETA_MIN = math.pi / 64.0
THETA_MAX = math.pi / 4.0

DEFAULT_KAPPA = 0.025
DEFAULT_MARGIN = 0.02

_FORMAT_VERSION = 1
_HEADER = "# gchsh bound table"


def validate_supported_theta(theta: float) -> float:
    """Bound computations support theta in [pi/64, pi/4] only.

    The reparameterized Bob strength is singular at theta = 0 and the selector
    folds theta > pi/4 onto this range by the X <-> Y symmetry.
    """
    theta = float(theta)
    if not THETA_MIN - 1e-12 <= theta <= THETA_MAX + 1e-12:
        raise ValueError(
            f"theta = {theta:.12g} outside the supported range [pi/64, pi/4]"
        )
    return min(max(theta, THETA_MIN), THETA_MAX)


def slope(beta: float, fidelity: float) -> float:
    """Chord slope from (beta, fidelity) to the perfect point (2 sqrt 2, 1)."""
    beta = float(beta)
    if beta >= TSIRELSON_BOUND:
        raise ValueError(f"score {beta:.12g} must lie strictly below 2*sqrt(2)")
    return (1.0 - float(fidelity)) / (TSIRELSON_BOUND - beta)


@dataclass(frozen=True)
class ScoreSweep:
    """Recorded (score, min fidelity) pairs of one descending sweep."""

    theta: float
    kappa: float
    points: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class BoundCurve:
    """Piecewise-linear lower bound on extractability for one test theta."""

    theta: float
    beta_trivial: float
    beta_star: float
    fidelity_star: float
    slope_star: float
    sweep: ScoreSweep | None = field(default=None, compare=False)

    @property
    def beta_local(self) -> float:
        return local_bound(self.theta)


def sweep_scores(
    theta: float,
    *,
    search: AngleSearchConfig | None = None,
    kappa: float = DEFAULT_KAPPA,
    margin: float = DEFAULT_MARGIN,
    max_steps: int = 400,
    alice_grid: AliceParamGrid | None = None,
) -> ScoreSweep:
    """Minimize fidelity on a descending score grid until past the inflection.

    The step is kappa scaled by (theta / (pi/4))^2, so flatter small-theta
    curves are probed proportionally finer. Stops two steps after the chord
    slope first decreases (the extra steps verify it keeps decreasing, with a
    warning otherwise), or after max_steps. The fidelity floor 1/2 - margin
    terminates only a degenerate hunt whose chord slope never rose: while the
    slope is climbing the peak still lies ahead, and for asymmetric tests the
    raw minimum legitimately passes far below the floor on the way there.
    """
    theta = validate_supported_theta(theta)
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    search = search or AngleSearchConfig()
    grid = alice_grid or AliceParamGrid(theta, seed=search.seed)

    step = (theta / THETA_MAX) ** 2 * kappa
    beta_start = local_bound(theta)
    points: list[tuple[float, float]] = []
    slopes: list[float] = []
    previous: AngleMinimum | None = None
    inflection_seen = False
    rising_seen = False
    steps_past_inflection = 0

    for k in range(max_steps):
        beta_k = beta_start - k * step
        result = certified_min(theta, beta_k, previous, search, alice_grid=grid)
        points.append((beta_k, result.fidelity))
        slopes.append(slope(beta_k, result.fidelity))
        logger.info(
            "sweep theta=%.6f k=%d score=%.9f fidelity=%.9f", theta, k, beta_k, result.fidelity
        )
        if not inflection_seen:
            if k >= 1 and slopes[k] < slopes[k - 1]:
                inflection_seen = True
            elif k >= 1 and slopes[k] > slopes[k - 1]:
                # A rising chord slope is the productive phase of the hunt:
                # the peak (tangency of the convex roof) lies ahead, however
                # far the raw minimum has already fallen below 1/2.
                rising_seen = True
            elif k >= 1 and not rising_seen and result.fidelity <= 0.5 - margin:
                logger.warning(
                    "sweep for theta=%.6f stalled at the fidelity floor with a"
                    " flat chord slope",
                    theta,
                )
                break
        else:
            steps_past_inflection += 1
            if slopes[k] >= slopes[k - 1]:
                logger.warning(
                    "chord slope rose again at score %.9f after the inflection", beta_k
                )
            if steps_past_inflection == 2:
                break
        previous = result

    return ScoreSweep(theta=theta, kappa=step, points=tuple(points))


def trivial_score(sweep: ScoreSweep) -> BoundCurve:
    """Locate the inflection in a sweep and extend its chord to F = 1/2."""
    if len(sweep.points) < 2:
        raise SweepIncompleteError("sweep has fewer than two points")
    slopes = [slope(b, f) for b, f in sweep.points]
    star = None
    for k in range(1, len(slopes)):
        if slopes[k] < slopes[k - 1]:
            star = k - 1
            break
    if star is None:
        raise SweepIncompleteError(
            "no inflection: the chord slope never decreased within the swept range"
        )
    beta_star, fidelity_star = sweep.points[star]
    alpha = slopes[star]
    if fidelity_star > 0.5 - DEFAULT_MARGIN:
        # Anchor nearly on the trivial line: the intersection below is then
        # poorly conditioned. Every test in the family lands well clear.
        logger.warning(
            "roof anchored at fidelity %.9f, within %.3g of the trivial line",
            fidelity_star,
            DEFAULT_MARGIN,
        )
    beta_trivial = (0.5 - fidelity_star) / alpha + beta_star
    if not local_bound(sweep.theta) - 1e-9 <= beta_trivial < TSIRELSON_BOUND:
        raise GchshError(
            f"trivial score {beta_trivial:.12g} fell outside [local bound, 2*sqrt(2))"
        )
    return BoundCurve(
        theta=sweep.theta,
        beta_trivial=beta_trivial,
        beta_star=beta_star,
        fidelity_star=fidelity_star,
        slope_star=alpha,
        sweep=sweep,
    )


def compute_curve(
    theta: float,
    *,
    search: AngleSearchConfig | None = None,
    kappa: float = DEFAULT_KAPPA,
    margin: float = DEFAULT_MARGIN,
    max_steps: int = 400,
    alice_grid: AliceParamGrid | None = None,
) -> BoundCurve:
    """Full pipeline for one theta: sweep, then extract the bound curve."""
    sweep = sweep_scores(
        theta,
        search=search,
        kappa=kappa,
        margin=margin,
        max_steps=max_steps,
        alice_grid=alice_grid,
    )
    return trivial_score(sweep)


def bound_at(curve: BoundCurve, beta: float) -> float:
    """Evaluate the certified fidelity lower bound at an observed score.

    1/2 below the trivial score, then linear up to 1 at the quantum maximum.
    """
    beta = float(beta)
    if beta > TSIRELSON_BOUND + 1e-9:
        raise ValueError(f"score {beta:.12g} exceeds the quantum maximum 2*sqrt(2)")
    beta = min(beta, TSIRELSON_BOUND)
    if beta <= curve.beta_trivial:
        return 0.5
    return 0.5 * (1.0 + (beta - curve.beta_trivial) / (TSIRELSON_BOUND - curve.beta_trivial))


# ---------------------------------------------------------------------------
# Persistence


def _fmt(x: float) -> str:
    return f"{x:.11e}"


def save_table(
    curves: list[BoundCurve],
    path: str,
    *,
    alice_grids: list[AliceParamGrid] | None = None,
) -> None:
    """Write curves (and optionally Alice parameter grids) atomically."""
    lines = [_HEADER, f"version = {_FORMAT_VERSION}"]
    for curve in curves:
        lines.append("[curve]")
        lines.append(f"theta = {_fmt(curve.theta)}")
        lines.append(f"beta_local = {_fmt(curve.beta_local)}")
        lines.append(f"beta_star = {_fmt(curve.beta_star)}")
        lines.append(f"fidelity_star = {_fmt(curve.fidelity_star)}")
        lines.append(f"slope_star = {_fmt(curve.slope_star)}")
        lines.append(f"beta_trivial = {_fmt(curve.beta_trivial)}")
        if curve.sweep is not None:
            lines.append(f"kappa = {_fmt(curve.sweep.kappa)}")
            lines.append(
                "points = "
                + ", ".join(f"{_fmt(b)}:{_fmt(f)}" for b, f in curve.sweep.points)
            )
    for grid in alice_grids or []:
        lines.append("[alice_params]")
        lines.append(f"theta = {_fmt(grid.theta)}")
        lines.append(
            "records = "
            + ", ".join(f"{_fmt(a)}:{_fmt(om)}:{_fmt(d)}" for a, om, d in grid.to_records())
        )
    payload = "\n".join(lines) + "\n"

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".gchsh-table-", dir=directory)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_sections(path: str) -> tuple[list[dict], list[dict]]:
    with open(path) as handle:
        raw_lines = handle.read().splitlines()
    lines = [ln.strip() for ln in raw_lines if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise TableError(f"table file {path!r} is empty")
    key, _, value = lines[0].partition("=")
    if key.strip() != "version":
        raise TableError(f"table file {path!r} does not start with a version line")
    version = int(value.strip())
    if version != _FORMAT_VERSION:
        raise TableVersionError(
            f"table version {version} is not supported (expected {_FORMAT_VERSION})"
        )

    curves: list[dict] = []
    grids: list[dict] = []
    section: dict | None = None
    for line in lines[1:]:
        if line == "[curve]":
            section = {}
            curves.append(section)
        elif line == "[alice_params]":
            section = {}
            grids.append(section)
        else:
            if section is None:
                raise TableError(f"unexpected line outside any section: {line!r}")
            key, sep, value = line.partition("=")
            if not sep:
                raise TableError(f"malformed line: {line!r}")
            section[key.strip()] = value.strip()
    return curves, grids


def load_table(path: str) -> list[BoundCurve]:
    """Read bound curves back; validates version and supported theta range."""
    curve_sections, _ = _parse_sections(path)
    curves = []
    for sec in curve_sections:
        try:
            theta = float(sec["theta"])
            curve = BoundCurve(
                theta=validate_supported_theta(theta),
                beta_trivial=float(sec["beta_trivial"]),
                beta_star=float(sec["beta_star"]),
                fidelity_star=float(sec["fidelity_star"]),
                slope_star=float(sec["slope_star"]),
            )
        except KeyError as missing:
            raise TableError(f"curve section is missing field {missing}") from None
        except ValueError as bad:
            raise TableError(f"invalid curve section: {bad}") from None
        if "points" in sec:
            points = tuple(
                (float(b), float(f))
                for b, f in (pair.split(":") for pair in sec["points"].split(","))
            )
            curve = replace(
                curve,
                sweep=ScoreSweep(theta=curve.theta, kappa=float(sec["kappa"]), points=points),
            )
        curves.append(curve)
    return curves


def load_alice_grids(path: str) -> list[AliceParamGrid]:
    """Read stored Alice parameter grids from a table file."""
    _, grid_sections = _parse_sections(path)
    grids = []
    for sec in grid_sections:
        records = [
            tuple(float(part) for part in rec.split(":"))
            for rec in sec["records"].split(",")
        ]
        grids.append(AliceParamGrid.from_records(float(sec["theta"]), records))
    return grids
