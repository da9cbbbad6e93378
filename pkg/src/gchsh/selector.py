"""Choosing the best test for observed correlators, and meshing the region.

Observed correlators (X, Y) are first folded into the canonical octant
X >= Y >= 0 by sign flips and a swap (each is a local relabeling of inputs or
outputs, so bounds transfer unchanged). Inside the quantum-violating region

    X + Y >= 2  and  X^2 + Y^2 <= 4

every test theta assigns the pair a score; the selector scans a theta grid
and keeps the test whose certified bound is largest.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .bell import score_from_correlators
from .bounds import THETA_MAX, THETA_MIN, BoundCurve, bound_at
from .config import TOLS
from .errors import GchshError, TableIncompleteError

logger = logging.getLogger(__name__)

DEFAULT_SCAN_POINTS = 500


class OutsideRegionError(GchshError):
    """Correlators outside the quantum-violating region (or outside [-2, 2])."""


@dataclass(frozen=True)
class NormalizedCorrelators:
    x: float
    y: float
    transforms: tuple[str, ...]


@dataclass(frozen=True)
class SelectionResult:
    theta_best: float
    beta_at_best: float
    fidelity_bound: float
    in_region: bool


def normalize(x: float, y: float) -> NormalizedCorrelators:
    """Fold (X, Y) into the octant X >= Y >= 0, recording the transforms used."""
    x, y = float(x), float(y)
    if abs(x) > 2.0 or abs(y) > 2.0:
        raise OutsideRegionError(
            f"correlators ({x:.6g}, {y:.6g}) have magnitude above 2"
        )
    transforms: list[str] = []
    if x < 0.0:
        x = -x
        transforms.append("flip_x")
    if y < 0.0:
        y = -y
        transforms.append("flip_y")
    if x < y:
        x, y = y, x
        transforms.append("swap")
    return NormalizedCorrelators(x=x, y=y, transforms=tuple(transforms))


def in_region(nc: NormalizedCorrelators) -> bool:
    """Membership in the quantum-violating region, with boundary tolerance."""
    return (
        nc.x + nc.y >= 2.0 - TOLS.region
        and nc.x * nc.x + nc.y * nc.y <= 4.0 + TOLS.region
    )


def region_diagnostic(nc: NormalizedCorrelators) -> str | None:
    """Human-readable reason a normalized pair is outside the region."""
    if nc.x + nc.y < 2.0 - TOLS.region:
        return (
            f"X + Y = {nc.x + nc.y:.6g} < 2: no generalized CHSH violation, "
            "nothing can be certified"
        )
    if nc.x * nc.x + nc.y * nc.y > 4.0 + TOLS.region:
        return (
            f"X^2 + Y^2 = {nc.x * nc.x + nc.y * nc.y:.6g} > 4: "
            "outside the quantum-reachable set"
        )
    return None


def theta_scan_grid(count: int = DEFAULT_SCAN_POINTS) -> np.ndarray:
    """Uniform theta scan grid over the supported range [pi/64, pi/4]."""
    if count < 1:
        raise ValueError("scan grid needs at least one point")
    return np.linspace(THETA_MIN, THETA_MAX, count)


def _curve_lookup(curves: list[BoundCurve], thetas: np.ndarray) -> list[BoundCurve]:
    found = []
    for theta in thetas:
        match = next(
            (c for c in curves if abs(c.theta - theta) <= TOLS.theta_match), None
        )
        if match is None:
            raise TableIncompleteError(
                f"no stored bound curve for scan theta = {theta:.9f} "
                f"({len(curves)} curves available)"
            )
        found.append(match)
    return found


def select(
    x: float,
    y: float,
    curves: list[BoundCurve],
    thetas: np.ndarray | None = None,
) -> SelectionResult:
    """Pick the test with the largest certified bound for correlators (X, Y).

    Scans the theta grid (default 500 uniform points); every grid point must
    have a stored curve. Ties prefer the theta closest to pi/4. Raises
    OutsideRegionError for correlators outside the quantum-violating region.
    """
    nc = normalize(x, y)
    if not in_region(nc):
        raise OutsideRegionError(region_diagnostic(nc))
    thetas = theta_scan_grid() if thetas is None else np.asarray(thetas, dtype=float)
    matched = _curve_lookup(curves, thetas)

    best: tuple[float, float, float] | None = None
    for theta, curve in zip(thetas, matched):
        beta = score_from_correlators(theta, nc.x, nc.y)
        fid = bound_at(curve, beta)
        # >= so that later grid points (closer to pi/4) win ties
        if best is None or fid >= best[2]:
            best = (theta, beta, fid)
    return SelectionResult(
        theta_best=best[0], beta_at_best=best[1], fidelity_bound=best[2], in_region=True
    )


_REGION_CORNERS = ((2.0, 0.0), (1.0, 1.0), (math.sqrt(2.0), math.sqrt(2.0)))


def mesh(
    delta: float,
    curves: list[BoundCurve],
    thetas: np.ndarray | None = None,
) -> list[tuple[float, float, float, float]]:
    """Evaluate the selector across the normalized region on a pitch-delta grid.

    Returns (X, Y, fidelity_bound, theta_best) rows covering the lattice
    points inside the region plus the region's three corner vertices, so the
    extreme points (including the maximal-violation corner) always appear.
    """
    if not 0.0 < float(delta) <= 2.0:
        raise ValueError(f"mesh pitch {delta!r} must lie in (0, 2]")
    delta = float(delta)
    points: list[tuple[float, float]] = []
    n = int(math.floor(2.0 / delta + 1e-9))
    for i in range(n + 1):
        for j in range(i + 1):
            points.append((i * delta, j * delta))
    points.extend(_REGION_CORNERS)

    rows: list[tuple[float, float, float, float]] = []
    seen: list[tuple[float, float]] = []
    for px, py in sorted(points):
        nc = NormalizedCorrelators(x=px, y=py, transforms=())
        if not in_region(nc):
            continue
        if any(abs(px - sx) <= 1e-12 and abs(py - sy) <= 1e-12 for sx, sy in seen):
            continue
        seen.append((px, py))
        result = select(px, py, curves, thetas)
        rows.append((px, py, result.fidelity_bound, result.theta_best))
    return rows
