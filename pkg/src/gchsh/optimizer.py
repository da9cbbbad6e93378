"""Worst-case search over measurement angles at a fixed test and score.

The inner problem (a fidelity SDP) is only defined where the score threshold
is quantum-reachable at the settings (a, b); elsewhere the objective switches
to a guidance potential

    V(a, b) = 1 + (a - pi/4)^2 + (b - theta)^2

whose minimum sits at the always-feasible settings (pi/4, theta), so simplex
iterates that wander into the infeasible zone are steered back. Since every
extracted fidelity is at most 1 and V >= 1, a feasible value always wins.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .bell import TSIRELSON_BOUND, bell_operator, validate_theta
from .config import TOLS
from .errors import InfeasibleScoreError
from .maps import AliceParamGrid, alice_channel, bob_channel
from .sdp import SdpInstance, pullback_objective, solve

logger = logging.getLogger(__name__)

_HALF_PI = 0.5 * math.pi
_QUARTER_PI = 0.25 * math.pi
_ESCALATION_CAP = 3
_MONOTONE_SLACK = 1e-11


@dataclass(frozen=True)
class AngleSearchConfig:
    restarts: int = 12
    local_tol: float = 1e-7
    max_iters: int = 400
    seed: int = 0


@dataclass(frozen=True)
class AngleMinimum:
    """Best feasible minimum found, plus the per-restart values for diagnostics.

    all_restart_values holds each restart's best feasible fidelity (inf when a
    restart never touched the feasible set), so fidelity == min of the finite
    entries and angles is the matching minimizer.
    """

    angles: tuple[float, float]
    fidelity: float
    all_restart_values: tuple[float, ...]


def guidance_potential(theta: float, a: float, b: float) -> float:
    """Infeasible-zone surrogate objective; minimized at (pi/4, theta)."""
    theta = validate_theta(theta)
    return 1.0 + (a - _QUARTER_PI) ** 2 + (b - theta) ** 2


def _make_objective(theta: float, beta: float, grid: AliceParamGrid):
    """Objective closure that also records the best feasible point it sees."""
    chb_cache: dict[float, object] = {}
    state = {"best": math.inf, "angles": None}

    def objective(x) -> float:
        a = min(max(float(x[0]), 0.0), _HALF_PI)
        b = min(max(float(x[1]), 0.0), _HALF_PI)
        channel_a = alice_channel(a, grid.params(a))
        channel_b = chb_cache.get(b)
        if channel_b is None:
            channel_b = chb_cache.setdefault(b, bob_channel(theta, b))
        instance = SdpInstance(
            objective=pullback_objective(channel_a, channel_b),
            constraint_op=bell_operator(theta, a, b),
            threshold=beta,
        )
        result = solve(instance)
        if result.status != "optimal":
            return guidance_potential(theta, a, b)
        if result.primal_value < state["best"]:
            state["best"] = result.primal_value
            state["angles"] = (a, b)
        return result.primal_value

    return objective, state


def _stratified_starts(
    theta: float, beta: float, restarts: int, seed: int, extra: tuple[tuple[float, float], ...]
) -> list[tuple[float, float]]:
    """Fixed seeds first, then feasibility-filtered random points.

    Random starts where no state can reach the score are discarded (refilled
    by jitter around the always-feasible center) so restarts are not spent
    descending the guidance potential from scratch.
    """
    center = (_QUARTER_PI, theta)
    corners = [(0.0, 0.0), (0.0, _HALF_PI), (_HALF_PI, 0.0), (_HALF_PI, _HALF_PI)]

    def is_feasible(a: float, b: float) -> bool:
        lam = np.linalg.eigvalsh(bell_operator(theta, a, b))[-1]
        return beta <= lam + TOLS.feasibility

    # Center and warm starts are never dropped, even when restarts is tiny:
    # a warm start carries the previous sweep point's minimizer and keeping
    # it is what makes the sweep nonincreasing in practice.
    starts: list[tuple[float, float]] = [center]
    starts += [(float(p[0]), float(p[1])) for p in extra]
    budget = max(restarts, len(starts))
    for corner in corners:
        if len(starts) >= budget:
            break
        if is_feasible(*corner):
            starts.append(corner)
    rng = np.random.default_rng(seed)
    attempts = 0
    while len(starts) < budget and attempts < 50 * budget:
        candidate = (
            float(rng.uniform(0.0, _HALF_PI)),
            float(rng.uniform(0.0, _HALF_PI)),
        )
        attempts += 1
        if is_feasible(*candidate):
            starts.append(candidate)
    while len(starts) < budget:
        jitter = rng.uniform(-0.05, 0.05, size=2)
        a = min(max(center[0] + jitter[0], 0.0), _HALF_PI)
        b = min(max(center[1] + jitter[1], 0.0), _HALF_PI)
        starts.append((a, b))
    return starts


def min_fidelity_over_angles(
    theta: float,
    beta: float,
    config: AngleSearchConfig | None = None,
    *,
    alice_grid: AliceParamGrid | None = None,
    extra_starts: tuple[tuple[float, float], ...] = (),
) -> AngleMinimum:
    """Multistart Nelder-Mead over the settings box [0, pi/2]^2.

    Deterministic for a fixed config seed. Raises InfeasibleScoreError when
    the score exceeds the quantum maximum, the only way to find nothing.
    """
    theta = validate_theta(theta)
    beta = float(beta)
    config = config or AngleSearchConfig()
    if beta > TSIRELSON_BOUND + TOLS.feasibility:
        raise InfeasibleScoreError(
            f"score {beta:.12g} exceeds the quantum maximum {TSIRELSON_BOUND:.12g}"
        )
    grid = alice_grid or AliceParamGrid(theta, seed=config.seed)
    starts = _stratified_starts(theta, beta, config.restarts, config.seed, extra_starts)

    restart_values: list[float] = []
    best_value = math.inf
    best_angles: tuple[float, float] | None = None
    for x0 in starts:
        objective, state = _make_objective(theta, beta, grid)
        minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=[(0.0, _HALF_PI), (0.0, _HALF_PI)],
            options={
                "xatol": 1e-6,
                "fatol": config.local_tol,
                "maxiter": config.max_iters,
                "maxfev": 4 * config.max_iters,
            },
        )
        restart_values.append(state["best"])
        if state["best"] < best_value:
            best_value = state["best"]
            best_angles = state["angles"]

    if best_angles is None:
        raise InfeasibleScoreError(
            f"no feasible settings found for score {beta:.12g} at theta {theta:.12g}"
        )
    return AngleMinimum(
        angles=best_angles, fidelity=best_value, all_restart_values=tuple(restart_values)
    )


def certified_min(
    theta: float,
    beta_k: float,
    previous: AngleMinimum | None,
    config: AngleSearchConfig | None = None,
    *,
    alice_grid: AliceParamGrid | None = None,
) -> AngleMinimum:
    """One sweep step with monotonicity enforcement.

    The caller guarantees beta_k is below the previous step's score, so the
    true minimum cannot exceed the previous one (the feasible set only grew).
    The previous minimizer is injected as a warm start, which already makes
    violations rare; any that remain trigger re-runs with doubled restarts
    (up to 3 escalations) and finally an envelope with a logged warning.
    """
    config = config or AngleSearchConfig()
    extra = (previous.angles,) if previous is not None else ()
    result = min_fidelity_over_angles(
        theta, beta_k, config, alice_grid=alice_grid, extra_starts=extra
    )
    if previous is None:
        return result

    escalations = 0
    while result.fidelity > previous.fidelity + _MONOTONE_SLACK and escalations < _ESCALATION_CAP:
        escalations += 1
        config = replace(config, restarts=2 * config.restarts)
        logger.warning(
            "monotonicity violated at score %.9f (%.12g > %.12g); escalating to %d restarts",
            beta_k,
            result.fidelity,
            previous.fidelity,
            config.restarts,
        )
        rerun = min_fidelity_over_angles(
            theta, beta_k, config, alice_grid=alice_grid, extra_starts=extra
        )
        if rerun.fidelity < result.fidelity:
            result = rerun

    if result.fidelity > previous.fidelity + _MONOTONE_SLACK:
        logger.warning(
            "monotonicity still violated after %d escalations; recording the envelope",
            _ESCALATION_CAP,
        )
        result = AngleMinimum(
            angles=previous.angles,
            fidelity=min(result.fidelity, previous.fidelity),
            all_restart_values=result.all_restart_values,
        )
    return result
