import logging
import math

import pytest

import gchsh.optimizer as optimizer_mod
from gchsh import (
    SQRT2,
    AliceParamGrid,
    AngleMinimum,
    AngleSearchConfig,
    InfeasibleScoreError,
    certified_min,
    guidance_potential,
    min_fidelity_over_angles,
)

QUARTER_PI = math.pi / 4
FID_AT_LOCAL_BOUND = (2 + SQRT2) / 8


@pytest.fixture(scope="module")
def chsh_grid():
    return AliceParamGrid(QUARTER_PI, seed=0)


def test_guidance_potential_shape():
    theta = math.pi / 8
    assert guidance_potential(theta, QUARTER_PI, theta) == pytest.approx(1.0)
    assert guidance_potential(theta, QUARTER_PI + 0.3, theta - 0.2) == pytest.approx(1.13)
    # always above any fidelity, so a feasible point always wins
    assert guidance_potential(theta, 0.0, 0.0) >= 1.0


def test_infeasible_score_raises():
    with pytest.raises(InfeasibleScoreError):
        min_fidelity_over_angles(QUARTER_PI, 2 * SQRT2 + 0.01)


def test_theta_validation():
    with pytest.raises(ValueError):
        min_fidelity_over_angles(-0.1, 2.0)


def test_chsh_local_score_minimum(chsh_grid):
    cfg = AngleSearchConfig(restarts=4, seed=0)
    res = min_fidelity_over_angles(QUARTER_PI, 2.0, cfg, alice_grid=chsh_grid)
    assert res.fidelity == pytest.approx(FID_AT_LOCAL_BOUND, abs=1e-7)
    assert len(res.all_restart_values) == 4
    finite = [v for v in res.all_restart_values if math.isfinite(v)]
    assert res.fidelity == pytest.approx(min(finite))
    assert all(v <= 1.0 + 1e-9 for v in finite)


def test_deterministic_for_fixed_seed(chsh_grid):
    cfg = AngleSearchConfig(restarts=3, seed=5)
    r1 = min_fidelity_over_angles(QUARTER_PI, 2.2, cfg, alice_grid=chsh_grid)
    r2 = min_fidelity_over_angles(QUARTER_PI, 2.2, cfg, alice_grid=chsh_grid)
    assert r1.fidelity == r2.fidelity
    assert r1.angles == r2.angles
    assert r1.all_restart_values == r2.all_restart_values


def test_warm_starts_survive_small_restart_budget(chsh_grid):
    cfg = AngleSearchConfig(restarts=1, seed=0)
    warm = ((0.3, 0.2), (1.1, 0.9))
    res = min_fidelity_over_angles(
        QUARTER_PI, 2.0, cfg, alice_grid=chsh_grid, extra_starts=warm
    )
    # center plus both warm starts all run even though restarts = 1
    assert len(res.all_restart_values) == 3


def test_perfect_score_forces_unit_fidelity_asymmetric():
    # at the maximal score only the ideal model is feasible, for any test
    for theta in (math.pi / 8, math.pi / 16):
        grid = AliceParamGrid(theta, n_points=30, starts=3, seed=0)
        cfg = AngleSearchConfig(restarts=2, seed=0)
        res = min_fidelity_over_angles(theta, 2 * SQRT2, cfg, alice_grid=grid)
        assert res.fidelity == pytest.approx(1.0, abs=1e-6)


def test_returned_minimum_reproducible_at_returned_angles(chsh_grid):
    from gchsh import SdpInstance, alice_channel, bell_operator, bob_channel, pullback_objective, solve

    cfg = AngleSearchConfig(restarts=3, seed=0)
    res = min_fidelity_over_angles(QUARTER_PI, 2.3, cfg, alice_grid=chsh_grid)
    a, b = res.angles
    inst = SdpInstance(
        objective=pullback_objective(
            alice_channel(a, chsh_grid.params(a)), bob_channel(QUARTER_PI, b)
        ),
        constraint_op=bell_operator(QUARTER_PI, a, b),
        threshold=2.3,
    )
    again = solve(inst)
    assert again.primal_value == pytest.approx(res.fidelity, abs=1e-9)


def test_certified_min_monotone_on_real_steps(chsh_grid):
    cfg = AngleSearchConfig(restarts=3, seed=0)
    first = certified_min(QUARTER_PI, 2.0, None, cfg, alice_grid=chsh_grid)
    second = certified_min(QUARTER_PI, 1.975, first, cfg, alice_grid=chsh_grid)
    assert second.fidelity <= first.fidelity + 1e-11


def fake_search(low_at_restarts, low, high):
    def fake(theta, beta, config=None, *, alice_grid=None, extra_starts=()):
        if config is not None and config.restarts >= low_at_restarts:
            return AngleMinimum(angles=(0.6, 0.1), fidelity=low, all_restart_values=(low,))
        return AngleMinimum(angles=(0.8, 0.3), fidelity=high, all_restart_values=(high,))

    return fake


def test_escalation_recovers_monotonicity(monkeypatch, caplog):
    monkeypatch.setattr(
        optimizer_mod, "min_fidelity_over_angles", fake_search(24, 0.34, 0.40)
    )
    previous = AngleMinimum(angles=(0.7, 0.2), fidelity=0.35, all_restart_values=(0.35,))
    with caplog.at_level(logging.WARNING, logger="gchsh.optimizer"):
        res = optimizer_mod.certified_min(
            QUARTER_PI, 1.9, previous, AngleSearchConfig(restarts=12, seed=0)
        )
    assert res.fidelity == pytest.approx(0.34)
    assert any("monotonicity violated" in r.message for r in caplog.records)


def test_envelope_after_exhausted_escalations(monkeypatch, caplog):
    # the stub never improves, so the previous value is carried forward
    monkeypatch.setattr(
        optimizer_mod, "min_fidelity_over_angles", fake_search(10_000, 0.34, 0.40)
    )
    previous = AngleMinimum(angles=(0.7, 0.2), fidelity=0.35, all_restart_values=(0.35,))
    with caplog.at_level(logging.WARNING, logger="gchsh.optimizer"):
        res = optimizer_mod.certified_min(
            QUARTER_PI, 1.9, previous, AngleSearchConfig(restarts=12, seed=0)
        )
    assert res.fidelity == pytest.approx(previous.fidelity)
    assert res.angles == previous.angles
    assert any("recording the envelope" in r.message for r in caplog.records)
