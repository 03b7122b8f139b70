"""Fixed-point iteration: convergence, certification, and cap behavior."""

import dataclasses

import numpy as np
import pytest

from stagegame import (
    BeliefTable,
    PbneConfig,
    build_te_game,
    check_belief_consistency,
    check_sequential_rationality,
    default_params,
    solve_pbne,
)


def oscillating_params():
    """A tuning whose separating/pooling cycle never settles exactly."""
    return dataclasses.replace(
        default_params(),
        compromised_rewards=(1800.0, 1200.0, 600.0, 100.0),
        train_cost_primitive=50.0,
        train_cost_sophisticated=120.0,
    )


@pytest.mark.parametrize("x0", ["ineffectual", "effectual"])
def test_defaults_converge_quickly(x0):
    report = solve_pbne(build_te_game(), x0)
    assert report.converged
    assert len(report.trace) <= 20
    assert report.epsilon <= 1e-6
    assert report.discrepancy <= 1e-8
    assert report.best_iteration == report.trace[-1].iteration


def test_report_numbers_are_recomputable():
    game = build_te_game()
    report = solve_pbne(game, "effectual")
    eps = check_sequential_rationality(game, report.strategies, report.beliefs)
    disc = check_belief_consistency(game, report.strategies, report.beliefs, "effectual")
    assert abs(eps - report.epsilon) <= 1e-12
    assert abs(disc - report.discrepancy) <= 1e-12
    # the reported belief table is the filtered table of the reported profile
    assert report.discrepancy == 0.0


def test_runs_are_deterministic():
    game = build_te_game()
    a = solve_pbne(game, "effectual")
    b = solve_pbne(game, "effectual")
    assert a.epsilon == b.epsilon
    assert a.best_iteration == b.best_iteration
    for k in range(game.horizon + 1):
        assert np.array_equal(a.strategies.sigma1[k], b.strategies.sigma1[k])
        assert np.array_equal(a.strategies.sigma2[k], b.strategies.sigma2[k])
        assert np.array_equal(a.beliefs.table(1, k), b.beliefs.table(1, k))


def test_point_mass_priors_converge_immediately():
    game = build_te_game(None, prior_adversarial=1.0, prior_sophisticated=1.0)
    report = solve_pbne(game, "effectual", PbneConfig(init="prior"))
    assert report.converged
    assert len(report.trace) == 1


def test_explicit_belief_table_init():
    game = build_te_game()
    cfg = PbneConfig(init=BeliefTable.from_priors(game))
    report = solve_pbne(game, "ineffectual", cfg)
    assert report.converged


def test_iteration_cap_reports_best_iterate():
    game = build_te_game(oscillating_params())
    report = solve_pbne(game, "effectual", PbneConfig(iter_num=6))
    assert not report.converged
    assert len(report.trace) == 6
    best_eps = min(r.epsilon for r in report.trace)
    assert report.epsilon == pytest.approx(best_eps, abs=1e-12)
    assert report.best_iteration == min(
        r.iteration for r in report.trace if r.epsilon == best_eps
    )
    # reported pair is still internally consistent
    assert report.discrepancy == 0.0


def test_damping_engages_on_stall():
    game = build_te_game(oscillating_params())
    cfg = PbneConfig(iter_num=8, damping_patience=2)
    report = solve_pbne(game, "effectual", cfg)
    assert any(r.damped for r in report.trace)


def test_unknown_start_state_rejected():
    with pytest.raises(KeyError):
        solve_pbne(build_te_game(), "nowhere")


def test_config_validation():
    for bad in (
        dict(iter_num=0),
        dict(epsilon=0.0),
        dict(belief_tol=-1e-9),
        dict(init="guess"),
        dict(damping_weight=1.0),
        dict(damping_patience=0),
    ):
        with pytest.raises(ValueError):
            PbneConfig(**bad)


def test_report_json_round_trip(tmp_path):
    report = solve_pbne(build_te_game(), "effectual")
    path = tmp_path / "report.json"
    report.to_json(path)
    import json

    doc = json.loads(path.read_text())
    assert doc["converged"] is True
    assert doc["epsilon"] == report.epsilon
    assert doc["x0"] == "effectual"
    assert len(doc["trace"]) == len(report.trace)
