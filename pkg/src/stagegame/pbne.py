"""Fixed-point iteration between backward induction and belief filtering.

Starting from an initial belief table, each round solves the whole game
backward under the current beliefs and refilters beliefs forward under the
resulting profile.  The pair converges when the profile is sequentially
rational under the filtered beliefs (small best-response gain) and the
beliefs have stopped moving.  The reported pair is always (profile,
forward beliefs of that profile), so its consistency discrepancy is zero by
construction and is recomputed rather than assumed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .beliefs import BeliefTable, forward_beliefs
from .dynamics import (
    ValueTable,
    backward_pass,
    best_response_value,
    cumulative_values,
)
from .game import MultiStageGame, StrategyProfile
from .staticeq import SolverConfig

__all__ = [
    "PbneConfig",
    "IterationRecord",
    "EquilibriumReport",
    "solve_pbne",
    "check_belief_consistency",
    "check_sequential_rationality",
]

_INIT_RULES = ("uniform", "prior")


@dataclass(frozen=True)
class PbneConfig:
    """Iteration knobs.

    init: "uniform", "prior", or an explicit BeliefTable for the first
    backward pass.  When the belief change fails to decrease for
    `damping_patience` consecutive rounds, the next input beliefs are averaged
    with the previous input using `damping_weight` on the fresh table.
    """

    iter_num: int = 100
    epsilon: float = 1e-6
    belief_tol: float = 1e-8
    init: object = "uniform"
    damping_patience: int = 5
    damping_weight: float = 0.5
    solver: SolverConfig | None = None

    def __post_init__(self):
        if self.iter_num < 1:
            raise ValueError("iter_num must be at least 1")
        if not (self.epsilon > 0 and self.belief_tol > 0):
            raise ValueError("epsilon and belief_tol must be positive")
        if isinstance(self.init, str) and self.init not in _INIT_RULES:
            raise ValueError(f"unknown init rule {self.init!r}")
        if not isinstance(self.init, (str, BeliefTable)):
            raise ValueError("init must be an init rule name or a BeliefTable")
        if not (0.0 < self.damping_weight < 1.0):
            raise ValueError("damping_weight must lie in (0, 1)")
        if self.damping_patience < 1:
            raise ValueError("damping_patience must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    epsilon: float
    belief_delta: float
    damped: bool


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    """Solved profile with its filtered beliefs and certification numbers.

    epsilon is the recomputed sequential-rationality gap of the reported pair;
    discrepancy the recomputed belief-consistency gap (zero unless the report
    carries a damped table, which it never does by construction).  values are
    the cumulative utilities of the reported pair.
    """

    game: MultiStageGame
    x0: str
    strategies: StrategyProfile
    beliefs: BeliefTable
    values: ValueTable
    epsilon: float
    discrepancy: float
    converged: bool
    best_iteration: int
    trace: tuple[IterationRecord, ...]

    def to_jsonable(self) -> dict:
        return {
            "x0": self.x0,
            "converged": self.converged,
            "epsilon": self.epsilon,
            "discrepancy": self.discrepancy,
            "best_iteration": self.best_iteration,
            "iterations": len(self.trace),
            "trace": [
                {
                    "iteration": r.iteration,
                    "epsilon": r.epsilon,
                    "belief_delta": r.belief_delta,
                    "damped": r.damped,
                }
                for r in self.trace
            ],
            "strategies": self.strategies.to_jsonable(),
            "beliefs": self.beliefs.to_jsonable(),
            "values": self.values.to_jsonable(),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_jsonable(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def check_belief_consistency(
    game: MultiStageGame,
    strategies: StrategyProfile,
    beliefs: BeliefTable,
    x0: str,
) -> float:
    """Sup distance between `beliefs` and the profile's filtered beliefs."""
    return forward_beliefs(game, strategies, x0).sup_distance(beliefs)


def check_sequential_rationality(
    game: MultiStageGame,
    strategies: StrategyProfile,
    beliefs: BeliefTable,
) -> float:
    """Largest best-response gain over players, stages, states and types."""
    gain = 0.0
    for i in (1, 2):
        gain = max(gain, best_response_value(game, strategies, beliefs, i).max_gain)
    return max(gain, 0.0)


def _initial_beliefs(game: MultiStageGame, init) -> BeliefTable:
    if isinstance(init, BeliefTable):
        if init.game is not game:
            # accept structurally matching tables built for an equal game
            init = BeliefTable(game, init.tables1, init.tables2)
        return init
    if init == "prior":
        return BeliefTable.from_priors(game)
    return BeliefTable.uniform(game)


def solve_pbne(
    game: MultiStageGame, x0: str, config: PbneConfig | None = None
) -> EquilibriumReport:
    """Iterate backward induction and forward filtering from `x0`.

    Convergence requires both a sequential-rationality gap at most
    ``config.epsilon`` and a belief change at most ``config.belief_tol``.
    When the iteration cap is hit, the best-epsilon iterate is reported with
    ``converged=False``.
    """
    config = config or PbneConfig()
    game.state_index(0, x0)
    current = _initial_beliefs(game, config.init)
    trace: list[IterationRecord] = []
    best: tuple[float, int, StrategyProfile, BeliefTable] | None = None
    converged = False
    prev_delta = np.inf
    stall = 0
    for t in range(1, config.iter_num + 1):
        dyn = backward_pass(game, current, config.solver)
        filtered = forward_beliefs(game, dyn.profile, x0)
        delta = filtered.sup_distance(current)
        eps = check_sequential_rationality(game, dyn.profile, filtered)
        if best is None or eps < best[0]:
            best = (eps, t, dyn.profile, filtered)
        if eps <= config.epsilon and delta <= config.belief_tol:
            trace.append(IterationRecord(t, eps, delta, False))
            best = (eps, t, dyn.profile, filtered)
            converged = True
            break
        if delta >= prev_delta:
            stall += 1
        else:
            stall = 0
        prev_delta = delta
        damped = stall >= config.damping_patience
        trace.append(IterationRecord(t, eps, delta, damped))
        if damped:
            current = filtered.averaged(current, config.damping_weight)
            stall = 0
            prev_delta = np.inf
        else:
            current = filtered
    assert best is not None
    _, best_iter, profile, beliefs = best
    values = cumulative_values(game, profile, beliefs)
    epsilon = check_sequential_rationality(game, profile, beliefs)
    discrepancy = check_belief_consistency(game, profile, beliefs, x0)
    return EquilibriumReport(
        game=game,
        x0=x0,
        strategies=profile,
        beliefs=beliefs,
        values=values,
        epsilon=epsilon,
        discrepancy=discrepancy,
        converged=converged,
        best_iteration=best_iter,
        trace=tuple(trace),
    )
