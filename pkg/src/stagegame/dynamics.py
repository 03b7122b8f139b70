"""Backward induction under a fixed belief table, and profile evaluation.

`backward_pass` solves the stage game at every (stage, state) from the last
stage down, feeding each solved stage's interim values into the previous one
as continuation payoffs.  The companion evaluators compute cumulative
utilities of an arbitrary profile under a belief table, best-response values
against a fixed opponent, and type-fixed (realized) path quantities.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .beliefs import BeliefTable
from .game import MultiStageGame, StrategyProfile
from .staticeq import SolverConfig, StageGameView, solve_sbne

__all__ = [
    "ValueTable",
    "DynamicEquilibrium",
    "BestResponseResult",
    "backward_pass",
    "cumulative_values",
    "evaluate_cumulative_utility",
    "best_response_value",
    "reach_distributions",
    "realized_utility",
]


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Per-stage, per-state, per-own-type values for both players.

    values1[k] has shape ``(n_states_k, n_types1)``; values2 likewise.
    """

    game: MultiStageGame
    values1: tuple[np.ndarray, ...]
    values2: tuple[np.ndarray, ...]

    def __post_init__(self):
        for i, name in ((1, "values1"), (2, "values2")):
            seq = getattr(self, name)
            if len(seq) != self.game.horizon + 1:
                raise ValueError(f"{name}: expected {self.game.horizon + 1} stage arrays")
            out = []
            for k, arr in enumerate(seq):
                arr = np.array(arr, dtype=float)
                want = (self.game.n_states(k), self.game.n_types(i))
                if arr.shape != want:
                    raise ValueError(f"{name}[{k}]: shape {arr.shape} != expected {want}")
                arr.setflags(write=False)
                out.append(arr)
            object.__setattr__(self, name, tuple(out))

    def values(self, i: int, k: int) -> np.ndarray:
        return (self.values1 if i == 1 else self.values2)[k]

    def value(self, i: int, k: int, x: str, type_label: str) -> float:
        k = self.game.check_stage(k)
        return float(
            self.values(i, k)[self.game.state_index(k, x), self.game.type_index(i, type_label)]
        )

    def to_csv(self, path) -> None:
        """Rows (player, stage, state, type, value) in declaration order."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["player", "stage", "state", "type", "value"])
            for i in (1, 2):
                for k in range(self.game.horizon + 1):
                    vals = self.values(i, k)
                    for xi, x in enumerate(self.game.states[k]):
                        for ti, tl in enumerate(self.game.type_labels(i)):
                            w.writerow([i, k, x, tl, repr(float(vals[xi, ti]))])

    def to_jsonable(self) -> dict:
        out: dict = {}
        for i, key in ((1, "player1"), (2, "player2")):
            stages = []
            for k in range(self.game.horizon + 1):
                vals = self.values(i, k)
                stages.append(
                    {
                        x: dict(zip(self.game.type_labels(i), vals[xi].tolist()))
                        for xi, x in enumerate(self.game.states[k])
                    }
                )
            out[key] = stages
        return out


@dataclass(frozen=True, eq=False)
class DynamicEquilibrium:
    """Stagewise-equilibrium profile with its value tables and residuals.

    residuals[k][x] is the certificate residual of the stage game solved at
    (k, x); strategies are defined at every state, on or off the path.
    """

    profile: StrategyProfile
    values: ValueTable
    residuals: tuple[np.ndarray, ...]

    @property
    def max_residual(self) -> float:
        return max(float(r.max()) if r.size else 0.0 for r in self.residuals)


def backward_pass(
    game: MultiStageGame, beliefs: BeliefTable, config: SolverConfig | None = None
) -> DynamicEquilibrium:
    """Solve every stage game from the last stage backward.

    Beliefs are taken as given (they need not be consistent with the result);
    each (stage, state) is solved with that state's belief slices and the
    already-computed next-stage values as continuation payoffs.
    """
    config = config or SolverConfig()
    if config.enumerate_all:
        raise ValueError("backward_pass needs a single-selection solver config")
    sig1: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    sig2: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    val1: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    val2: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    res: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    m1, m2 = game.n_types(1), game.n_types(2)
    for k in range(game.horizon, -1, -1):
        nx = game.n_states(k)
        sig1[k] = np.zeros((nx, m1, game.n_actions(1, k)))
        sig2[k] = np.zeros((nx, m2, game.n_actions(2, k)))
        val1[k] = np.zeros((nx, m1))
        val2[k] = np.zeros((nx, m2))
        res[k] = np.zeros(nx)
        cont = None if k == game.horizon else (val1[k + 1], val2[k + 1])
        for xi, x in enumerate(game.states[k]):
            view = StageGameView.from_stage(game, k, x, beliefs, cont)
            eq = solve_sbne(view, config)
            sig1[k][xi] = eq.sigma1
            sig2[k][xi] = eq.sigma2
            val1[k][xi] = eq.values1
            val2[k][xi] = eq.values2
            res[k][xi] = eq.residual
    profile = StrategyProfile(game, tuple(sig1), tuple(sig2))
    values = ValueTable(game, tuple(val1), tuple(val2))
    return DynamicEquilibrium(profile, values, tuple(np.asarray(r) for r in res))


def _effective_payoffs(game, k, i, next_values):
    """Stage-k payoff to player i plus the successor value, per joint type.

    Shape ``(n_states, na1, na2, m1, m2)``; `next_values` is the player's
    stage-(k+1) value array or None at the terminal stage.
    """
    eff = game.utilities[k][..., 0 if i == 1 else 1].copy()
    if next_values is not None:
        nxt = game.transitions[k]  # (nx, na1, na2)
        cont = next_values[nxt]  # (nx, na1, na2, m_i)
        if i == 1:
            eff += cont[..., :, None]
        else:
            eff += cont[..., None, :]
    return eff


def cumulative_values(
    game: MultiStageGame, strategies: StrategyProfile, beliefs: BeliefTable
) -> ValueTable:
    """Expected utility-to-go of the profile for every (stage, state, type).

    At each stage the opponent's type is weighed by that stage's belief slice,
    so the recursion is U_i^k(x,t) = E_b[ J_i^k + U_i^{k+1}(successor, t) ]
    with both players' stage actions drawn from the profile.
    """
    u1: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    u2: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    for k in range(game.horizon, -1, -1):
        nv1 = None if k == game.horizon else u1[k + 1]
        nv2 = None if k == game.horizon else u2[k + 1]
        eff1 = _effective_payoffs(game, k, 1, nv1)
        eff2 = _effective_payoffs(game, k, 2, nv2)
        s1, s2 = strategies.sigma1[k], strategies.sigma2[k]
        b1, b2 = beliefs.table(1, k), beliefs.table(2, k)
        u1[k] = np.einsum("xij,xia,xjb,xabij->xi", b1, s1, s2, eff1)
        u2[k] = np.einsum("xji,xia,xjb,xabij->xj", b2, s1, s2, eff2)
    return ValueTable(game, tuple(u1), tuple(u2))


def evaluate_cumulative_utility(
    game: MultiStageGame,
    strategies: StrategyProfile,
    beliefs: BeliefTable,
    k: int,
    x: str,
    i: int,
    theta_i: str,
) -> float:
    """Expected utility-to-go from stage k at state `x` for one type."""
    table = cumulative_values(game, strategies, beliefs)
    return table.value(i, game.check_stage(k), x, theta_i)


@dataclass(frozen=True, eq=False)
class BestResponseResult:
    """Best response of player i against the profile's opponent side.

    values[k] (shape ``(n_states_k, n_types_i)``) is the optimal utility-to-go;
    actions[k] the optimal pure stage action (lowest index on ties); gains[k]
    the improvement over the candidate profile's own cumulative utility.
    """

    player: int
    values: tuple[np.ndarray, ...]
    actions: tuple[np.ndarray, ...]
    gains: tuple[np.ndarray, ...]
    max_gain: float


def best_response_value(
    game: MultiStageGame,
    strategies: StrategyProfile,
    beliefs: BeliefTable,
    i: int,
) -> BestResponseResult:
    """Dynamic-programming best response for player i.

    The opponent's side of `strategies` is held fixed; player i's side is used
    only as the candidate whose cumulative utilities define the gains.
    """
    if i not in (1, 2):
        raise ValueError("player must be 1 or 2")
    candidate = cumulative_values(game, strategies, beliefs)
    br: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    acts: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    gains: list[np.ndarray] = [None] * (game.horizon + 1)  # type: ignore[list-item]
    for k in range(game.horizon, -1, -1):
        nv = None if k == game.horizon else br[k + 1]
        eff = _effective_payoffs(game, k, i, nv)
        if i == 1:
            s_opp = strategies.sigma2[k]
            b = beliefs.table(1, k)
            q = np.einsum("xij,xjb,xabij->xia", b, s_opp, eff)
        else:
            s_opp = strategies.sigma1[k]
            b = beliefs.table(2, k)
            q = np.einsum("xji,xia,xabij->xjb", b, s_opp, eff)
        br[k] = q.max(axis=2)
        acts[k] = q.argmax(axis=2)
        gains[k] = br[k] - candidate.values(i, k)
    max_gain = max(float(g.max()) if g.size else 0.0 for g in gains)
    return BestResponseResult(
        player=i,
        values=tuple(br),
        actions=tuple(a.astype(np.intp) for a in acts),
        gains=tuple(gains),
        max_gain=max_gain,
    )


def reach_distributions(
    game: MultiStageGame,
    strategies: StrategyProfile,
    type1: str,
    type2: str,
    x0: str,
) -> tuple[np.ndarray, ...]:
    """Per-stage state distributions with both types fixed to the truth."""
    t1 = game.type_index(1, type1)
    t2 = game.type_index(2, type2)
    dist = np.zeros(game.n_states(0))
    dist[game.state_index(0, x0)] = 1.0
    out = [dist]
    for k in range(game.horizon):
        nxt = np.zeros(game.n_states(k + 1))
        trans = game.transitions[k]
        for xi in range(game.n_states(k)):
            if dist[xi] == 0.0:
                continue
            joint = np.outer(
                strategies.sigma1[k][xi, t1], strategies.sigma2[k][xi, t2]
            )
            for a1 in range(joint.shape[0]):
                for a2 in range(joint.shape[1]):
                    nxt[trans[xi, a1, a2]] += dist[xi] * joint[a1, a2]
        dist = nxt
        out.append(dist)
    return tuple(out)


def realized_utility(
    game: MultiStageGame,
    strategies: StrategyProfile,
    type1: str,
    type2: str,
    x0: str,
) -> tuple[float, float]:
    """Expected cumulative utilities with both types fixed to the truth."""
    t1 = game.type_index(1, type1)
    t2 = game.type_index(2, type2)
    reach = reach_distributions(game, strategies, type1, type2, x0)
    totals = np.zeros(2)
    for k in range(game.horizon + 1):
        u = game.utilities[k][:, :, :, t1, t2, :]  # (nx, na1, na2, 2)
        s1 = strategies.sigma1[k][:, t1, :]
        s2 = strategies.sigma2[k][:, t2, :]
        totals += np.einsum("x,xa,xb,xabp->p", reach[k], s1, s2, u)
    return float(totals[0]), float(totals[1])
