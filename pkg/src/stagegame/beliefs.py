"""Belief formation: Bayes updates over opponent types and forward filtering.

Each player tracks a conditional distribution over the opponent's type.  Two
update routes are provided: a history-based update from an observed action
pair, and a Markov update that conditions on a state transition only, summing
the action pairs consistent with it.  `forward_beliefs` runs the exact joint
filter over (state, opponent type) from a start state and tabulates the
per-state conditionals for every stage.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .game import MultiStageGame, StrategyProfile, transition
from .validation import check_stochastic_rows

__all__ = [
    "BeliefTable",
    "BeliefDiagnostic",
    "History",
    "MarkovUpdate",
    "history_update",
    "transition_likelihood",
    "markov_update",
    "forward_beliefs",
]

_DIAG_KINDS = ("unreachable", "zero-denominator", "predecessor-disagreement")


@dataclass(frozen=True)
class BeliefDiagnostic:
    player: int
    stage: int
    state: str
    own_type: str
    kind: str


@dataclass(frozen=True, eq=False)
class BeliefTable:
    """Per-stage, per-state conditional type beliefs for both players.

    tables1[k] has shape ``(n_states, n_types1, n_types2)``: player 1's belief
    over player 2's types, per state and own type.  tables2 swaps the roles.
    Diagnostics record states where a fallback to the prior happened and do
    not participate in distances or exports.
    """

    game: MultiStageGame
    tables1: tuple[np.ndarray, ...]
    tables2: tuple[np.ndarray, ...]
    diagnostics: tuple[BeliefDiagnostic, ...] = field(default=())

    def __post_init__(self):
        for i, name in ((1, "tables1"), (2, "tables2")):
            seq = getattr(self, name)
            if len(seq) != self.game.horizon + 1:
                raise ValueError(f"{name}: expected {self.game.horizon + 1} stage arrays")
            out = []
            mi, mj = self.game.n_types(i), self.game.n_types(3 - i)
            for k, arr in enumerate(seq):
                arr = np.array(arr, dtype=float)
                want = (self.game.n_states(k), mi, mj)
                if arr.shape != want:
                    raise ValueError(f"{name}[{k}]: shape {arr.shape} != expected {want}")
                check_stochastic_rows(arr, f"{name}[{k}]")
                arr.setflags(write=False)
                out.append(arr)
            object.__setattr__(self, name, tuple(out))

    def table(self, i: int, k: int) -> np.ndarray:
        return (self.tables1 if i == 1 else self.tables2)[k]

    def slice(self, i: int, k: int, x: str, own_type: str) -> np.ndarray:
        k = self.game.check_stage(k)
        return self.table(i, k)[
            self.game.state_index(k, x), self.game.type_index(i, own_type)
        ].copy()

    @classmethod
    def uniform(cls, game: MultiStageGame) -> "BeliefTable":
        t1 = [
            np.full((game.n_states(k), game.n_types(1), game.n_types(2)), 1.0 / game.n_types(2))
            for k in range(game.horizon + 1)
        ]
        t2 = [
            np.full((game.n_states(k), game.n_types(2), game.n_types(1)), 1.0 / game.n_types(1))
            for k in range(game.horizon + 1)
        ]
        return cls(game, tuple(t1), tuple(t2))

    @classmethod
    def from_priors(cls, game: MultiStageGame) -> "BeliefTable":
        t1 = [
            np.broadcast_to(game.prior1, (game.n_states(k),) + game.prior1.shape).copy()
            for k in range(game.horizon + 1)
        ]
        t2 = [
            np.broadcast_to(game.prior2, (game.n_states(k),) + game.prior2.shape).copy()
            for k in range(game.horizon + 1)
        ]
        return cls(game, tuple(t1), tuple(t2))

    @classmethod
    def point_mass(cls, game: MultiStageGame, type1: str, type2: str) -> "BeliefTable":
        """Both players certain of the joint type (complete information)."""
        j1 = game.type_index(1, type1)
        j2 = game.type_index(2, type2)
        t1, t2 = [], []
        for k in range(game.horizon + 1):
            a = np.zeros((game.n_states(k), game.n_types(1), game.n_types(2)))
            a[:, :, j2] = 1.0
            b = np.zeros((game.n_states(k), game.n_types(2), game.n_types(1)))
            b[:, :, j1] = 1.0
            t1.append(a)
            t2.append(b)
        return cls(game, tuple(t1), tuple(t2))

    def sup_distance(self, other: "BeliefTable") -> float:
        d = 0.0
        for mine, theirs in ((self.tables1, other.tables1), (self.tables2, other.tables2)):
            for a, b in zip(mine, theirs):
                if a.shape != b.shape:
                    raise ValueError("belief tables have mismatched shapes")
                if a.size:
                    d = max(d, float(np.max(np.abs(a - b))))
        return d

    def averaged(self, other: "BeliefTable", weight: float) -> "BeliefTable":
        """Convex combination weight*self + (1-weight)*other, diagnostics dropped."""
        t1 = tuple(weight * a + (1.0 - weight) * b for a, b in zip(self.tables1, other.tables1))
        t2 = tuple(weight * a + (1.0 - weight) * b for a, b in zip(self.tables2, other.tables2))
        return BeliefTable(self.game, t1, t2)

    def to_csv(self, path) -> None:
        """Write rows (player, stage, state, own_type, opp_type, probability).

        Deterministic row order: player, stage, then state/type declaration
        order, so repeated exports are byte-identical.
        """
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["player", "stage", "state", "own_type", "opp_type", "probability"])
            for i in (1, 2):
                own = self.game.type_labels(i)
                opp = self.game.type_labels(3 - i)
                for k in range(self.game.horizon + 1):
                    tab = self.table(i, k)
                    for xi, x in enumerate(self.game.states[k]):
                        for ti, tl in enumerate(own):
                            for oj, ol in enumerate(opp):
                                w.writerow([i, k, x, tl, ol, repr(float(tab[xi, ti, oj]))])

    def to_jsonable(self) -> dict:
        out: dict = {}
        for i, key in ((1, "player1"), (2, "player2")):
            own = self.game.type_labels(i)
            opp = self.game.type_labels(3 - i)
            stages = []
            for k in range(self.game.horizon + 1):
                tab = self.table(i, k)
                stages.append(
                    {
                        x: {
                            tl: dict(zip(opp, tab[xi, ti].tolist()))
                            for ti, tl in enumerate(own)
                        }
                        for xi, x in enumerate(self.game.states[k])
                    }
                )
            out[key] = stages
        return out


@dataclass(frozen=True)
class History:
    """Ordered (player-1 action, player-2 action) label pairs from stage 0."""

    pairs: tuple[tuple[str, str], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def state_path(self, game: MultiStageGame, x0: str) -> tuple[str, ...]:
        """State labels visited from `x0`, one per stage 0..len(pairs)."""
        if len(self.pairs) > game.horizon:
            raise ValueError(f"history has {len(self.pairs)} pairs, horizon is {game.horizon}")
        path = [x0]
        game.state_index(0, x0)
        for k, (a1, a2) in enumerate(self.pairs):
            path.append(transition(game, k, path[-1], a1, a2))
        return tuple(path)


class MarkovUpdate(NamedTuple):
    posterior: np.ndarray
    fallback: bool


def _bayes_step(game, strategies, k, x_label, belief, pair, prior_row, i, theta_i_idx):
    """One observed-action-pair update; zero denominator resets to the prior."""
    j = 3 - i
    xi = game.state_index(k, x_label)
    a_own = game.action_index(i, k, pair[0] if i == 1 else pair[1])
    a_opp = game.action_index(j, k, pair[0] if j == 1 else pair[1])
    own = strategies.sigma(i, k)[xi, theta_i_idx, a_own]
    opp = strategies.sigma(j, k)[xi, :, a_opp]
    num = own * opp * belief
    den = float(num.sum())
    if den <= 0.0:
        return prior_row.copy(), True
    return num / den, False


def history_update(
    game: MultiStageGame,
    strategies: StrategyProfile,
    prior,
    i: int,
    theta_i: str,
    history: History,
    observed: tuple[str, str],
    x0: str,
) -> np.ndarray:
    """Posterior over the opponent's types after observing `observed`.

    The belief is replayed from `prior` along `history` starting at `x0`, then
    updated once more with the observed stage-``len(history)`` action pair.
    `prior` may be None to use the player's own prior row from the game.  Any
    zero-probability observation resets the running belief to that prior row.
    """
    if i not in (1, 2):
        raise ValueError("player must be 1 or 2")
    ti = game.type_index(i, theta_i)
    prior_row = game.prior(i)[ti] if prior is None else np.asarray(prior, dtype=float)
    if prior_row.shape != (game.n_types(3 - i),):
        raise ValueError("prior row has wrong length")
    stage = len(history)
    game.check_stage(stage)
    path = history.state_path(game, x0)
    belief = prior_row.copy()
    for k, pair in enumerate(history.pairs):
        belief, _ = _bayes_step(game, strategies, k, path[k], belief, pair, prior_row, i, ti)
    belief, _ = _bayes_step(game, strategies, stage, path[-1], belief, observed, prior_row, i, ti)
    return belief


def transition_likelihood(
    game: MultiStageGame,
    strategies: StrategyProfile,
    k: int,
    x: str,
    x_next: str,
    i: int,
    theta_i: str,
    theta_j: str,
) -> float:
    """Probability that stage-k state `x` moves to `x_next`.

    Conditioning fixes player i's own type to `theta_i` and the opponent's
    strategy to type `theta_j`; the mass sums the action pairs that map `x`
    to `x_next`.
    """
    k = game.check_stage(k, terminal=False)
    xi = game.state_index(k, x)
    xn = game.state_index(k + 1, x_next)
    j = 3 - i
    ti = game.type_index(i, theta_i)
    tj = game.type_index(j, theta_j)
    t1, t2 = (ti, tj) if i == 1 else (tj, ti)
    s1 = strategies.sigma1[k][xi, t1, :]
    s2 = strategies.sigma2[k][xi, t2, :]
    mask = game.transitions[k][xi] == xn
    return float(s1 @ mask @ s2)


def markov_update(
    game: MultiStageGame,
    strategies: StrategyProfile,
    k: int,
    x: str,
    x_next: str,
    i: int,
    theta_i: str,
    belief_slice,
) -> MarkovUpdate:
    """Belief update conditioned on the state transition alone.

    Weighs `belief_slice` by the per-opponent-type transition likelihood and
    normalizes.  A zero denominator (transition impossible under the profile)
    falls back to the player's prior row and sets the fallback flag.
    """
    j = 3 - i
    ti = game.type_index(i, theta_i)
    belief_slice = np.asarray(belief_slice, dtype=float)
    if belief_slice.shape != (game.n_types(j),):
        raise ValueError("belief slice has wrong length")
    like = np.array(
        [
            transition_likelihood(game, strategies, k, x, x_next, i, theta_i, tl)
            for tl in game.type_labels(j)
        ]
    )
    num = like * belief_slice
    den = float(num.sum())
    if den <= 0.0:
        return MarkovUpdate(game.prior(i)[ti].copy(), True)
    return MarkovUpdate(num / den, False)


def _stage_kernel(game, strategies, k, i, ti):
    """Transition kernel (n_states_k, n_types_j, n_states_{k+1}) for player i.

    Own type fixed to index `ti`; entry [x, tj, x'] is the probability of the
    move x -> x' when the opponent is of type tj.
    """
    j = 3 - i
    nx, nxn = game.n_states(k), game.n_states(k + 1)
    mj = game.n_types(j)
    kernel = np.zeros((nx, mj, nxn))
    trans = game.transitions[k]
    for xi in range(nx):
        if i == 1:
            own = strategies.sigma1[k][xi, ti, :]   # (na1,)
            opp = strategies.sigma2[k][xi, :, :]    # (mj, na2)
            for a1 in range(game.n_actions(1, k)):
                for a2 in range(game.n_actions(2, k)):
                    kernel[xi, :, trans[xi, a1, a2]] += own[a1] * opp[:, a2]
        else:
            own = strategies.sigma2[k][xi, ti, :]   # (na2,)
            opp = strategies.sigma1[k][xi, :, :]    # (mj, na1)
            for a1 in range(game.n_actions(1, k)):
                for a2 in range(game.n_actions(2, k)):
                    kernel[xi, :, trans[xi, a1, a2]] += opp[:, a1] * own[a2]
    return kernel


def forward_beliefs(
    game: MultiStageGame,
    strategies: StrategyProfile,
    x0: str,
    priors: tuple[np.ndarray, np.ndarray] | None = None,
) -> BeliefTable:
    """Tabulate every player's per-state type beliefs induced by the profile.

    Runs, for each player and own type, the exact filter over joint
    (state, opponent type) mass from `x0`, and normalizes each state's slice.
    States carrying no mass at a stage get the prior row and an "unreachable"
    diagnostic.  When several predecessors feed one state with conflicting
    single-step posteriors, the filtered slice is their reach-weighted blend
    and a "predecessor-disagreement" diagnostic is recorded.
    """
    x0i = game.state_index(0, x0)
    if priors is None:
        p1, p2 = game.prior1, game.prior2
    else:
        p1 = check_stochastic_rows(priors[0], "priors[0]")
        p2 = check_stochastic_rows(priors[1], "priors[1]")
        if p1.shape != game.prior1.shape or p2.shape != game.prior2.shape:
            raise ValueError("prior overrides have wrong shapes")
    tables = {
        1: [np.zeros((game.n_states(k), game.n_types(1), game.n_types(2)))
            for k in range(game.horizon + 1)],
        2: [np.zeros((game.n_states(k), game.n_types(2), game.n_types(1)))
            for k in range(game.horizon + 1)],
    }
    diagnostics: list[BeliefDiagnostic] = []
    for i, prior in ((1, p1), (2, p2)):
        for ti, tlabel in enumerate(game.type_labels(i)):
            prior_row = prior[ti]
            mu = np.zeros((game.n_states(0), game.n_types(3 - i)))
            mu[x0i] = prior_row
            for k in range(game.horizon + 1):
                for xi, xlabel in enumerate(game.states[k]):
                    mass = float(mu[xi].sum())
                    if mass > 0.0:
                        tables[i][k][xi, ti] = mu[xi] / mass
                    else:
                        tables[i][k][xi, ti] = prior_row
                        diagnostics.append(
                            BeliefDiagnostic(i, k, xlabel, tlabel, "unreachable")
                        )
                if k == game.horizon:
                    break
                kernel = _stage_kernel(game, strategies, k, i, ti)
                nxt = np.einsum("xt,xtn->nt", mu, kernel)
                for xn in range(game.n_states(k + 1)):
                    feeders = [
                        xi
                        for xi in range(game.n_states(k))
                        if float((mu[xi] * kernel[xi, :, xn]).sum()) > 0.0
                    ]
                    if len(feeders) > 1:
                        locals_ = [mu[xi] * kernel[xi, :, xn] for xi in feeders]
                        locals_ = [v / v.sum() for v in locals_]
                        spread = max(
                            float(np.max(np.abs(a - b)))
                            for a in locals_
                            for b in locals_
                        )
                        if spread > 1e-12:
                            diagnostics.append(
                                BeliefDiagnostic(
                                    i, k + 1, game.states[k + 1][xn], tlabel,
                                    "predecessor-disagreement",
                                )
                            )
                mu = nxt
    return BeliefTable(
        game,
        tuple(tables[1]),
        tuple(tables[2]),
        tuple(diagnostics),
    )
