"""Experiment harness over the built-in scenario, plus Monte Carlo rollouts.

The sweep and comparison routines return small deterministic tables (column
names plus tuples of rows) ready for CSV export; belief sweeps annotate
equilibrium-switch points where the support changes between neighbouring grid
points.  Rollouts use the counter-based Philox generator so a (seed,
episodes) pair reproduces bit-identical draws across platforms.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass

import numpy as np

from .dynamics import reach_distributions, realized_utility
from .game import MultiStageGame, StrategyProfile
from .pbne import PbneConfig, solve_pbne
from .staticeq import SolverConfig, StageGameView, solve_sbne
from .te import DEFENDER_TYPES, USER_TYPES, TEParams, build_te_game, default_params

__all__ = [
    "SweepSpec",
    "TableResult",
    "RolloutResult",
    "default_grid",
    "sweep_static_belief",
    "sweep_sensitivity",
    "posterior_vs_prior",
    "state_distribution",
    "compare_information_structures",
    "rollout",
]


def default_grid(n: int = 11) -> tuple[float, ...]:
    """Evenly spaced probabilities 0..1 with exact decimal endpoints."""
    return tuple(i / (n - 1) for i in range(n))


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    For belief sweeps, `target` is "<defender|user>:<opponent type>" naming
    whose belief moves and which opponent type receives the swept probability;
    `fixed_type` is the type the other player is known to face (defaults:
    sweeping the user's belief fixes an adversarial user, sweeping the
    defender's fixes a primitive defender).  For sensitivity sweeps, `target`
    names a TEParams field.  `state` is the final-stage state under study.
    """

    target: str
    grid: tuple[float, ...] = dataclasses.field(default_factory=default_grid)
    state: str = "privilege-2"
    fixed_type: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        if len(self.grid) < 2:
            raise ValueError("sweep grid needs at least two points")


@dataclass(frozen=True)
class TableResult:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("row width does not match columns")

    def column(self, name: str) -> list:
        idx = self.columns.index(name)
        return [r[idx] for r in self.rows]

    def write_to(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_to(fh)


def _two_types(labels: tuple[str, ...], where: str) -> None:
    if len(labels) != 2:
        raise ValueError(f"{where}: belief sweeps support exactly two types")


def _point_mass(labels: tuple[str, ...], label: str) -> np.ndarray:
    vec = np.zeros(len(labels))
    vec[labels.index(label)] = 1.0
    return vec


def _final_stage_view(
    game: MultiStageGame, state: str, belief1: np.ndarray, belief2: np.ndarray
) -> StageGameView:
    b1 = np.tile(belief1, (game.n_types(1), 1))
    b2 = np.tile(belief2, (game.n_types(2), 1))
    return StageGameView.from_stage(game, game.horizon, state, (b1, b2))


def sweep_static_belief(
    params: TEParams | None,
    spec: SweepSpec,
    config: SolverConfig | None = None,
) -> TableResult:
    """Re-solve the final-stage game along a grid of one player's beliefs.

    Wide rows: the swept belief, every (player, type, action) probability,
    every (player, type) interim value, and a jump flag set when the selected
    equilibrium's support differs from the previous grid point's.
    """
    params = params or default_params()
    game = build_te_game(params)
    side, _, swept_label = spec.target.partition(":")
    if side not in ("defender", "user") or not swept_label:
        raise ValueError("belief sweep target must look like 'user:sophisticated'")
    _two_types(game.types1, "defender types")
    _two_types(game.types2, "user types")
    if side == "user":
        game.type_index(1, swept_label)
        fixed = spec.fixed_type or "adversarial"
        game.type_index(2, fixed)
    else:
        game.type_index(2, swept_label)
        fixed = spec.fixed_type or "primitive"
        game.type_index(1, fixed)

    columns: list[str] = ["belief"]
    for who, types, acts in (
        ("defender", game.types1, game.actions1[game.horizon]),
        ("user", game.types2, game.actions2[game.horizon]),
    ):
        for tl in types:
            for al in acts:
                columns.append(f"{who}:{tl}:{al}")
    for who, types in (("defender", game.types1), ("user", game.types2)):
        for tl in types:
            columns.append(f"value:{who}:{tl}")
    columns.append("jump")

    rows = []
    prev_support = None
    for q in spec.grid:
        if not (0.0 <= q <= 1.0):
            raise ValueError("belief grid points must lie in [0, 1]")
        if side == "user":
            swept = np.zeros(2)
            swept[game.type_index(1, swept_label)] = q
            swept[1 - game.type_index(1, swept_label)] = 1.0 - q
            view = _final_stage_view(game, spec.state, _point_mass(game.types2, fixed), swept)
        else:
            swept = np.zeros(2)
            swept[game.type_index(2, swept_label)] = q
            swept[1 - game.type_index(2, swept_label)] = 1.0 - q
            view = _final_stage_view(game, spec.state, swept, _point_mass(game.types1, fixed))
        eq = solve_sbne(view, config or SolverConfig())
        support = (eq.support1, eq.support2)
        jump = int(prev_support is not None and support != prev_support)
        prev_support = support
        row: list = [q]
        row.extend(float(v) for v in eq.sigma1.ravel())
        row.extend(float(v) for v in eq.sigma2.ravel())
        row.extend(float(v) for v in eq.values1)
        row.extend(float(v) for v in eq.values2)
        row.append(jump)
        rows.append(tuple(row))
    return TableResult(tuple(columns), tuple(rows))


def sweep_sensitivity(
    params: TEParams | None,
    spec: SweepSpec,
    config: SolverConfig | None = None,
) -> TableResult:
    """Sweep one TEParams field; complete-information final stage per state.

    Each grid point rebuilds the scenario with the field replaced, then
    solves the (primitive defender, adversarial user) complete-information
    game at every final-stage state.
    """
    params = params or default_params()
    if not any(f.name == spec.target for f in dataclasses.fields(params)):
        raise ValueError(f"unknown TEParams field {spec.target!r}")
    rows = []
    for g in spec.grid:
        swept = dataclasses.replace(params, **{spec.target: g})
        game = build_te_game(swept)
        for state in game.states[game.horizon]:
            view = _final_stage_view(
                game,
                state,
                _point_mass(game.types2, "adversarial"),
                _point_mass(game.types1, "primitive"),
            )
            eq = solve_sbne(view, config or SolverConfig())
            rows.append(
                (
                    float(g),
                    state,
                    float(eq.values1[game.type_index(1, "primitive")]),
                    float(eq.values2[game.type_index(2, "adversarial")]),
                )
            )
    return TableResult((spec.target, "state", "defender_utility", "attacker_utility"), tuple(rows))


def _defender_marginal(game: MultiStageGame) -> np.ndarray:
    return game.prior2.mean(axis=0)


def posterior_vs_prior(
    params: TEParams | None = None,
    grid: tuple[float, ...] | None = None,
    x0: str = "effectual",
    config: PbneConfig | None = None,
) -> TableResult:
    """Defender's final-stage belief that the user is adversarial, per prior.

    For each prior, the game is re-solved; the posterior is path-weighted by
    the type-fixed reach probabilities under a truly adversarial user and
    averaged over defender types by the user-side prior's marginal.
    """
    params = params or default_params()
    grid = tuple(grid) if grid is not None else default_grid()
    adv = USER_TYPES.index("adversarial")
    rows = []
    for p in grid:
        game = build_te_game(params, prior_adversarial=float(p))
        report = solve_pbne(game, x0, config)
        marginal = _defender_marginal(game)
        posterior = 0.0
        for ti, tl in enumerate(DEFENDER_TYPES):
            reach = reach_distributions(game, report.strategies, tl, "adversarial", x0)
            final = reach[game.horizon]
            slices = report.beliefs.table(1, game.horizon)[:, ti, adv]
            posterior += marginal[ti] * float(final @ slices)
        rows.append((float(p), posterior, int(report.converged)))
    return TableResult(("prior", "posterior", "converged"), tuple(rows))


def state_distribution(
    params: TEParams | None = None,
    grid: tuple[float, ...] | None = None,
    x0: str = "effectual",
    config: PbneConfig | None = None,
) -> TableResult:
    """Exact final-state reach probabilities per prior, types marginalized."""
    params = params or default_params()
    grid = tuple(grid) if grid is not None else default_grid()
    rows = []
    for p in grid:
        game = build_te_game(params, prior_adversarial=float(p))
        report = solve_pbne(game, x0, config)
        marginal1 = _defender_marginal(game)
        user_marginal = np.array([float(p), 1.0 - float(p)])
        dist = np.zeros(game.n_states(game.horizon))
        for ti, tl in enumerate(DEFENDER_TYPES):
            for uj, ul in enumerate(USER_TYPES):
                weight = marginal1[ti] * user_marginal[uj]
                if weight == 0.0:
                    continue
                dist += weight * reach_distributions(
                    game, report.strategies, tl, ul, x0
                )[game.horizon]
        for xi, state in enumerate(game.states[game.horizon]):
            rows.append((float(p), state, float(dist[xi])))
    return TableResult(("prior", "state", "probability"), tuple(rows))


def compare_information_structures(
    params: TEParams | None = None,
    x0s: tuple[str, ...] = ("ineffectual", "effectual"),
    config: PbneConfig | None = None,
) -> TableResult:
    """Realized cumulative utilities under three information regimes.

    The user is truly adversarial throughout.  "complete": both types common
    knowledge.  "one-sided": the user knows the defender's type, the defender
    keeps an even prior over user types.  "double-sided": both keep even
    priors.  Utilities are expected sums with the true types fixed.
    """
    params = params or default_params()
    rows = []
    base = config or PbneConfig()
    for regime in ("complete", "one-sided", "double-sided"):
        for x0 in x0s:
            if regime == "double-sided":
                game = build_te_game(params, 0.5, 0.5)
                report = solve_pbne(game, x0, base)
                for tl in DEFENDER_TYPES:
                    u_def, u_att = realized_utility(game, report.strategies, tl, "adversarial", x0)
                    rows.append((regime, x0, tl, 1, u_def))
                    rows.append((regime, x0, tl, 2, u_att))
                continue
            for tl in DEFENDER_TYPES:
                p_soph = 1.0 if tl == "sophisticated" else 0.0
                if regime == "complete":
                    game = build_te_game(params, 1.0, p_soph)
                    cfg = dataclasses.replace(base, init="prior")
                else:
                    game = build_te_game(params, 0.5, p_soph)
                    cfg = base
                report = solve_pbne(game, x0, cfg)
                u_def, u_att = realized_utility(game, report.strategies, tl, "adversarial", x0)
                rows.append((regime, x0, tl, 1, u_def))
                rows.append((regime, x0, tl, 2, u_att))
    return TableResult(("regime", "x0", "defender_type", "player", "utility"), tuple(rows))


@dataclass(frozen=True)
class RolloutResult:
    """Monte Carlo summary; keys of the per-type dicts are (player, type)."""

    episodes: int
    seed: int
    generator: str
    means: dict
    std_errors: dict
    counts: dict
    final_state_distribution: dict

    def to_jsonable(self) -> dict:
        def keyed(d):
            return {f"{i}:{tl}": v for (i, tl), v in d.items()}

        return {
            "episodes": self.episodes,
            "seed": self.seed,
            "generator": self.generator,
            "means": keyed(self.means),
            "std_errors": keyed(self.std_errors),
            "counts": keyed(self.counts),
            "final_state_distribution": dict(self.final_state_distribution),
        }


def _sample_rows(rng, cum: np.ndarray) -> np.ndarray:
    """One categorical draw per row of cumulative probabilities."""
    u = rng.random(cum.shape[0])
    return (u[:, None] > cum).sum(axis=1)


def rollout(
    game: MultiStageGame,
    strategies: StrategyProfile,
    x0: str,
    episodes: int,
    seed: int,
) -> RolloutResult:
    """Simulate play and summarize utilities per (player, own type).

    Types are drawn independently from the row-averages of the opposite
    side's priors (exact for row-constant priors).  Uses the counter-based
    Philox bit generator; identical (seed, episodes) reproduce identical
    results.
    """
    if episodes < 1:
        raise ValueError("episodes must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(episodes)
    marginal1 = game.prior2.mean(axis=0)
    marginal2 = game.prior1.mean(axis=0)
    t1 = np.minimum(_sample_rows(rng, np.tile(np.cumsum(marginal1), (n, 1))), game.n_types(1) - 1)
    t2 = np.minimum(_sample_rows(rng, np.tile(np.cumsum(marginal2), (n, 1))), game.n_types(2) - 1)
    states = np.full(n, game.state_index(0, x0), dtype=np.intp)
    utilities = np.zeros((n, 2))
    for k in range(game.horizon + 1):
        cum1 = np.cumsum(strategies.sigma1[k], axis=2)
        cum2 = np.cumsum(strategies.sigma2[k], axis=2)
        a1 = _sample_rows(rng, cum1[states, t1])
        a2 = _sample_rows(rng, cum2[states, t2])
        a1 = np.minimum(a1, game.n_actions(1, k) - 1)
        a2 = np.minimum(a2, game.n_actions(2, k) - 1)
        utilities += game.utilities[k][states, a1, a2, t1, t2, :]
        if k < game.horizon:
            states = game.transitions[k][states, a1, a2]
    means: dict = {}
    errors: dict = {}
    counts: dict = {}
    for i, labels, draws in ((1, game.types1, t1), (2, game.types2, t2)):
        for ti, tl in enumerate(labels):
            mask = draws == ti
            c = int(mask.sum())
            counts[(i, tl)] = c
            if c == 0:
                means[(i, tl)] = None
                errors[(i, tl)] = None
                continue
            vals = utilities[mask, i - 1]
            means[(i, tl)] = float(vals.mean())
            errors[(i, tl)] = (
                float(vals.std(ddof=1) / np.sqrt(c)) if c > 1 else None
            )
    final_labels = game.states[game.horizon]
    hist = np.bincount(states, minlength=len(final_labels)).astype(float) / n
    return RolloutResult(
        episodes=n,
        seed=int(seed),
        generator="philox",
        means=means,
        std_errors=errors,
        counts=counts,
        final_state_distribution={lab: float(hist[xi]) for xi, lab in enumerate(final_labels)},
    )
