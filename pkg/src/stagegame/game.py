"""Finite two-player multi-stage Bayesian games with deterministic transitions.

A game runs over stages 0..horizon.  Each stage has its own state space and
per-player action spaces.  Both players carry a private type drawn once before
stage 0; stage utilities depend on the joint type, and each player holds a
conditional prior over the opponent's type given their own.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .validation import check_labels, check_stochastic_rows, label_index

__all__ = [
    "MultiStageGame",
    "StrategyProfile",
    "SchemaError",
    "Violation",
    "ValidationReport",
    "transition",
    "stage_utility",
    "validate_game",
    "parse_game",
    "serialize_game",
    "games_equal",
]

_PLAYER_KEYS = ("player1", "player2")


class SchemaError(ValueError):
    """Scenario input does not match the expected layout.

    ``path`` names the offending location, e.g. ``stages[1].utilities[0][2]``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Violation:
    location: str
    rule: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MultiStageGame:
    """Immutable game data.

    utilities[k] has shape ``(n_states, n_act1, n_act2, n_types1, n_types2, 2)``
    with the trailing axis holding the (player 1, player 2) stage payoffs.
    transitions[k] (defined for k < horizon) holds indices into the stage-(k+1)
    state list.  prior1[t1] is player 1's prior over player 2's types given own
    type t1; prior2 likewise with the roles swapped.

    The constructor enforces structural consistency (lengths, shapes, label
    uniqueness).  Value-level invariants (finite utilities, transition targets
    in range, prior rows summing to one) are checked by :func:`validate_game`.
    """

    horizon: int
    types1: tuple[str, ...]
    types2: tuple[str, ...]
    states: tuple[tuple[str, ...], ...]
    actions1: tuple[tuple[str, ...], ...]
    actions2: tuple[tuple[str, ...], ...]
    utilities: tuple[np.ndarray, ...]
    transitions: tuple[np.ndarray, ...]
    prior1: np.ndarray
    prior2: np.ndarray

    def __post_init__(self):
        k_end = self.horizon
        if not isinstance(k_end, int) or k_end < 0:
            raise ValueError("horizon must be a nonnegative integer")
        object.__setattr__(self, "types1", check_labels(self.types1, "types1"))
        object.__setattr__(self, "types2", check_labels(self.types2, "types2"))
        for name in ("states", "actions1", "actions2"):
            seq = getattr(self, name)
            if len(seq) != k_end + 1:
                raise ValueError(f"{name}: expected {k_end + 1} stage entries, got {len(seq)}")
            object.__setattr__(
                self, name, tuple(check_labels(s, f"{name}[{k}]") for k, s in enumerate(seq))
            )
        if len(self.utilities) != k_end + 1:
            raise ValueError(f"utilities: expected {k_end + 1} stage tensors")
        if len(self.transitions) != k_end:
            raise ValueError(f"transitions: expected {k_end} stage tensors")
        m1, m2 = len(self.types1), len(self.types2)
        utils = []
        for k, u in enumerate(self.utilities):
            u = np.array(u, dtype=float)
            want = (self.n_states(k), self.n_actions(1, k), self.n_actions(2, k), m1, m2, 2)
            if u.shape != want:
                raise ValueError(f"utilities[{k}]: shape {u.shape} != expected {want}")
            utils.append(_frozen(u))
        object.__setattr__(self, "utilities", tuple(utils))
        trans = []
        for k, t in enumerate(self.transitions):
            t = np.array(t, dtype=np.intp)
            want = (self.n_states(k), self.n_actions(1, k), self.n_actions(2, k))
            if t.shape != want:
                raise ValueError(f"transitions[{k}]: shape {t.shape} != expected {want}")
            trans.append(_frozen(t))
        object.__setattr__(self, "transitions", tuple(trans))
        p1 = np.array(self.prior1, dtype=float)
        p2 = np.array(self.prior2, dtype=float)
        if p1.shape != (m1, m2):
            raise ValueError(f"prior1: shape {p1.shape} != expected {(m1, m2)}")
        if p2.shape != (m2, m1):
            raise ValueError(f"prior2: shape {p2.shape} != expected {(m2, m1)}")
        object.__setattr__(self, "prior1", _frozen(p1))
        object.__setattr__(self, "prior2", _frozen(p2))

    # -- label/space accessors -------------------------------------------------

    def n_types(self, i: int) -> int:
        return len(self.types1) if i == 1 else len(self.types2)

    def type_labels(self, i: int) -> tuple[str, ...]:
        return self.types1 if i == 1 else self.types2

    def n_states(self, k: int) -> int:
        return len(self.states[k])

    def n_actions(self, i: int, k: int) -> int:
        return len((self.actions1 if i == 1 else self.actions2)[k])

    def action_labels(self, i: int, k: int) -> tuple[str, ...]:
        return (self.actions1 if i == 1 else self.actions2)[k]

    def prior(self, i: int) -> np.ndarray:
        return self.prior1 if i == 1 else self.prior2

    def check_stage(self, k: int, terminal: bool = True) -> int:
        last = self.horizon if terminal else self.horizon - 1
        if not isinstance(k, (int, np.integer)) or k < 0 or k > last:
            raise IndexError(f"stage {k} out of range 0..{last}")
        return int(k)

    def state_index(self, k: int, label: str) -> int:
        return label_index(label, self.states[k], f"states[{k}]")

    def action_index(self, i: int, k: int, label: str) -> int:
        return label_index(label, self.action_labels(i, k), f"actions{i}[{k}]")

    def type_index(self, i: int, label: str) -> int:
        return label_index(label, self.type_labels(i), f"types{i}")


def transition(game: MultiStageGame, k: int, x: str, a1: str, a2: str) -> str:
    """Successor state label for stage-k state `x` under the action pair."""
    k = game.check_stage(k, terminal=False)
    xi = game.state_index(k, x)
    i1 = game.action_index(1, k, a1)
    i2 = game.action_index(2, k, a2)
    return game.states[k + 1][game.transitions[k][xi, i1, i2]]


def stage_utility(
    game: MultiStageGame, k: int, x: str, a1: str, a2: str, t1: str, t2: str
) -> tuple[float, float]:
    """Stage-k payoff pair (player 1, player 2) for the given joint play."""
    k = game.check_stage(k)
    xi = game.state_index(k, x)
    i1 = game.action_index(1, k, a1)
    i2 = game.action_index(2, k, a2)
    j1 = game.type_index(1, t1)
    j2 = game.type_index(2, t2)
    u = game.utilities[k][xi, i1, i2, j1, j2]
    return float(u[0]), float(u[1])


def validate_game(game: MultiStageGame, atol: float = 1e-9) -> ValidationReport:
    """Check value-level invariants; the report is empty iff all hold."""
    bad: list[Violation] = []
    for k, u in enumerate(game.utilities):
        if not np.all(np.isfinite(u)):
            for idx in np.argwhere(~np.isfinite(u)):
                xi, i1, i2, j1, j2, p = (int(v) for v in idx)
                bad.append(
                    Violation(
                        f"utilities[{k}][{xi}][{i1}][{i2}][{j1}][{j2}][{p}]",
                        "finite-utility",
                        f"value {u[tuple(idx)]!r} is not finite",
                    )
                )
    for k, t in enumerate(game.transitions):
        n_next = game.n_states(k + 1)
        if t.size and (t.min() < 0 or t.max() >= n_next):
            for idx in np.argwhere((t < 0) | (t >= n_next)):
                xi, i1, i2 = (int(v) for v in idx)
                bad.append(
                    Violation(
                        f"transitions[{k}][{xi}][{i1}][{i2}]",
                        "transition-target",
                        f"index {int(t[tuple(idx)])} outside stage-{k + 1} state space",
                    )
                )
    for i in (1, 2):
        prior = game.prior(i)
        for t in range(game.n_types(i)):
            row = prior[t]
            if not np.all(np.isfinite(row)) or np.any(row < -atol):
                bad.append(
                    Violation(
                        f"prior{i}[{t}]", "prior-distribution", "entries must be finite and nonnegative"
                    )
                )
            elif abs(float(row.sum()) - 1.0) > atol:
                bad.append(
                    Violation(
                        f"prior{i}[{t}]",
                        "prior-distribution",
                        f"row sums to {float(row.sum())}, expected 1",
                    )
                )
    return ValidationReport(tuple(bad))


# -- scenario JSON -------------------------------------------------------------


def _expect(obj, key, path, kind, what):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(path, f"missing key {key!r}")
    val = obj[key]
    if not isinstance(val, kind) or isinstance(val, bool):
        raise SchemaError(f"{path}.{key}", f"expected {what}")
    return val


def _expect_list(val, path, length=None):
    if not isinstance(val, list):
        raise SchemaError(path, "expected a JSON array")
    if length is not None and len(val) != length:
        raise SchemaError(path, f"expected {length} entries, got {len(val)}")
    return val


def _number(val, path) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SchemaError(path, "expected a number")
    return float(val)


def parse_game(data) -> MultiStageGame:
    """Build a game from scenario JSON (a dict, or a JSON string).

    Layout::

        {"horizon": K,
         "types":  {"player1": [...], "player2": [...]},
         "priors": {"player1": {ownType: {oppType: prob, ...}, ...},
                    "player2": {...}},
         "stages": [  # K+1 entries
            {"states": [...],
             "actions": {"player1": [...], "player2": [...]},
             "utilities":   [state][a1][a2][t1][t2] -> [u1, u2],
             "transitions": [state][a1][a2] -> next-state label (absent at K)},
            ...]}

    Raises :class:`SchemaError` naming the offending path; the returned game
    always passes :func:`validate_game`.
    """
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("$", "expected a JSON object")
    horizon = _expect(data, "horizon", "$", int, "an integer")
    if horizon < 0:
        raise SchemaError("$.horizon", "must be nonnegative")
    types_obj = _expect(data, "types", "$", dict, "an object")
    type_lists = {}
    for pk in _PLAYER_KEYS:
        labels = _expect(types_obj, pk, "$.types", list, "an array")
        try:
            type_lists[pk] = check_labels(labels, f"$.types.{pk}")
        except ValueError as exc:
            raise SchemaError(f"$.types.{pk}", str(exc)) from None
    stages = _expect_list(_expect(data, "stages", "$", list, "an array"), "$.stages", horizon + 1)

    states, acts1, acts2, utils, trans = [], [], [], [], []
    for k, st in enumerate(stages):
        path = f"$.stages[{k}]"
        if not isinstance(st, dict):
            raise SchemaError(path, "expected an object")
        try:
            states.append(check_labels(_expect(st, "states", path, list, "an array"), f"{path}.states"))
            act_obj = _expect(st, "actions", path, dict, "an object")
            acts1.append(check_labels(_expect(act_obj, "player1", f"{path}.actions", list, "an array"),
                                      f"{path}.actions.player1"))
            acts2.append(check_labels(_expect(act_obj, "player2", f"{path}.actions", list, "an array"),
                                      f"{path}.actions.player2"))
        except ValueError as exc:
            raise SchemaError(path, str(exc)) from None

    m1, m2 = len(type_lists["player1"]), len(type_lists["player2"])
    for k, st in enumerate(stages):
        path = f"$.stages[{k}]"
        nx, na1, na2 = len(states[k]), len(acts1[k]), len(acts2[k])
        u = np.zeros((nx, na1, na2, m1, m2, 2))
        u_spec = _expect_list(_expect(st, "utilities", path, list, "an array"), f"{path}.utilities", nx)
        for xi in range(nx):
            rows1 = _expect_list(u_spec[xi], f"{path}.utilities[{xi}]", na1)
            for i1 in range(na1):
                rows2 = _expect_list(rows1[i1], f"{path}.utilities[{xi}][{i1}]", na2)
                for i2 in range(na2):
                    rows_t1 = _expect_list(rows2[i2], f"{path}.utilities[{xi}][{i1}][{i2}]", m1)
                    for j1 in range(m1):
                        rows_t2 = _expect_list(
                            rows_t1[j1], f"{path}.utilities[{xi}][{i1}][{i2}][{j1}]", m2
                        )
                        for j2 in range(m2):
                            leaf_path = f"{path}.utilities[{xi}][{i1}][{i2}][{j1}][{j2}]"
                            leaf = _expect_list(rows_t2[j2], leaf_path, 2)
                            u[xi, i1, i2, j1, j2, 0] = _number(leaf[0], f"{leaf_path}[0]")
                            u[xi, i1, i2, j1, j2, 1] = _number(leaf[1], f"{leaf_path}[1]")
        utils.append(u)
        if k < horizon:
            t = np.zeros((nx, na1, na2), dtype=np.intp)
            t_spec = _expect_list(
                _expect(st, "transitions", path, list, "an array"), f"{path}.transitions", nx
            )
            for xi in range(nx):
                rows1 = _expect_list(t_spec[xi], f"{path}.transitions[{xi}]", na1)
                for i1 in range(na1):
                    rows2 = _expect_list(rows1[i1], f"{path}.transitions[{xi}][{i1}]", na2)
                    for i2 in range(na2):
                        leaf_path = f"{path}.transitions[{xi}][{i1}][{i2}]"
                        label = rows2[i2]
                        if not isinstance(label, str):
                            raise SchemaError(leaf_path, "expected a next-state label")
                        if label not in states[k + 1]:
                            raise SchemaError(
                                leaf_path, f"unknown stage-{k + 1} state {label!r}"
                            )
                        t[xi, i1, i2] = states[k + 1].index(label)
            trans.append(t)
        elif "transitions" in st:
            raise SchemaError(f"{path}.transitions", "terminal stage must not declare transitions")

    priors_obj = _expect(data, "priors", "$", dict, "an object")
    prior_arrays = []
    for pk, own, opp in ((_PLAYER_KEYS[0], type_lists["player1"], type_lists["player2"]),
                         (_PLAYER_KEYS[1], type_lists["player2"], type_lists["player1"])):
        block = _expect(priors_obj, pk, "$.priors", dict, "an object")
        arr = np.zeros((len(own), len(opp)))
        if set(block) != set(own):
            raise SchemaError(f"$.priors.{pk}", f"keys must be exactly {list(own)}")
        for ti, tl in enumerate(own):
            row = block[tl]
            if not isinstance(row, dict) or set(row) != set(opp):
                raise SchemaError(f"$.priors.{pk}.{tl}", f"keys must be exactly {list(opp)}")
            for oj, ol in enumerate(opp):
                arr[ti, oj] = _number(row[ol], f"$.priors.{pk}.{tl}.{ol}")
        prior_arrays.append(arr)

    game = MultiStageGame(
        horizon=horizon,
        types1=type_lists["player1"],
        types2=type_lists["player2"],
        states=tuple(states),
        actions1=tuple(acts1),
        actions2=tuple(acts2),
        utilities=tuple(utils),
        transitions=tuple(trans),
        prior1=prior_arrays[0],
        prior2=prior_arrays[1],
    )
    report = validate_game(game)
    if not report.ok:
        first = report.violations[0]
        raise SchemaError(f"$.{first.location}", f"{first.rule}: {first.message}")
    return game


def serialize_game(game: MultiStageGame) -> dict:
    """Scenario-JSON dict for `game`; round-trips exactly through parse_game."""
    stages = []
    for k in range(game.horizon + 1):
        st = {
            "states": list(game.states[k]),
            "actions": {"player1": list(game.actions1[k]), "player2": list(game.actions2[k])},
            "utilities": game.utilities[k].tolist(),
        }
        if k < game.horizon:
            st["transitions"] = [
                [[game.states[k + 1][j] for j in row2] for row2 in row1]
                for row1 in game.transitions[k].tolist()
            ]
        stages.append(st)
    return {
        "horizon": game.horizon,
        "types": {"player1": list(game.types1), "player2": list(game.types2)},
        "priors": {
            "player1": {
                tl: dict(zip(game.types2, game.prior1[ti].tolist()))
                for ti, tl in enumerate(game.types1)
            },
            "player2": {
                tl: dict(zip(game.types1, game.prior2[ti].tolist()))
                for ti, tl in enumerate(game.types2)
            },
        },
        "stages": stages,
    }


def games_equal(a: MultiStageGame, b: MultiStageGame) -> bool:
    """Exact structural and numerical equality."""
    if (a.horizon, a.types1, a.types2, a.states, a.actions1, a.actions2) != (
        b.horizon, b.types1, b.types2, b.states, b.actions1, b.actions2
    ):
        return False
    if not all(np.array_equal(x, y) for x, y in zip(a.utilities, b.utilities)):
        return False
    if not all(np.array_equal(x, y) for x, y in zip(a.transitions, b.transitions)):
        return False
    return np.array_equal(a.prior1, b.prior1) and np.array_equal(a.prior2, b.prior2)


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """Behavioral strategies for both players at every stage and state.

    sigma1[k] has shape ``(n_states, n_types1, n_act1)``; each trailing row is
    a distribution over player 1's stage-k actions.  sigma2 likewise.
    """

    game: MultiStageGame
    sigma1: tuple[np.ndarray, ...]
    sigma2: tuple[np.ndarray, ...]

    def __post_init__(self):
        for i, name in ((1, "sigma1"), (2, "sigma2")):
            seq = getattr(self, name)
            if len(seq) != self.game.horizon + 1:
                raise ValueError(f"{name}: expected {self.game.horizon + 1} stage arrays")
            out = []
            for k, arr in enumerate(seq):
                arr = np.array(arr, dtype=float)
                want = (self.game.n_states(k), self.game.n_types(i), self.game.n_actions(i, k))
                if arr.shape != want:
                    raise ValueError(f"{name}[{k}]: shape {arr.shape} != expected {want}")
                check_stochastic_rows(arr, f"{name}[{k}]")
                out.append(_frozen(arr))
            object.__setattr__(self, name, tuple(out))

    @classmethod
    def uniform(cls, game: MultiStageGame) -> "StrategyProfile":
        s1 = [
            np.full((game.n_states(k), game.n_types(1), game.n_actions(1, k)),
                    1.0 / game.n_actions(1, k))
            for k in range(game.horizon + 1)
        ]
        s2 = [
            np.full((game.n_states(k), game.n_types(2), game.n_actions(2, k)),
                    1.0 / game.n_actions(2, k))
            for k in range(game.horizon + 1)
        ]
        return cls(game, tuple(s1), tuple(s2))

    def sigma(self, i: int, k: int) -> np.ndarray:
        return (self.sigma1 if i == 1 else self.sigma2)[k]

    def probability(self, i: int, k: int, x: str, type_label: str, action: str) -> float:
        k = self.game.check_stage(k)
        return float(
            self.sigma(i, k)[
                self.game.state_index(k, x),
                self.game.type_index(i, type_label),
                self.game.action_index(i, k, action),
            ]
        )

    def to_jsonable(self) -> dict:
        out: dict = {}
        for i, key in ((1, "player1"), (2, "player2")):
            stages = []
            for k in range(self.game.horizon + 1):
                sig = self.sigma(i, k)
                stages.append(
                    {
                        x: {
                            tl: dict(zip(self.game.action_labels(i, k), sig[xi, ti].tolist()))
                            for ti, tl in enumerate(self.game.type_labels(i))
                        }
                        for xi, x in enumerate(self.game.states[k])
                    }
                )
            out[key] = stages
        return out

    def to_csv(self, path) -> None:
        """Write rows (player, stage, state, type, action, probability).

        Row order is player, then stage, then state/type/action in declaration
        order, so repeated exports are byte-identical.
        """
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["player", "stage", "state", "type", "action", "probability"])
            for i in (1, 2):
                for k in range(self.game.horizon + 1):
                    sig = self.sigma(i, k)
                    for xi, x in enumerate(self.game.states[k]):
                        for ti, tl in enumerate(self.game.type_labels(i)):
                            for ai, al in enumerate(self.game.action_labels(i, k)):
                                w.writerow([i, k, x, tl, al, repr(float(sig[xi, ti, ai]))])
