"""One-stage Bayesian equilibria by support enumeration.

A stage view is a two-player game in which each player's payoff depends on
both private types, and each type holds a belief over the opponent's types.
An equilibrium assigns every type a mixed action such that each type best
responds in the interim sense.  Candidate supports are enumerated smallest
first; for a declared support pair, one feasibility LP finds an opponent
mixture making player 1's declared supports optimal and a second, independent
LP does the same with roles swapped.  Any pair of feasible points is an
equilibrium, which is re-verified directly before being returned.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from ._simplex import feasible_point
from .game import MultiStageGame
from .validation import check_stochastic_rows

__all__ = [
    "StageGameView",
    "SolverConfig",
    "StaticEquilibrium",
    "solve_sbne",
    "verify_sbne",
    "certificate_residual",
    "interim_payoffs",
]

_SELECTION_RULES = ("lex-min-support",)
_PRUNE_EPS = 1e-10


def _auto_labels(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{j}" for j in range(n))


@dataclass(frozen=True, eq=False)
class StageGameView:
    """One-stage game data for both players.

    payoffs1/payoffs2 have shape ``(n_act1, n_act2, n_types1, n_types2)``.
    belief1[t1] is player 1's distribution over player 2's types; belief2
    swaps the roles.  Labels are carried for exports only.
    """

    payoffs1: np.ndarray
    payoffs2: np.ndarray
    belief1: np.ndarray
    belief2: np.ndarray
    actions1: tuple[str, ...] = ()
    actions2: tuple[str, ...] = ()
    types1: tuple[str, ...] = ()
    types2: tuple[str, ...] = ()

    def __post_init__(self):
        p1 = np.array(self.payoffs1, dtype=float)
        p2 = np.array(self.payoffs2, dtype=float)
        if p1.ndim != 4 or p1.shape != p2.shape:
            raise ValueError("payoff tensors must share shape (na1, na2, m1, m2)")
        if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
            raise ValueError("payoffs must be finite")
        na1, na2, m1, m2 = p1.shape
        b1 = check_stochastic_rows(np.array(self.belief1, dtype=float), "belief1")
        b2 = check_stochastic_rows(np.array(self.belief2, dtype=float), "belief2")
        if b1.shape != (m1, m2) or b2.shape != (m2, m1):
            raise ValueError("belief matrices do not match the type counts")
        for arr in (p1, p2, b1, b2):
            arr.setflags(write=False)
        object.__setattr__(self, "payoffs1", p1)
        object.__setattr__(self, "payoffs2", p2)
        object.__setattr__(self, "belief1", b1)
        object.__setattr__(self, "belief2", b2)
        object.__setattr__(self, "actions1", tuple(self.actions1) or _auto_labels("a", na1))
        object.__setattr__(self, "actions2", tuple(self.actions2) or _auto_labels("b", na2))
        object.__setattr__(self, "types1", tuple(self.types1) or _auto_labels("t", m1))
        object.__setattr__(self, "types2", tuple(self.types2) or _auto_labels("u", m2))
        if (
            len(self.actions1) != na1
            or len(self.actions2) != na2
            or len(self.types1) != m1
            or len(self.types2) != m2
        ):
            raise ValueError("label lists do not match the payoff tensor shape")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.payoffs1.shape

    @classmethod
    def from_stage(
        cls,
        game: MultiStageGame,
        k: int,
        x: str,
        beliefs,
        continuation: tuple[np.ndarray, np.ndarray] | None = None,
    ) -> "StageGameView":
        """View of stage k at state `x` under the given belief table.

        `continuation` holds per-player value arrays over the stage-(k+1)
        states, shape ``(n_states_{k+1}, n_types_i)``; stage utilities are
        augmented with the value of the successor state.  Omit it for the
        terminal stage.
        """
        k = game.check_stage(k)
        xi = game.state_index(k, x)
        u = game.utilities[k][xi]
        eff1 = u[..., 0].copy()
        eff2 = u[..., 1].copy()
        if continuation is not None:
            if k >= game.horizon:
                raise ValueError("terminal stage takes no continuation values")
            v1, v2 = continuation
            v1 = np.asarray(v1, dtype=float)
            v2 = np.asarray(v2, dtype=float)
            nxt = game.transitions[k][xi]
            eff1 += v1[nxt][:, :, :, None]
            eff2 += v2[nxt][:, :, None, :]
        elif k < game.horizon:
            raise ValueError("non-terminal stage needs continuation values")
        b1 = beliefs.table(1, k)[xi] if hasattr(beliefs, "table") else beliefs[0]
        b2 = beliefs.table(2, k)[xi] if hasattr(beliefs, "table") else beliefs[1]
        return cls(
            payoffs1=eff1,
            payoffs2=eff2,
            belief1=b1,
            belief2=b2,
            actions1=game.actions1[k],
            actions2=game.actions2[k],
            types1=game.types1,
            types2=game.types2,
        )


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the support-enumeration solver.

    alpha1/alpha2 weight the per-type terms of the certificate residual and
    default to all-ones; they never change which profiles count as equilibria.
    """

    alpha1: tuple[float, ...] | None = None
    alpha2: tuple[float, ...] | None = None
    feasibility_tol: float = 1e-9
    selection: str = "lex-min-support"
    enumerate_all: bool = False

    def __post_init__(self):
        if self.selection not in _SELECTION_RULES:
            raise ValueError(f"unknown selection rule {self.selection!r}")
        if not (self.feasibility_tol > 0):
            raise ValueError("feasibility_tol must be positive")
        for name in ("alpha1", "alpha2"):
            val = getattr(self, name)
            if val is not None:
                val = tuple(float(v) for v in val)
                if any(v <= 0 for v in val):
                    raise ValueError(f"{name} weights must be strictly positive")
                object.__setattr__(self, name, val)

    def weights(self, m1: int, m2: int) -> tuple[np.ndarray, np.ndarray]:
        a1 = np.ones(m1) if self.alpha1 is None else np.asarray(self.alpha1, dtype=float)
        a2 = np.ones(m2) if self.alpha2 is None else np.asarray(self.alpha2, dtype=float)
        if a1.shape != (m1,) or a2.shape != (m2,):
            raise ValueError("alpha weight lengths do not match the type counts")
        return a1, a2


@dataclass(frozen=True, eq=False)
class StaticEquilibrium:
    """Equilibrium of a stage view.

    sigma1 has shape ``(n_types1, n_act1)``; values1[t] is type t's interim
    expected payoff.  support1/support2 list the per-type action indices in
    use; residual is the weighted certificate residual (zero at equilibrium
    up to floating point).
    """

    view: StageGameView
    sigma1: np.ndarray
    sigma2: np.ndarray
    values1: np.ndarray
    values2: np.ndarray
    support1: tuple[tuple[int, ...], ...]
    support2: tuple[tuple[int, ...], ...]
    residual: float

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "values1", "values2"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_csv(self, path) -> None:
        """Rows (player, type, action, probability); then per-type `__value__`
        summary rows and one `__residual__` row in the action column."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["player", "type", "action", "probability"])
            for i, labels, acts, sig in (
                (1, self.view.types1, self.view.actions1, self.sigma1),
                (2, self.view.types2, self.view.actions2, self.sigma2),
            ):
                for ti, tl in enumerate(labels):
                    for ai, al in enumerate(acts):
                        w.writerow([i, tl, al, repr(float(sig[ti, ai]))])
            for i, labels, vals in (
                (1, self.view.types1, self.values1),
                (2, self.view.types2, self.values2),
            ):
                for ti, tl in enumerate(labels):
                    w.writerow([i, tl, "__value__", repr(float(vals[ti]))])
            w.writerow(["", "", "__residual__", repr(float(self.residual))])


def interim_payoffs(view: StageGameView, i: int, sigma_opp: np.ndarray) -> np.ndarray:
    """Matrix (n_types_i, n_act_i): expected payoff of each pure action.

    Expectation over the opponent's types under player i's belief and over the
    opponent's mixture `sigma_opp` (shape ``(n_types_j, n_act_j)``).
    """
    if i == 1:
        # sum_t2 b1[t1,t2] * sum_a2 sigma2[t2,a2] * J1[a1,a2,t1,t2]
        return np.einsum("ij,jb,abij->ia", view.belief1, sigma_opp, view.payoffs1)
    return np.einsum("ji,ia,abij->jb", view.belief2, sigma_opp, view.payoffs2)


def verify_sbne(view: StageGameView, sigma1, sigma2) -> float:
    """Largest pure-deviation gain over both players and all types (>= 0)."""
    sigma1 = check_stochastic_rows(np.asarray(sigma1, dtype=float), "sigma1")
    sigma2 = check_stochastic_rows(np.asarray(sigma2, dtype=float), "sigma2")
    gain = 0.0
    p1 = interim_payoffs(view, 1, sigma2)
    v1 = (p1 * sigma1).sum(axis=1)
    gain = max(gain, float((p1.max(axis=1) - v1).max()))
    p2 = interim_payoffs(view, 2, sigma1)
    v2 = (p2 * sigma2).sum(axis=1)
    gain = max(gain, float((p2.max(axis=1) - v2).max()))
    return max(gain, 0.0)


def certificate_residual(
    view: StageGameView, sigma1, sigma2, alpha1=None, alpha2=None
) -> float:
    """Weighted sum of per-type best-response gaps; zero exactly at equilibria.

    Each type contributes alpha_i(t) * (best pure payoff - achieved payoff),
    so the residual is nonnegative and strictly positive off equilibrium.
    """
    sigma1 = np.asarray(sigma1, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    m1, m2 = view.payoffs1.shape[2], view.payoffs1.shape[3]
    a1 = np.ones(m1) if alpha1 is None else np.asarray(alpha1, dtype=float)
    a2 = np.ones(m2) if alpha2 is None else np.asarray(alpha2, dtype=float)
    if np.any(a1 <= 0) or np.any(a2 <= 0):
        raise ValueError("alpha weights must be strictly positive")
    p1 = interim_payoffs(view, 1, sigma2)
    v1 = (p1 * sigma1).sum(axis=1)
    p2 = interim_payoffs(view, 2, sigma1)
    v2 = (p2 * sigma2).sum(axis=1)
    terms1 = np.maximum(p1.max(axis=1) - v1, 0.0)
    terms2 = np.maximum(p2.max(axis=1) - v2, 0.0)
    return float(a1 @ terms1 + a2 @ terms2)


def _support_assignments(n_actions: int, n_types: int):
    """Per-type nonempty supports, ordered by (total size, lexicographic)."""
    subsets = []
    for size in range(1, n_actions + 1):
        subsets.extend(itertools.combinations(range(n_actions), size))
    per_type = list(itertools.product(subsets, repeat=n_types))
    per_type.sort(key=lambda assign: (sum(len(s) for s in assign), assign))
    return per_type


def _coefficients(view: StageGameView) -> tuple[np.ndarray, np.ndarray]:
    c1 = np.einsum("ij,abij->iajb", view.belief1, view.payoffs1)
    c2 = np.einsum("ji,abij->jbia", view.belief2, view.payoffs2)
    return c1, c2


def _solve_side(c_own, s_own, s_opp, n_act_opp, tol):
    """Opponent mixture making `s_own` interim-optimal, or None.

    c_own[t, a, u, b] is the payoff coefficient of opponent cell (u, b) in own
    type t's interim payoff for pure action a.  The opponent mixture is
    restricted to the cells named by `s_opp`; own optimality is expressed with
    anchor-difference equalities inside `s_own` and inequalities outside.
    """
    m_own, n_own = c_own.shape[0], c_own.shape[1]
    m_opp = c_own.shape[2]
    cells = [(u, b) for u in range(m_opp) for b in s_opp[u]]
    nz = len(cells)
    col_of = {cell: idx for idx, cell in enumerate(cells)}

    eq_rows, eq_rhs = [], []
    ub_rows, ub_rhs = [], []
    for u in range(m_opp):
        row = np.zeros(nz)
        for b in s_opp[u]:
            row[col_of[(u, b)]] = 1.0
        eq_rows.append(row)
        eq_rhs.append(1.0)
    for t in range(m_own):
        anchor = s_own[t][0]
        base = c_own[t, anchor]
        for a in range(n_own):
            if a == anchor:
                continue
            diff = c_own[t, a] - base
            row = np.array([diff[cell] for cell in cells])
            if a in s_own[t]:
                eq_rows.append(row)
                eq_rhs.append(0.0)
            else:
                ub_rows.append(row)
                ub_rhs.append(0.0)

    a_eq = np.vstack(eq_rows) if eq_rows else np.zeros((0, nz))
    b_eq = np.array(eq_rhs)
    a_ub = np.vstack(ub_rows) if ub_rows else np.zeros((0, nz))
    b_ub = np.array(ub_rhs)

    if nz == m_opp:
        # singleton supports: the mixture is forced, check constraints directly
        z = np.ones(nz)
    else:
        z = feasible_point(a_eq, b_eq, a_ub, b_ub, tol=tol)
        if z is None:
            return None
    scale = max(1.0, float(np.abs(c_own).max()))
    slack = 100.0 * tol * scale
    if a_eq.size and np.any(np.abs(a_eq @ z - b_eq) > slack):
        return None
    if a_ub.size and np.any(a_ub @ z - b_ub > slack):
        return None

    sigma = np.zeros((m_opp, n_act_opp))
    for idx, (u, b) in enumerate(cells):
        sigma[u, b] = z[idx]
    sigma[sigma < _PRUNE_EPS] = 0.0
    sums = sigma.sum(axis=1, keepdims=True)
    if np.any(sums <= 0):
        return None
    return sigma / sums


def _effective_support(sigma: np.ndarray) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(a) for a in np.flatnonzero(row > 0)) for row in sigma)


def solve_sbne(view: StageGameView, config: SolverConfig | None = None):
    """One equilibrium of the stage view, or every equilibrium found.

    With ``config.enumerate_all`` the full support grid is scanned and the
    result is a deduplicated list in enumeration order; otherwise the first
    feasible support pair (smallest total size, lexicographic) is returned.
    Existence is guaranteed for finite games, so an empty scan signals a
    numerical failure and raises RuntimeError.
    """
    config = config or SolverConfig()
    na1, na2, m1, m2 = view.shape
    alpha1, alpha2 = config.weights(m1, m2)
    c1, c2 = _coefficients(view)
    tol = config.feasibility_tol
    scale = max(
        1.0, float(np.abs(view.payoffs1).max()), float(np.abs(view.payoffs2).max())
    )
    accept_tol = tol + 1e-12 * scale

    side1 = _support_assignments(na1, m1)
    side2 = _support_assignments(na2, m2)
    pairs = [
        (sum(len(s) for s in s1) + sum(len(s) for s in s2), i1, i2)
        for i1, s1 in enumerate(side1)
        for i2, s2 in enumerate(side2)
    ]
    pairs.sort()

    found: list[StaticEquilibrium] = []
    seen: set[bytes] = set()
    for _, i1, i2 in pairs:
        s1_supp, s2_supp = side1[i1], side2[i2]
        sigma2 = _solve_side(c1, s1_supp, s2_supp, na2, tol)
        if sigma2 is None:
            continue
        sigma1 = _solve_side(c2, s2_supp, s1_supp, na1, tol)
        if sigma1 is None:
            continue
        gain = verify_sbne(view, sigma1, sigma2)
        if gain > accept_tol:
            continue
        p1 = interim_payoffs(view, 1, sigma2)
        p2 = interim_payoffs(view, 2, sigma1)
        eq = StaticEquilibrium(
            view=view,
            sigma1=sigma1,
            sigma2=sigma2,
            values1=(p1 * sigma1).sum(axis=1),
            values2=(p2 * sigma2).sum(axis=1),
            support1=_effective_support(sigma1),
            support2=_effective_support(sigma2),
            residual=certificate_residual(view, sigma1, sigma2, alpha1, alpha2),
        )
        if not config.enumerate_all:
            return eq
        key = np.round(np.concatenate([sigma1.ravel(), sigma2.ravel()]), 10).tobytes()
        if key not in seen:
            seen.add(key)
            found.append(eq)
    if config.enumerate_all:
        return found
    raise RuntimeError("support enumeration found no equilibrium within tolerance")
