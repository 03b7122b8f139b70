"""Dense two-phase simplex for small feasibility problems.

Only phase 1 is needed: the solver asks whether a support assignment admits a
mixed strategy, so the LP has no objective beyond feasibility.  Bland's rule
keeps the pivoting finite; rows are scaled to unit max-abs coefficient before
pivoting so the tolerance is meaningful across payoff magnitudes.
"""

from __future__ import annotations

import numpy as np

__all__ = ["feasible_point"]

_PIVOT_EPS = 1e-11


def feasible_point(a_eq, b_eq, a_ub, b_ub, tol: float = 1e-9, max_iter: int = 2000):
    """A point x >= 0 with a_eq @ x = b_eq and a_ub @ x <= b_ub, or None.

    The returned point is clipped at zero and re-checked against the original
    (unscaled) constraints with tolerance scaled by the data magnitude.
    """
    a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
    a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
    b_eq = np.atleast_1d(np.asarray(b_eq, dtype=float))
    b_ub = np.atleast_1d(np.asarray(b_ub, dtype=float))
    if a_eq.size == 0:
        a_eq = a_eq.reshape(0, a_eq.shape[1] if a_eq.ndim == 2 else 0)
    if a_ub.size == 0:
        a_ub = a_ub.reshape(0, a_ub.shape[1] if a_ub.ndim == 2 else 0)
    n = max(a_eq.shape[1], a_ub.shape[1])
    if a_eq.shape[0] == 0:
        a_eq = a_eq.reshape(0, n)
    if a_ub.shape[0] == 0:
        a_ub = a_ub.reshape(0, n)
    m_eq, m_ub = a_eq.shape[0], a_ub.shape[0]
    m = m_eq + m_ub
    if n == 0:
        ok = np.all(np.abs(b_eq) <= tol) and np.all(b_ub >= -tol)
        return np.zeros(0) if ok else None
    if m == 0:
        return np.zeros(n)

    rows = np.zeros((m, n + m_ub))
    rows[:m_eq, :n] = a_eq
    rows[m_eq:, :n] = a_ub
    rows[m_eq:, n:] = np.eye(m_ub)
    rhs = np.concatenate([b_eq, b_ub])

    scale = np.maximum(np.abs(rows).max(axis=1), 1e-300)
    scale = np.maximum(scale, 1.0)
    rows = rows / scale[:, None]
    rhs = rhs / scale
    flip = rhs < 0
    rows[flip] *= -1.0
    rhs[flip] *= -1.0

    n_struct = n + m_ub
    tab = np.zeros((m + 1, n_struct + m + 1))
    tab[:m, :n_struct] = rows
    tab[:m, n_struct:-1] = np.eye(m)
    tab[:m, -1] = rhs
    # reduced-cost row for minimizing the artificial sum; corner holds -objective
    tab[m, :n_struct] = -rows.sum(axis=0)
    tab[m, -1] = -rhs.sum()
    basis = list(range(n_struct, n_struct + m))

    for _ in range(max_iter):
        reduced = tab[m, :n_struct]  # artificials never re-enter
        candidates = np.flatnonzero(reduced < -1e-10)
        if candidates.size == 0:
            break
        col = int(candidates[0])  # Bland: smallest eligible index
        pivot_col = tab[:m, col]
        eligible = np.flatnonzero(pivot_col > _PIVOT_EPS)
        if eligible.size == 0:
            # unbounded phase-1 direction cannot happen with artificials; bail out
            return None
        ratios = tab[eligible, -1] / pivot_col[eligible]
        best = ratios.min()
        tie = eligible[np.flatnonzero(ratios <= best + 1e-12)]
        row = int(min(tie, key=lambda r: basis[r]))
        piv = tab[row, col]
        tab[row] /= piv
        factors = tab[:, col].copy()
        factors[row] = 0.0
        tab -= np.outer(factors, tab[row])
        basis[row] = col
    else:
        return None

    if -tab[m, -1] > tol * max(1, m):
        return None
    x = np.zeros(n_struct + m)
    for r, bv in enumerate(basis):
        x[bv] = tab[r, -1]
    point = np.clip(x[:n], 0.0, None)

    big = max(
        1.0,
        float(np.abs(a_eq).max()) if a_eq.size else 0.0,
        float(np.abs(a_ub).max()) if a_ub.size else 0.0,
        float(np.abs(b_eq).max()) if b_eq.size else 0.0,
        float(np.abs(b_ub).max()) if b_ub.size else 0.0,
    )
    slack_tol = 100.0 * tol * big
    if m_eq and np.any(np.abs(a_eq @ point - b_eq) > slack_tol):
        return None
    if m_ub and np.any(a_ub @ point - b_ub > slack_tol):
        return None
    return point
