import numpy as np

from stagegame._simplex import feasible_point

rng = np.random.default_rng(5)


def check(x, a_eq, b_eq, a_ub, b_ub, tol=1e-7):
    assert x is not None
    assert x.min() >= -tol
    if len(b_eq):
        assert np.abs(np.asarray(a_eq) @ x - b_eq).max() <= tol * max(1.0, np.abs(b_eq).max())
    if len(b_ub):
        assert (np.asarray(a_ub) @ x - b_ub).max() <= tol * max(1.0, np.abs(b_ub).max())


def test_random_feasible_systems_solved():
    for _ in range(200):
        n = int(rng.integers(2, 7))
        m_eq = int(rng.integers(0, 4))
        m_ub = int(rng.integers(0, 4))
        target = rng.uniform(0.0, 3.0, size=n)
        a_eq = rng.normal(size=(m_eq, n))
        b_eq = a_eq @ target
        a_ub = rng.normal(size=(m_ub, n))
        b_ub = a_ub @ target + rng.uniform(0.0, 2.0, size=m_ub)
        x = feasible_point(a_eq, b_eq, a_ub, b_ub)
        check(x, a_eq, b_eq, a_ub, b_ub)


def test_obviously_infeasible_returns_none():
    # x1 + x2 = 2 but each bounded by 0.5
    assert feasible_point([[1.0, 1.0]], [2.0], [[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5]) is None
    # negativity forced on a nonnegative variable
    assert feasible_point([[1.0]], [-1.0], np.zeros((0, 1)), []) is None


def test_degenerate_shapes():
    assert feasible_point(np.zeros((0, 3)), [], np.zeros((0, 3)), []).shape == (3,)
    assert feasible_point(np.zeros((0, 0)), [], np.zeros((0, 0)), []).shape == (0,)
    # distribution row: sum to one
    x = feasible_point([[1.0, 1.0, 1.0]], [1.0], np.zeros((0, 3)), [])
    check(x, [[1.0, 1.0, 1.0]], np.array([1.0]), np.zeros((0, 3)), np.array([]))


def test_large_coefficient_scaling():
    a_eq = [[1e6, 1e6]]
    b_eq = [1e6]
    x = feasible_point(a_eq, b_eq, np.zeros((0, 2)), [])
    check(x, a_eq, np.array(b_eq), np.zeros((0, 2)), np.array([]))


def test_tight_inequalities_boundary():
    # unique solution sits on every constraint at once
    a_eq = [[1.0, 1.0]]
    b_eq = [1.0]
    a_ub = [[1.0, 0.0], [-1.0, 0.0]]
    b_ub = [0.25, -0.25]
    x = feasible_point(a_eq, b_eq, a_ub, b_ub)
    check(x, a_eq, np.array(b_eq), a_ub, np.array(b_ub))
    assert abs(x[0] - 0.25) <= 1e-9
