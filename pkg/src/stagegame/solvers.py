"""Estimator-style entry points wrapping the functional solvers.

The wrappers follow the fit/attributes convention: constructor arguments are
plain hyperparameters (so `get_params`/`set_params`/`clone` work), `fit`
runs the solve, and results land in trailing-underscore attributes.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .beliefs import BeliefTable
from .dynamics import backward_pass
from .game import MultiStageGame
from .pbne import PbneConfig, solve_pbne
from .staticeq import SolverConfig, StageGameView, solve_sbne, verify_sbne

__all__ = ["SbneSolver", "DbneSolver", "PbneSolver"]


def _require_fitted(est, attr: str):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")
    return getattr(est, attr)


class SbneSolver(BaseEstimator):
    """Solve one stage view for a static Bayesian equilibrium."""

    def __init__(
        self,
        alpha1=None,
        alpha2=None,
        feasibility_tol: float = 1e-9,
        selection: str = "lex-min-support",
        enumerate_all: bool = False,
    ):
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.feasibility_tol = feasibility_tol
        self.selection = selection
        self.enumerate_all = enumerate_all

    def _config(self) -> SolverConfig:
        return SolverConfig(
            alpha1=self.alpha1,
            alpha2=self.alpha2,
            feasibility_tol=self.feasibility_tol,
            selection=self.selection,
            enumerate_all=self.enumerate_all,
        )

    def fit(self, X: StageGameView, y=None):
        result = solve_sbne(X, self._config())
        if self.enumerate_all:
            self.equilibria_ = list(result)
            if not self.equilibria_:
                raise RuntimeError("enumeration accepted no equilibrium")
            self.equilibrium_ = self.equilibria_[0]
        else:
            self.equilibrium_ = result
            self.equilibria_ = [result]
        eq = self.equilibrium_
        self.sigma1_ = eq.sigma1
        self.sigma2_ = eq.sigma2
        self.values1_ = eq.values1
        self.values2_ = eq.values2
        self.residual_ = eq.residual
        self.support1_ = eq.support1
        self.support2_ = eq.support2
        return self

    def score(self, X: StageGameView, y=None) -> float:
        """Negative deviation gain of the fitted strategies on `X`."""
        eq = _require_fitted(self, "equilibrium_")
        return -verify_sbne(X, eq.sigma1, eq.sigma2)


class DbneSolver(BaseEstimator):
    """Backward induction over a whole game under a fixed belief table."""

    def __init__(
        self,
        alpha1=None,
        alpha2=None,
        feasibility_tol: float = 1e-9,
        selection: str = "lex-min-support",
    ):
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.feasibility_tol = feasibility_tol
        self.selection = selection

    def fit(self, X: MultiStageGame, y: BeliefTable):
        config = SolverConfig(
            alpha1=self.alpha1,
            alpha2=self.alpha2,
            feasibility_tol=self.feasibility_tol,
            selection=self.selection,
        )
        result = backward_pass(X, y, config)
        self.equilibrium_ = result
        self.strategies_ = result.profile
        self.values_ = result.values
        self.residuals_ = result.residuals
        self.max_residual_ = result.max_residual
        return self

    def score(self, X=None, y=None) -> float:
        return -_require_fitted(self, "max_residual_")


class PbneSolver(BaseEstimator):
    """Full solve: iterate backward induction and forward belief filtering."""

    def __init__(
        self,
        x0: str | None = None,
        iter_num: int = 100,
        epsilon: float = 1e-6,
        belief_tol: float = 1e-8,
        init="uniform",
        damping_patience: int = 5,
        damping_weight: float = 0.5,
        feasibility_tol: float = 1e-9,
    ):
        self.x0 = x0
        self.iter_num = iter_num
        self.epsilon = epsilon
        self.belief_tol = belief_tol
        self.init = init
        self.damping_patience = damping_patience
        self.damping_weight = damping_weight
        self.feasibility_tol = feasibility_tol

    def _config(self) -> PbneConfig:
        return PbneConfig(
            iter_num=self.iter_num,
            epsilon=self.epsilon,
            belief_tol=self.belief_tol,
            init=self.init,
            damping_patience=self.damping_patience,
            damping_weight=self.damping_weight,
            solver=SolverConfig(feasibility_tol=self.feasibility_tol),
        )

    def fit(self, X: MultiStageGame, y=None):
        if self.x0 is None:
            raise ValueError("set x0 to a stage-0 state label before fitting")
        report = solve_pbne(X, self.x0, self._config())
        self.report_ = report
        self.strategies_ = report.strategies
        self.beliefs_ = report.beliefs
        self.values_ = report.values
        self.epsilon_ = report.epsilon
        self.discrepancy_ = report.discrepancy
        self.converged_ = report.converged
        self.n_iter_ = len(report.trace)
        self.best_iteration_ = report.best_iteration
        return self

    def score(self, X=None, y=None) -> float:
        return -_require_fitted(self, "epsilon_")
