"""Two-player multi-stage Bayesian games: solvers, beliefs, and experiments."""

from .beliefs import (
    BeliefDiagnostic,
    BeliefTable,
    History,
    MarkovUpdate,
    forward_beliefs,
    history_update,
    markov_update,
    transition_likelihood,
)
from .dynamics import (
    BestResponseResult,
    DynamicEquilibrium,
    ValueTable,
    backward_pass,
    best_response_value,
    cumulative_values,
    evaluate_cumulative_utility,
    reach_distributions,
    realized_utility,
)
from .experiments import (
    RolloutResult,
    SweepSpec,
    TableResult,
    compare_information_structures,
    default_grid,
    posterior_vs_prior,
    rollout,
    state_distribution,
    sweep_sensitivity,
    sweep_static_belief,
)
from .game import (
    MultiStageGame,
    SchemaError,
    StrategyProfile,
    ValidationReport,
    Violation,
    games_equal,
    parse_game,
    serialize_game,
    stage_utility,
    transition,
    validate_game,
)
from .pbne import (
    EquilibriumReport,
    IterationRecord,
    PbneConfig,
    check_belief_consistency,
    check_sequential_rationality,
    solve_pbne,
)
from .solvers import DbneSolver, PbneSolver, SbneSolver
from .staticeq import (
    SolverConfig,
    StageGameView,
    StaticEquilibrium,
    certificate_residual,
    interim_payoffs,
    solve_sbne,
    verify_sbne,
)
from .te import (
    TEParams,
    TEProcessEconomics,
    build_te_game,
    default_params,
    te_per_hour_utility,
    validate_te_params,
)

__version__ = "0.1.0"

__all__ = [
    "BeliefDiagnostic",
    "BeliefTable",
    "BestResponseResult",
    "DbneSolver",
    "DynamicEquilibrium",
    "EquilibriumReport",
    "History",
    "IterationRecord",
    "MarkovUpdate",
    "MultiStageGame",
    "PbneConfig",
    "PbneSolver",
    "RolloutResult",
    "SbneSolver",
    "SchemaError",
    "SolverConfig",
    "StageGameView",
    "StaticEquilibrium",
    "StrategyProfile",
    "SweepSpec",
    "TEParams",
    "TEProcessEconomics",
    "TableResult",
    "ValidationReport",
    "ValueTable",
    "Violation",
    "backward_pass",
    "best_response_value",
    "build_te_game",
    "certificate_residual",
    "check_belief_consistency",
    "check_sequential_rationality",
    "compare_information_structures",
    "cumulative_values",
    "default_grid",
    "default_params",
    "evaluate_cumulative_utility",
    "forward_beliefs",
    "games_equal",
    "history_update",
    "interim_payoffs",
    "markov_update",
    "parse_game",
    "posterior_vs_prior",
    "reach_distributions",
    "realized_utility",
    "rollout",
    "serialize_game",
    "solve_pbne",
    "solve_sbne",
    "stage_utility",
    "state_distribution",
    "sweep_sensitivity",
    "sweep_static_belief",
    "te_per_hour_utility",
    "transition",
    "transition_likelihood",
    "validate_game",
    "validate_te_params",
    "verify_sbne",
]
