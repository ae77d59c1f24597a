"""Independent entropy-regularized natural policy gradient dynamics on finite potential games."""

from .dynamics import (
    IterateLog,
    MonotonicityError,
    ParameterError,
    RunConfig,
    default_learning_rate,
    npg_step,
    pg_direct_learning_rate,
    pg_direct_step,
    run,
    tau_for_epsilon_ne,
)
from .game import (
    DEFAULT_DENSE_CAP,
    GameSizeError,
    PotentialGame,
    check_potential_property,
    expected_potential,
    expected_utility,
    load_game,
    make_general_potential,
    make_identical_interest,
    save_game,
)
from .metrics import (
    best_response,
    marginalized_utilities,
    marginalized_utility,
    ne_gap,
    qre_gap,
    regularized_potential,
    regularized_utility,
)
from .policy import (
    JointPolicy,
    SoftmaxParams,
    entropy,
    jeffrey,
    kl,
    project_simplex,
    softmax,
    uniform_policy,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_DENSE_CAP",
    "GameSizeError",
    "IterateLog",
    "JointPolicy",
    "MonotonicityError",
    "ParameterError",
    "PotentialGame",
    "RunConfig",
    "SoftmaxParams",
    "best_response",
    "check_potential_property",
    "default_learning_rate",
    "entropy",
    "expected_potential",
    "expected_utility",
    "jeffrey",
    "kl",
    "load_game",
    "make_general_potential",
    "make_identical_interest",
    "marginalized_utilities",
    "marginalized_utility",
    "ne_gap",
    "npg_step",
    "pg_direct_learning_rate",
    "pg_direct_step",
    "project_simplex",
    "qre_gap",
    "regularized_potential",
    "regularized_utility",
    "run",
    "save_game",
    "softmax",
    "tau_for_epsilon_ne",
    "uniform_policy",
]
