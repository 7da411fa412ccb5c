"""Deterministic territory-game simulator with tabular learners.

Public surface: the base game (`game`), the sovereign vote variant
(`sovereign`), learning agents (`agents`), the experiment harness
(`experiment`), matrix-game analysis (`matrix`), and the CLI (`cli`).
"""

from .game import (
    Action,
    GameState,
    IllegalActionError,
    RewardConfig,
    count_states,
    encode_state,
    initial_state,
    legal_actions,
    move_dest,
    reward,
    transition,
)
from .sovereign import (
    VotePhase,
    sovereign_legal_actions,
    sovereign_transition,
    sovereign_reward,
    vote_count,
)
from .agents import (
    AgentKind,
    AgentMode,
    Hyperparams,
    QTable,
    dump_qtable,
    epsilon_at,
    load_qtable,
    ola_broadcast,
    ola_state,
    q_update,
    select_action,
)
from .experiment import (
    MetricsBin,
    RunConfig,
    TrialSummary,
    Variant,
    action_breakdown,
    bin_metrics,
    run_game,
    run_trials,
)
from .matrix import (
    AnalysisConfig,
    DilemmaClass,
    PayoffMatrix,
    PolicyClass,
    Thresholds,
    classify_policy,
    fear_greed,
    long_term_payoff,
    payoff_matrix,
    social_metric,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AgentKind",
    "AgentMode",
    "AnalysisConfig",
    "DilemmaClass",
    "GameState",
    "Hyperparams",
    "IllegalActionError",
    "MetricsBin",
    "PayoffMatrix",
    "PolicyClass",
    "QTable",
    "RewardConfig",
    "RunConfig",
    "Thresholds",
    "TrialSummary",
    "Variant",
    "VotePhase",
    "action_breakdown",
    "bin_metrics",
    "classify_policy",
    "count_states",
    "dump_qtable",
    "encode_state",
    "epsilon_at",
    "fear_greed",
    "sovereign_legal_actions",
    "sovereign_transition",
    "initial_state",
    "legal_actions",
    "load_qtable",
    "long_term_payoff",
    "move_dest",
    "ola_broadcast",
    "ola_state",
    "payoff_matrix",
    "q_update",
    "reward",
    "run_game",
    "run_trials",
    "select_action",
    "social_metric",
    "sovereign_reward",
    "transition",
    "vote_count",
]
