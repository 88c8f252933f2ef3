"""Black-box latent-distribution search.

Two deterministic-policy agents, one steering the mean and one the spread
of a diagonal Gaussian over latent space, are trained with centralized
critics to make codes sampled from that distribution classify as a chosen
target label of a query-only oracle. The package also ships the synthetic
prototype oracle used as a testbed, an evaluation suite, a newline-JSON
wire protocol for out-of-process oracles, and a command-line driver.
"""

from .distributions import (
    AlphaSchedule,
    LatentDistribution,
    SigmaBounds,
    alpha_at,
    blend,
    blend_sigma,
    init_distribution,
    sample_codes,
)
from .errors import (
    ConfigError,
    InputError,
    NumericalError,
    OracleMismatchError,
    OracleUnavailableError,
    ProtocolError,
)
from .evaluation import (
    ConfidenceHistogram,
    EvalSummary,
    confidence_histogram,
    distributional_accuracy,
    evaluate_distribution,
    knn_feature_distance,
    psnr,
    topk_accuracy,
)
from .nn import AdamState, Mlp, finite_difference_grads, gradient_check, optimizer_step
from .oracles import (
    LinearSoftmaxOracle,
    OracleHandle,
    PrototypeOracle,
    PrototypeOracleSpec,
    connect_external,
    make_testbed_oracle,
    testbed_prototypes,
)
from .rewards import (
    RewardBreakdown,
    RewardWeights,
    confidence_reward,
    penalty,
    transition_rewards,
)
from .training import (
    AgentNets,
    AttackReport,
    ReplayBuffer,
    TrainerConfig,
    Transition,
    extract_distribution,
    observe,
    run_attack,
    sample_batch,
    select_action,
    soft_update,
)

__all__ = [
    "AdamState",
    "AgentNets",
    "AlphaSchedule",
    "AttackReport",
    "ConfidenceHistogram",
    "ConfigError",
    "EvalSummary",
    "InputError",
    "LatentDistribution",
    "LinearSoftmaxOracle",
    "Mlp",
    "NumericalError",
    "OracleHandle",
    "OracleMismatchError",
    "OracleUnavailableError",
    "PrototypeOracle",
    "PrototypeOracleSpec",
    "ProtocolError",
    "ReplayBuffer",
    "RewardBreakdown",
    "RewardWeights",
    "SigmaBounds",
    "TrainerConfig",
    "Transition",
    "alpha_at",
    "blend",
    "blend_sigma",
    "confidence_histogram",
    "confidence_reward",
    "connect_external",
    "distributional_accuracy",
    "evaluate_distribution",
    "extract_distribution",
    "finite_difference_grads",
    "gradient_check",
    "init_distribution",
    "knn_feature_distance",
    "make_testbed_oracle",
    "observe",
    "optimizer_step",
    "penalty",
    "psnr",
    "run_attack",
    "sample_batch",
    "sample_codes",
    "select_action",
    "soft_update",
    "testbed_prototypes",
    "topk_accuracy",
    "transition_rewards",
]

__version__ = "0.1.0"
