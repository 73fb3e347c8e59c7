"""banditlab: BelMan alternating-projection bandits, baselines, and harness."""

from .bandit_env import BanditInstance, RunTrace, cumulative_regret, sample_reward, suboptimal_draws
from .belman import BelManState, initial_state, run, select_arm, step
from .errors import (
    BanditLabError,
    ConvergenceError,
    DivergentNormalizerError,
    DomainError,
    FamilyMismatchError,
    NoSolutionError,
    UndefinedMeanError,
    ValidationError,
)
from .expfam import (
    BeliefState,
    ExpectationParams,
    Observation,
    RewardFamily,
    expectation_params,
    kl_belief,
    mean_reward,
    natural_from_expectation,
    posterior_update,
)
from .harness import ExperimentConfig, emit_csv, percentile_75, run_experiment
from .manifold import (
    BeliefReward,
    ExposureSchedule,
    InfiniteExposure,
    LogSchedule,
    PseudobeliefFocal,
    TwoPhase,
    exposure,
    i_projection_score,
    log_focal_normalizer,
    pseudobelief_barycentre,
    ri_projection,
)
from .queueing import QueueConfig, QueueTrace, queue_regret, simulate

__version__ = "0.1.0"
