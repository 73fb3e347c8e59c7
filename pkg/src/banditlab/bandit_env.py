"""Stochastic bandit environments, run traces, and regret accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .expfam import RewardFamily

__all__ = [
    "BanditInstance",
    "RunTrace",
    "sample_reward",
    "cumulative_regret",
    "suboptimal_draws",
    "play",
]

# How exponential rewards are confined to [0, 1], if at all.
BOUNDED_MODES = (None, "resample", "truncate")


def _bounded_resample_mean(rate: float) -> float:
    # E[X | X <= 1] for X ~ Exp(rate).
    return (1.0 - math.exp(-rate) * (1.0 + rate)) / (rate * (1.0 - math.exp(-rate)))


def _bounded_truncate_mean(rate: float) -> float:
    # E[min(X, 1)] = integral of the survival function over [0, 1].
    return (1.0 - math.exp(-rate)) / rate


@dataclass(frozen=True)
class BanditInstance:
    """A fixed set of arms: true parameters, horizon, reward family.

    ``theta`` holds Bernoulli success probabilities or exponential rates.
    ``bounded`` selects the [0, 1]-confinement mode for exponential
    rewards: ``"resample"`` redraws until the reward is <= 1,
    ``"truncate"`` clips at 1.
    """

    family: RewardFamily
    theta: tuple[float, ...]
    horizon: int
    bounded: str | None = None

    def __post_init__(self):
        if len(self.theta) < 2:
            raise DomainError("a bandit instance needs at least 2 arms")
        if self.horizon < 0:
            raise DomainError(f"horizon must be >= 0, got {self.horizon!r}")
        if self.bounded not in BOUNDED_MODES:
            raise DomainError(f"unknown bounded mode {self.bounded!r}")
        if self.bounded is not None and self.family is not RewardFamily.EXPONENTIAL:
            raise DomainError("bounded modes apply to exponential rewards only")
        for th in self.theta:
            if self.family is RewardFamily.BERNOULLI:
                if not (0.0 < th < 1.0):
                    raise DomainError(f"Bernoulli means must lie in (0,1), got {th!r}")
            elif not (th > 0.0 and math.isfinite(th)):
                raise DomainError(f"exponential rates must be positive, got {th!r}")

    @property
    def n_arms(self) -> int:
        return len(self.theta)

    @property
    def true_means(self) -> tuple[float, ...]:
        """Expected reward per arm under the sampling mode in force."""
        if self.family is RewardFamily.BERNOULLI:
            return self.theta
        if self.bounded == "resample":
            return tuple(_bounded_resample_mean(r) for r in self.theta)
        if self.bounded == "truncate":
            return tuple(_bounded_truncate_mean(r) for r in self.theta)
        return tuple(1.0 / r for r in self.theta)

    @property
    def optimal_mean(self) -> float:
        return max(self.true_means)


def sample_reward(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    """Draw one reward for ``arm`` from the instance's true distribution."""
    if not 0 <= arm < instance.n_arms:
        raise DomainError(f"arm index {arm!r} out of range")
    th = instance.theta[arm]
    if instance.family is RewardFamily.BERNOULLI:
        return 1.0 if rng.random() < th else 0.0
    x = rng.exponential(1.0 / th)
    if instance.bounded == "resample":
        while x > 1.0:
            x = rng.exponential(1.0 / th)
    elif instance.bounded == "truncate":
        x = min(x, 1.0)
    return x


@dataclass
class RunTrace:
    """Per-step record of one bandit run: chosen arms and observed rewards."""

    arms: np.ndarray
    rewards: np.ndarray

    def __post_init__(self):
        if len(self.arms) != len(self.rewards):
            raise DomainError("arms and rewards must have equal length")

    def __len__(self) -> int:
        return len(self.arms)


def cumulative_regret(trace: RunTrace, instance: BanditInstance) -> np.ndarray:
    """Expected (pseudo-)regret series R_t = sum of true-mean gaps.

    Uses the instance's true means rather than realized rewards, so the
    series is non-decreasing and noise-free.
    """
    means = np.asarray(instance.true_means)
    gaps = instance.optimal_mean - means
    return np.cumsum(gaps[trace.arms])


def suboptimal_draws(trace: RunTrace, instance: BanditInstance) -> np.ndarray:
    """Count of pulls of arms with true mean below the best (ties optimal)."""
    means = np.asarray(instance.true_means)
    suboptimal = means < instance.optimal_mean
    return np.cumsum(suboptimal[trace.arms]).astype(np.int64)


def play(policy, instance: BanditInstance, policy_rng: np.random.Generator,
         env_rng: np.random.Generator) -> RunTrace:
    """Run a policy for the instance's horizon and collect the trace.

    The policy object must expose ``reset(instance, rng)``,
    ``select(t) -> arm`` and ``update(arm, reward)``.  Environment
    randomness is drawn only from ``env_rng`` so reward streams can be
    shared across algorithms.
    """
    horizon = instance.horizon
    arms = np.empty(horizon, dtype=np.int64)
    rewards = np.empty(horizon, dtype=np.float64)
    policy.reset(instance, policy_rng)
    for t in range(1, horizon + 1):
        arm = policy.select(t)
        reward = sample_reward(instance, arm, env_rng)
        policy.update(arm, reward)
        arms[t - 1] = arm
        rewards[t - 1] = reward
    return RunTrace(arms=arms, rewards=rewards)
