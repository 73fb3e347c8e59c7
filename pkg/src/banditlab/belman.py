"""The BelMan decision loop: alternating I- and reverse-I projections.

Each step picks the arm whose belief-reward joint is closest (in KL) to
the current pseudobelief-focal-reward distribution, observes a reward,
updates that arm's conjugate belief, and re-projects the pseudobelief
onto the updated arms.  The exposure schedule moves the loop along the
pure-exploration / exploration-exploitation continuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special

from .bandit_env import BanditInstance, RunTrace, play
from .errors import DomainError
from .expfam import (
    BeliefState,
    Observation,
    RewardFamily,
    kl_belief,
    posterior_update,
)
from .manifold import (
    BeliefReward,
    ExposureSchedule,
    PseudobeliefFocal,
    exposure,
    focal_mixture_projection,
    i_projection_score,
)
from .seeding import rng_from

__all__ = [
    "BelManState",
    "StepRecord",
    "initial_state",
    "select_arm",
    "apply_observation",
    "step",
    "run",
    "BelManPolicy",
    "default_prior",
]

SCORE_TIE_TOL = 1e-12


class StepRecord(NamedTuple):
    t: int
    arm: int
    reward: float


@dataclass
class BelManState:
    """Everything one BelMan run carries between steps.

    ``t`` counts completed steps; ``pseudo`` is the reverse projection of
    the current arms at the exposure of step ``t`` (or of step 1 before
    any play).  ``ri_every`` > 1 re-projects only every k-th step, a
    documented cost-saving deviation for very long horizons.
    """

    arms: tuple[BeliefReward, ...]
    pseudo: PseudobeliefFocal
    t: int
    schedule: ExposureSchedule
    rng: np.random.Generator
    seed: int | None = None
    ri_every: int = 1


def default_prior(family: RewardFamily) -> BeliefState:
    """Uniform Beta(1,1) prior; Gamma(1,1) for exponential rewards.

    The improper count-only start (0,0) would leave KL undefined, so the
    exponential case uses the proper, weakly informative Gamma(1,1).
    """
    return BeliefState(family, 1.0, 1.0)


def initial_state(
    family: RewardFamily,
    n_arms: int,
    schedule: ExposureSchedule,
    *,
    rng: np.random.Generator | None = None,
    seed: int | None = None,
    priors: Sequence[BeliefState] | None = None,
    ri_every: int = 1,
) -> BelManState:
    """Fresh state: prior beliefs plus their reverse projection at tau(1)."""
    if n_arms < 2:
        raise DomainError(f"BelMan needs at least 2 arms, got {n_arms!r}")
    if ri_every < 1:
        raise DomainError(f"ri_every must be >= 1, got {ri_every!r}")
    if rng is None:
        rng = rng_from(seed if seed is not None else 0)
    if priors is None:
        priors = [default_prior(family)] * n_arms
    elif len(priors) != n_arms:
        raise DomainError("one prior per arm required")
    arms = tuple(BeliefReward(p) for p in priors)
    pseudo = focal_mixture_projection(arms, exposure(schedule, 1))
    return BelManState(arms=arms, pseudo=pseudo, t=0, schedule=schedule,
                       rng=rng, seed=seed, ri_every=ri_every)


def _belief_kl_to_pseudo(state: BelManState) -> np.ndarray:
    """Vector of KL(belief_a || pseudobelief) over the arms."""
    pb = state.pseudo.pseudo_belief
    if len(state.arms) <= 8:
        return np.array([kl_belief(arm.belief, pb) for arm in state.arms])
    alphas = np.array([arm.belief.alpha for arm in state.arms])
    betas = np.array([arm.belief.beta for arm in state.arms])
    if state.pseudo.family is RewardFamily.BERNOULLI:
        ns = alphas + betas
        return (
            special.betaln(pb.alpha, pb.beta)
            - special.betaln(alphas, betas)
            + (alphas - pb.alpha) * special.digamma(alphas)
            + (betas - pb.beta) * special.digamma(betas)
            - (ns - pb.alpha - pb.beta) * special.digamma(ns)
        )
    return (
        (alphas - pb.alpha) * special.digamma(alphas)
        - special.gammaln(alphas)
        + special.gammaln(pb.alpha)
        + pb.alpha * (np.log(betas) - math.log(pb.beta))
        + alphas * (pb.beta - betas) / betas
    )


def _scores(state: BelManState) -> np.ndarray:
    """Per-arm selection scores: -(sampled mean reward)/tau + KL to pseudo.

    With infinite exposure this is exactly the per-arm projection
    objective, evaluated deterministically.  With finite exposure the
    reward term is a posterior draw of the arm's mean reward from the
    state's generator rather than the posterior mean: a plain mean makes
    the loop freeze on whichever arm leads once the exposure weight has
    grown, because a starved arm's fixed score deficit outruns its
    slowly-growing divergence credit.  Posterior draws keep every arm
    reachable; as the exposure weight grows the rule converges to
    Thompson sampling, with the divergence term supplying extra early
    exploration pressure toward arms the pseudobelief knows least about.
    """
    kl = _belief_kl_to_pseudo(state)
    tau = state.pseudo.tau
    if math.isinf(tau):
        return kl
    alphas = np.array([arm.belief.alpha for arm in state.arms])
    betas = np.array([arm.belief.beta for arm in state.arms])
    if state.pseudo.family is RewardFamily.BERNOULLI:
        sampled_mean = state.rng.beta(alphas, betas)
    else:
        sampled_mean = 1.0 / state.rng.gamma(alphas, 1.0 / betas)
    return kl - sampled_mean / tau


def select_arm(state: BelManState) -> int:
    """Argmin of the per-arm selection scores; random uniform tie-break.

    Scores within SCORE_TIE_TOL of the minimum count as tied, and both
    the tie-break and the reward-term posterior draws use the state's
    own generator, so selection is deterministic given the seed.
    """
    scores = _scores(state)
    best = scores.min()
    ties = np.flatnonzero(scores <= best + SCORE_TIE_TOL)
    if len(ties) == 1:
        return int(ties[0])
    return int(ties[state.rng.integers(len(ties))])


def score_arm(state: BelManState, arm: int) -> float:
    """Scalar score of one arm (same quantity as the vectorized path)."""
    return i_projection_score(state.arms[arm], state.pseudo)


def apply_observation(state: BelManState, arm: int, reward: float) -> BelManState:
    """Absorb one observation: belief update, then reverse projection.

    Only the played arm's belief changes.  The new pseudobelief carries
    the exposure of the step just completed and warm-starts from the
    previous one.
    """
    belief = posterior_update(state.arms[arm].belief, Observation(reward, arm))
    arms = state.arms[:arm] + (BeliefReward(belief),) + state.arms[arm + 1:]
    t_new = state.t + 1
    if t_new % state.ri_every == 0:
        tau = exposure(state.schedule, t_new)
        pseudo = focal_mixture_projection(arms, tau, init=state.pseudo.pseudo_belief)
    else:
        pseudo = state.pseudo
    return replace(state, arms=arms, pseudo=pseudo, t=t_new)


def step(state: BelManState, env_reward_callback: Callable[[int], float]):
    """One full BelMan iteration; returns the new state and its record."""
    arm = select_arm(state)
    reward = float(env_reward_callback(arm))
    new_state = apply_observation(state, arm, reward)
    return new_state, StepRecord(t=new_state.t, arm=arm, reward=reward)


class BelManPolicy:
    """Harness-facing adapter around the BelMan state machine."""

    def __init__(self, schedule: ExposureSchedule, ri_every: int = 1):
        self.schedule = schedule
        self.ri_every = ri_every
        self._state: BelManState | None = None

    def reset(self, instance: BanditInstance, rng: np.random.Generator) -> None:
        self._state = initial_state(
            instance.family, instance.n_arms, self.schedule,
            rng=rng, ri_every=self.ri_every,
        )

    @property
    def state(self) -> BelManState:
        if self._state is None:
            raise RuntimeError("policy not reset")
        return self._state

    def select(self, t: int) -> int:
        return select_arm(self.state)

    def update(self, arm: int, reward: float) -> None:
        self._state = apply_observation(self.state, arm, reward)


def run(
    instance: BanditInstance,
    schedule: ExposureSchedule,
    *,
    algo_seed: int = 0,
    env_seed: int = 0,
    ri_every: int = 1,
) -> RunTrace:
    """Play BelMan against a bandit instance for its full horizon."""
    policy = BelManPolicy(schedule, ri_every=ri_every)
    return play(policy, instance, rng_from(algo_seed), rng_from(env_seed))
