"""Reference bandit algorithms: UCB family, Thompson sampling, Bayes-UCB.

Scalar index computations are exposed as module functions (the tested
contracts); the policy classes keep vectorized per-arm statistics for the
experiment harness and defer to the same formulas.

Conventions not fixed by the benchmarked setups and therefore chosen
here (all constants are arguments):

* KL-UCB exploration function f(t) = log t + 3 log log t, clamped to
  log t for t < 3.
* Bayes-UCB quantile level 1 - 1/t.
* UCB-tuned variance bonus min(1/4, V + sqrt(2 log t / pulls)) inside
  the confidence radius.
* Thompson sampling and Bayes-UCB play any still-unpulled arm first
  (uniformly at random), which guarantees every arm is tried once within
  the first K steps, like the infinite-index convention does for the
  frequentist baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .bandit_env import BanditInstance
from .errors import DomainError
from .expfam import (
    BeliefState,
    Observation,
    RewardFamily,
    posterior_quantile,
    posterior_update,
)

__all__ = [
    "ArmStats",
    "ucb_index",
    "ucb_tuned_index",
    "bernoulli_kl",
    "exponential_kl",
    "klucb_exploration",
    "klucb_index",
    "klucb_exp_index",
    "thompson_select",
    "posterior_quantile",
    "bayes_ucb_select",
    "random_select",
    "RandomPolicy",
    "UCBPolicy",
    "UCBTunedPolicy",
    "KLUCBPolicy",
    "KLUCBExpPolicy",
    "ThompsonPolicy",
    "BayesUCBPolicy",
]


@dataclass
class ArmStats:
    """Running statistics for one arm."""

    pulls: int = 0
    reward_sum: float = 0.0
    reward_sq_sum: float = 0.0
    posterior: BeliefState | None = None

    @property
    def mean(self) -> float:
        if self.pulls == 0:
            raise DomainError("mean undefined before the first pull")
        return self.reward_sum / self.pulls

    def record(self, reward: float) -> None:
        self.pulls += 1
        self.reward_sum += reward
        self.reward_sq_sum += reward * reward
        if self.posterior is not None:
            self.posterior = posterior_update(self.posterior, Observation(reward))


# ---------------------------------------------------------------------------
# Index formulas
# ---------------------------------------------------------------------------


def ucb_index(stats: ArmStats, t: int) -> float:
    """mean + sqrt(2 log t / pulls); unpulled arms get +inf."""
    if stats.pulls == 0:
        return math.inf
    return stats.mean + math.sqrt(2.0 * math.log(t) / stats.pulls)


def ucb_tuned_index(stats: ArmStats, t: int) -> float:
    """UCB with the empirical-variance bonus capped at 1/4."""
    if stats.pulls == 0:
        return math.inf
    mean = stats.mean
    var = max(stats.reward_sq_sum / stats.pulls - mean * mean, 0.0)
    log_ratio = math.log(t) / stats.pulls
    bonus = min(0.25, var + math.sqrt(2.0 * log_ratio))
    return mean + math.sqrt(log_ratio * bonus)


def bernoulli_kl(p: float, q: float) -> float:
    """d(p, q) for Bernoulli means, with the 0 log 0 = 0 convention."""
    eps = 1e-15
    q = min(max(q, eps), 1.0 - eps)
    val = 0.0
    if p > 0.0:
        val += p * math.log(p / q)
    if p < 1.0:
        val += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return val


def exponential_kl(u: float, v: float) -> float:
    """KL between exponential distributions with means u and v."""
    return u / v - 1.0 + math.log(v / u)


def klucb_exploration(t: int) -> float:
    """f(t) = log t + 3 log log t, clamped to log t below t = 3."""
    if t < 3:
        return math.log(max(t, 1))
    return math.log(t) + 3.0 * math.log(math.log(t))


def klucb_index(stats: ArmStats, t: int, exploration: float | None = None) -> float:
    """Bernoulli KL-UCB index: max{q >= mean : pulls * d(mean, q) <= f(t)}.

    Solved by bisection on [mean, 1) to 1e-8.
    """
    if stats.pulls == 0:
        return math.inf
    f_t = klucb_exploration(t) if exploration is None else exploration
    p_hat = min(max(stats.mean, 0.0), 1.0)
    lo, hi = p_hat, 1.0
    budget = f_t / stats.pulls
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if bernoulli_kl(p_hat, mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def klucb_exp_index(stats: ArmStats, t: int, exploration: float | None = None) -> float:
    """Exponential-family KL-UCB index over the reward mean."""
    if stats.pulls == 0:
        return math.inf
    f_t = klucb_exploration(t) if exploration is None else exploration
    m_hat = stats.mean
    if m_hat <= 0.0:
        m_hat = 1e-12
    budget = f_t / stats.pulls
    lo, hi = m_hat, 2.0 * m_hat
    for _ in range(80):
        if exponential_kl(m_hat, hi) > budget:
            break
        hi *= 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if exponential_kl(m_hat, mid) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def thompson_select(stats: list[ArmStats], rng: np.random.Generator,
                    family: RewardFamily = RewardFamily.BERNOULLI) -> int:
    """Sample each posterior; play the arm with the best sampled mean.

    For exponential rewards the sampled parameter is a rate, so the best
    arm is the argmin of the sampled rates.
    """
    draws = np.empty(len(stats))
    for i, s in enumerate(stats):
        post = s.posterior
        if post is None:
            raise DomainError("thompson_select requires posteriors")
        if family is RewardFamily.BERNOULLI:
            draws[i] = rng.beta(post.alpha, post.beta)
        else:
            draws[i] = rng.gamma(post.alpha, 1.0 / post.beta)
    if family is RewardFamily.BERNOULLI:
        return int(np.argmax(draws))
    return int(np.argmin(draws))


def bayes_ucb_select(stats: list[ArmStats], t: int) -> int:
    """Argmax of posterior quantiles at level 1 - 1/t (ties: lowest index)."""
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t!r}")
    level = 1.0 - 1.0 / t
    best, best_q = 0, -math.inf
    for i, s in enumerate(stats):
        if s.posterior is None:
            raise DomainError("bayes_ucb_select requires posteriors")
        q = posterior_quantile(s.posterior, level)
        if q > best_q:
            best, best_q = i, q
    return best


def random_select(n_arms: int, rng: np.random.Generator) -> int:
    if n_arms < 1:
        raise DomainError("need at least one arm")
    return int(rng.integers(n_arms))


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


class _BasePolicy:
    """Shared per-arm bookkeeping for the harness-facing policies."""

    needs_posterior = False

    def reset(self, instance: BanditInstance, rng: np.random.Generator) -> None:
        self.rng = rng
        self.family = instance.family
        k = instance.n_arms
        self.pulls = np.zeros(k, dtype=np.int64)
        self.sums = np.zeros(k)
        self.sq_sums = np.zeros(k)
        if self.needs_posterior:
            self.alphas = np.ones(k)
            self.betas = np.ones(k)

    @property
    def n_arms(self) -> int:
        return len(self.pulls)

    def update(self, arm: int, reward: float) -> None:
        self.pulls[arm] += 1
        self.sums[arm] += reward
        self.sq_sums[arm] += reward * reward
        if self.needs_posterior:
            if self.family is RewardFamily.BERNOULLI:
                if reward == 1.0:
                    self.alphas[arm] += 1.0
                else:
                    self.betas[arm] += 1.0
            else:
                self.alphas[arm] += 1.0
                self.betas[arm] += reward

    def _argmax_random_ties(self, indices: np.ndarray) -> int:
        best = indices.max()
        ties = np.flatnonzero(indices >= best - 1e-12)
        if len(ties) == 1:
            return int(ties[0])
        return int(ties[self.rng.integers(len(ties))])

    def _unpulled(self) -> np.ndarray:
        return np.flatnonzero(self.pulls == 0)


class RandomPolicy(_BasePolicy):
    name = "random"

    def select(self, t: int) -> int:
        return random_select(self.n_arms, self.rng)


class UCBPolicy(_BasePolicy):
    name = "ucb"

    def select(self, t: int) -> int:
        with np.errstate(divide="ignore", invalid="ignore"):
            means = self.sums / self.pulls
            idx = means + np.sqrt(2.0 * math.log(max(t, 1)) / self.pulls)
        idx[self.pulls == 0] = math.inf
        return self._argmax_random_ties(idx)


class UCBTunedPolicy(_BasePolicy):
    name = "ucb_tuned"

    def select(self, t: int) -> int:
        with np.errstate(divide="ignore", invalid="ignore"):
            means = self.sums / self.pulls
            var = np.maximum(self.sq_sums / self.pulls - means * means, 0.0)
            log_ratio = math.log(max(t, 1)) / self.pulls
            bonus = np.minimum(0.25, var + np.sqrt(2.0 * log_ratio))
            idx = means + np.sqrt(log_ratio * bonus)
        idx[self.pulls == 0] = math.inf
        return self._argmax_random_ties(idx)


class KLUCBPolicy(_BasePolicy):
    """Bernoulli KL-UCB; requires rewards in [0, 1]."""

    name = "klucb"

    def select(self, t: int) -> int:
        pulled = self.pulls > 0
        idx = np.full(self.n_arms, math.inf)
        if pulled.any():
            p_hat = np.clip(self.sums[pulled] / self.pulls[pulled], 0.0, 1.0)
            budget = klucb_exploration(t) / self.pulls[pulled]
            lo = p_hat.copy()
            hi = np.ones_like(p_hat)
            eps = 1e-15
            for _ in range(48):
                mid = 0.5 * (lo + hi)
                q = np.clip(mid, eps, 1.0 - eps)
                d = np.zeros_like(p_hat)
                pos = p_hat > 0.0
                d[pos] += p_hat[pos] * np.log(p_hat[pos] / q[pos])
                lt1 = p_hat < 1.0
                d[lt1] += (1.0 - p_hat[lt1]) * np.log((1.0 - p_hat[lt1]) / (1.0 - q[lt1]))
                ok = d <= budget
                lo = np.where(ok, mid, lo)
                hi = np.where(ok, hi, mid)
            idx[pulled] = lo
        return self._argmax_random_ties(idx)


class KLUCBExpPolicy(_BasePolicy):
    """KL-UCB variant with the exponential-distribution divergence."""

    name = "klucb_exp"

    def select(self, t: int) -> int:
        idx = np.empty(self.n_arms)
        stats = ArmStats()
        for a in range(self.n_arms):
            stats.pulls = int(self.pulls[a])
            stats.reward_sum = float(self.sums[a])
            idx[a] = klucb_exp_index(stats, t)
        return self._argmax_random_ties(idx)


class ThompsonPolicy(_BasePolicy):
    name = "thompson"
    needs_posterior = True

    def select(self, t: int) -> int:
        unpulled = self._unpulled()
        if len(unpulled) > 0:
            return int(unpulled[self.rng.integers(len(unpulled))])
        if self.family is RewardFamily.BERNOULLI:
            draws = self.rng.beta(self.alphas, self.betas)
            return int(np.argmax(draws))
        draws = self.rng.gamma(self.alphas, 1.0 / self.betas)
        return int(np.argmin(draws))


class BayesUCBPolicy(_BasePolicy):
    name = "bayes_ucb"
    needs_posterior = True

    def select(self, t: int) -> int:
        unpulled = self._unpulled()
        if len(unpulled) > 0:
            return int(unpulled[self.rng.integers(len(unpulled))])
        level = 1.0 - 1.0 / max(t, 1)
        if self.family is RewardFamily.BERNOULLI:
            idx = special.betaincinv(self.alphas, self.betas, level)
        else:
            theta_q = special.gammaincinv(self.alphas, 1.0 - level) / self.betas
            with np.errstate(divide="ignore"):
                idx = 1.0 / theta_q
        return self._argmax_random_ties(np.asarray(idx, dtype=float))
