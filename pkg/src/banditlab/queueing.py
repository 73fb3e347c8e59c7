"""Discrete-time single-queue, multi-server scheduling with learning.

Each slot: arrivals A(t) ~ Poisson(lambda) join the queue; if any job is
waiting (including fresh arrivals), the scheduler picks a server, which
succeeds with its unknown Bernoulli rate; the queue evolves as
Q(t) = Q(t-1) + A(t) - S(t).  Schedulers learn only from slots with an
actual service attempt.

Paired comparisons against the full-information OPT scheduler share the
arrival stream (common random numbers); service draws use a separate
per-scheduler stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .baselines import RandomPolicy, ThompsonPolicy, _BasePolicy
from .belman import BelManPolicy
from .bandit_env import BanditInstance
from .errors import DomainError
from .expfam import RewardFamily
from .manifold import LogSchedule
from .seeding import STREAM_ARRIVALS, STREAM_SERVICE, rng_from

__all__ = [
    "QueueConfig",
    "QueueTrace",
    "SlotRecord",
    "queue_step",
    "make_scheduler",
    "simulate",
    "queue_regret",
    "SCHEDULER_KINDS",
]


@dataclass(frozen=True)
class QueueConfig:
    """Arrival rate, per-server service rates, horizon, replication count."""

    arrival_rate: float
    service_rates: tuple[float, ...]
    horizon: int
    n_runs: int = 1

    def __post_init__(self):
        if not (self.arrival_rate > 0.0):
            raise DomainError(f"arrival rate must be positive, got {self.arrival_rate!r}")
        if not self.service_rates:
            raise DomainError("need at least one server")
        for mu in self.service_rates:
            if not (0.0 < mu < 1.0):
                raise DomainError(f"service rates must lie in (0,1), got {mu!r}")
        if self.arrival_rate >= max(self.service_rates):
            raise DomainError("unstable queue: arrival rate must be below the best service rate")
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon!r}")
        if self.n_runs < 1:
            raise DomainError(f"n_runs must be >= 1, got {self.n_runs!r}")

    @property
    def n_servers(self) -> int:
        return len(self.service_rates)


@dataclass
class QueueTrace:
    """Per-slot simulation record; server -1 marks an idle slot."""

    queue_len: np.ndarray
    server: np.ndarray
    arrivals: np.ndarray
    served: np.ndarray

    def __len__(self) -> int:
        return len(self.queue_len)


class SlotRecord(NamedTuple):
    queue_len: int
    server: int
    arrivals: int
    served: int


class OptScheduler:
    """Full-information scheduler: always the best-rate server."""

    name = "opt"

    def reset(self, instance: BanditInstance, rng: np.random.Generator) -> None:
        self.best = int(np.argmax(instance.theta))

    def select(self, t: int) -> int:
        return self.best

    def update(self, arm: int, reward: float) -> None:
        pass


class QUCBPolicy(_BasePolicy):
    """UCB index on the service probability; unpulled servers first."""

    name = "q_ucb"

    def __init__(self, c: float = 2.0):
        self.c = c

    def select(self, t: int) -> int:
        with np.errstate(divide="ignore", invalid="ignore"):
            means = self.sums / self.pulls
            idx = means + np.sqrt(self.c * math.log(max(t, 1)) / self.pulls)
        idx[self.pulls == 0] = math.inf
        return self._argmax_random_ties(idx)


class QThSPolicy(ThompsonPolicy):
    """Thompson sampling with forced uniform exploration at rate
    min(1, explore_scale * K * log^2 t / t)."""

    name = "q_ths"

    def __init__(self, explore_scale: float = 3.0):
        self.explore_scale = explore_scale

    def select(self, t: int) -> int:
        log_t = math.log(max(t, 2))
        eps = min(1.0, self.explore_scale * self.n_arms * log_t * log_t / t)
        if self.rng.random() < eps:
            return int(self.rng.integers(self.n_arms))
        return super().select(t)


SCHEDULER_KINDS = ("belman", "thompson", "q_ucb", "q_ths", "opt", "random")


def make_scheduler(kind: str, *, exposure_c: float = 15.0, q_ucb_c: float = 2.0,
                   q_ths_scale: float = 3.0, ri_every: int = 1):
    """Instantiate a scheduler by name."""
    if kind == "belman":
        return BelManPolicy(LogSchedule(exposure_c), ri_every=ri_every)
    if kind == "thompson":
        return ThompsonPolicy()
    if kind == "q_ucb":
        return QUCBPolicy(q_ucb_c)
    if kind == "q_ths":
        return QThSPolicy(q_ths_scale)
    if kind == "opt":
        return OptScheduler()
    if kind == "random":
        return RandomPolicy()
    raise DomainError(f"unknown scheduler kind {kind!r}")


def queue_step(
    q_prev: int,
    scheduler,
    t: int,
    arrival_rate: float,
    service_rates: tuple[float, ...],
    arrival_rng: np.random.Generator,
    service_rng: np.random.Generator,
) -> tuple[int, SlotRecord]:
    """Advance the queue one slot; the scheduler observes only real attempts."""
    a_t = int(arrival_rng.poisson(arrival_rate))
    backlog = q_prev + a_t
    if backlog > 0:
        server = scheduler.select(t)
        s_t = 1 if service_rng.random() < service_rates[server] else 0
        scheduler.update(server, float(s_t))
    else:
        server = -1
        s_t = 0
    q_new = backlog - s_t
    return q_new, SlotRecord(queue_len=q_new, server=server, arrivals=a_t, served=s_t)


def simulate(config: QueueConfig, scheduler_kind: str, seed: int, *,
             arrival_seed: int | None = None, **scheduler_kwargs) -> QueueTrace:
    """Simulate one run of `horizon` slots with the named scheduler.

    ``seed`` drives the scheduler's own randomness and the service
    outcomes; the arrival stream is derived from ``arrival_seed`` when
    given (shared across schedulers for paired regret curves), otherwise
    from ``seed``.
    """
    scheduler = make_scheduler(scheduler_kind, **scheduler_kwargs)
    # The scheduler treats servers as Bernoulli arms with service success
    # as the reward; the instance carries rates plus a dummy horizon.
    instance = BanditInstance(RewardFamily.BERNOULLI, config.service_rates, config.horizon)
    policy_rng = rng_from(seed)
    service_rng = rng_from(seed, STREAM_SERVICE)
    arrival_rng = rng_from(arrival_seed if arrival_seed is not None else seed, STREAM_ARRIVALS)
    scheduler.reset(instance, policy_rng)

    horizon = config.horizon
    queue_len = np.empty(horizon, dtype=np.int64)
    server = np.empty(horizon, dtype=np.int64)
    arrivals = np.empty(horizon, dtype=np.int64)
    served = np.empty(horizon, dtype=np.int64)
    q = 0
    for t in range(1, horizon + 1):
        q, rec = queue_step(q, scheduler, t, config.arrival_rate,
                            config.service_rates, arrival_rng, service_rng)
        queue_len[t - 1] = rec.queue_len
        server[t - 1] = rec.server
        arrivals[t - 1] = rec.arrivals
        served[t - 1] = rec.served
    return QueueTrace(queue_len=queue_len, server=server, arrivals=arrivals, served=served)


def queue_regret(alg_trace: QueueTrace, opt_trace: QueueTrace) -> np.ndarray:
    """Per-slot queue-length gap Q(t) - Q_opt(t) for paired traces."""
    if len(alg_trace) != len(opt_trace):
        raise DomainError("traces must share one horizon")
    return alg_trace.queue_len.astype(np.float64) - opt_trace.queue_len.astype(np.float64)
