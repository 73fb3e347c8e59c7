"""Experiment orchestration: configs, seeded replication, aggregation, CSV.

Seeding layout (see :mod:`banditlab.seeding` for the exact mixing
function): run ``r`` of algorithm ``a`` draws its policy randomness from
``mix_seed(base_seed, STREAM_ALGORITHM, ALGORITHM_IDS[a], r)`` while the
reward stream is ``mix_seed(base_seed, STREAM_ENV, r)`` — shared across
algorithms, so comparisons use common random numbers.  Queueing runs
share the arrival stream the same way and give each scheduler its own
service stream.

Output layout: ``runs.csv`` has one row per (algorithm, run, step) with
columns run_id, algorithm, t, arm, reward, cum_regret, subopt_draws and,
in queueing mode, queue_len and queue_regret.  ``agg.csv`` has one row
per (algorithm, metric, t) with the across-run mean and 75th percentile
(nearest-rank).  Floats are rendered with %.10g; reruns are
byte-identical.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bandit_env import (
    BOUNDED_MODES,
    BanditInstance,
    RunTrace,
    cumulative_regret,
    play,
    suboptimal_draws,
)
from .baselines import (
    BayesUCBPolicy,
    KLUCBExpPolicy,
    KLUCBPolicy,
    RandomPolicy,
    ThompsonPolicy,
    UCBPolicy,
    UCBTunedPolicy,
)
from .belman import BelManPolicy
from .errors import ValidationError
from .expfam import RewardFamily
from .manifold import InfiniteExposure, LogSchedule, TwoPhase
from .presets import PRESETS
from .queueing import QueueConfig, QueueTrace, queue_regret, simulate
from .seeding import STREAM_ALGORITHM, STREAM_ARRIVALS, STREAM_ENV, mix_seed, rng_from

__all__ = [
    "ALGORITHM_IDS",
    "ExperimentConfig",
    "AggregateSeries",
    "ExperimentResult",
    "percentile_75",
    "run_experiment",
    "emit_csv",
]

MODES = ("explore", "exploit", "two_phase", "queueing")

# Stable identifiers feeding the seed mix; never renumber.
ALGORITHM_IDS = {
    "_opt_ref": 0,
    "belman": 1,
    "belman_explore": 2,
    "belman_exploit": 3,
    "belman_two_phase": 4,
    "ucb": 5,
    "ucb_tuned": 6,
    "klucb": 7,
    "klucb_exp": 8,
    "thompson": 9,
    "bayes_ucb": 10,
    "random": 11,
    "opt": 12,
    "q_ucb": 13,
    "q_ths": 14,
}

BANDIT_ALGORITHMS = (
    "belman", "belman_explore", "belman_exploit", "belman_two_phase",
    "ucb", "ucb_tuned", "klucb", "klucb_exp", "thompson", "bayes_ucb", "random",
)
QUEUEING_ALGORITHMS = ("belman", "thompson", "q_ucb", "q_ths", "opt", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (one mode, one instance)."""

    mode: str
    algorithms: tuple[str, ...]
    horizon: int
    n_runs: int
    base_seed: int
    name: str = "experiment"
    family: str | None = None
    theta: tuple[float, ...] = ()
    bounded: str | None = None
    arrival_rate: float | None = None
    service_rates: tuple[float, ...] = ()
    exposure_c: float = 15.0
    t_exp: int = 0
    ri_every: int = 1
    out_dir: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        """Build a config, collecting every violation before failing."""
        problems: list[str] = []
        if raw.get("schema_version") != 1:
            problems.append("schema_version must be 1")
        mode = raw.get("mode")
        if mode not in MODES:
            problems.append(f"mode must be one of {MODES}, got {mode!r}")
        algorithms = tuple(raw.get("algorithms") or ())
        if not algorithms:
            problems.append("algorithms must be a non-empty list")
        horizon = raw.get("horizon", 0)
        if not isinstance(horizon, int) or horizon < 1:
            problems.append("horizon must be an integer >= 1")
        n_runs = raw.get("n_runs", 0)
        if not isinstance(n_runs, int) or n_runs < 1:
            problems.append("n_runs must be an integer >= 1")
        base_seed = raw.get("base_seed", 0)
        if not isinstance(base_seed, int) or base_seed < 0:
            problems.append("base_seed must be a non-negative integer")
        exposure_c = raw.get("exposure_c", 15.0)
        if not exposure_c > 0:
            problems.append("exposure_c must be positive")
        t_exp = raw.get("t_exp", 0)
        if not isinstance(t_exp, int) or t_exp < 0:
            problems.append("t_exp must be an integer >= 0")
        ri_every = raw.get("ri_every", 1)
        if not isinstance(ri_every, int) or ri_every < 1:
            problems.append("ri_every must be an integer >= 1")
        family = raw.get("family")
        theta = tuple(raw.get("theta") or ())
        bounded = raw.get("bounded")

        if mode == "queueing":
            allowed = QUEUEING_ALGORITHMS
            arrival_rate = raw.get("arrival_rate")
            service_rates = tuple(raw.get("service_rates") or ())
            if arrival_rate is None or not arrival_rate > 0:
                problems.append("arrival_rate must be positive")
            if not service_rates:
                problems.append("service_rates must be non-empty")
            elif not all(0.0 < mu < 1.0 for mu in service_rates):
                problems.append("service_rates must lie in (0, 1)")
            elif arrival_rate is not None and arrival_rate >= max(service_rates):
                problems.append("unstable queue: arrival_rate must be below max service rate")
        else:
            allowed = BANDIT_ALGORITHMS
            arrival_rate = None
            service_rates = ()
            if family not in ("bernoulli", "exponential"):
                problems.append("family must be 'bernoulli' or 'exponential'")
            if len(theta) < 2:
                problems.append("theta must list at least 2 arms")
            elif family == "bernoulli" and not all(0.0 < x < 1.0 for x in theta):
                problems.append("Bernoulli means must lie in (0, 1)")
            elif family == "exponential" and not all(x > 0.0 for x in theta):
                problems.append("exponential rates must be positive")
            if bounded not in BOUNDED_MODES:
                problems.append(f"bounded must be one of {BOUNDED_MODES}")
            elif bounded is not None and family != "exponential":
                problems.append("bounded modes apply to exponential rewards only")
            if family == "exponential" and bounded is None and "klucb" in algorithms:
                problems.append("klucb (Bernoulli divergence) needs rewards in [0,1]")
            if mode == "two_phase" and raw.get("t_exp") is None:
                problems.append("two_phase mode requires t_exp")

        for alg in algorithms:
            if alg not in allowed:
                problems.append(f"algorithm {alg!r} not available in mode {mode!r}")
        if len(set(algorithms)) != len(algorithms):
            problems.append("algorithms must be unique")

        if problems:
            raise ValidationError(problems)
        return cls(
            mode=mode,
            algorithms=algorithms,
            horizon=horizon,
            n_runs=n_runs,
            base_seed=base_seed,
            name=str(raw.get("name", "experiment")),
            family=family if mode != "queueing" else None,
            theta=theta,
            bounded=bounded if mode != "queueing" else None,
            arrival_rate=arrival_rate,
            service_rates=service_rates,
            exposure_c=float(exposure_c),
            t_exp=t_exp,
            ri_every=ri_every,
            out_dir=raw.get("out_dir"),
        )

    def instance(self) -> BanditInstance:
        fam = RewardFamily.BERNOULLI if self.family == "bernoulli" else RewardFamily.EXPONENTIAL
        return BanditInstance(fam, self.theta, self.horizon, bounded=self.bounded)

    def queue_config(self) -> QueueConfig:
        return QueueConfig(self.arrival_rate, self.service_rates, self.horizon, self.n_runs)

    def replaced(self, **overrides) -> "ExperimentConfig":
        from dataclasses import replace

        return replace(self, **overrides)


@dataclass
class AggregateSeries:
    """Across-run mean and 75th percentile of one metric, per step."""

    mean: np.ndarray
    p75: np.ndarray


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: dict = field(default_factory=dict)   # (alg, run) -> RunTrace | QueueTrace
    metrics: dict = field(default_factory=dict)  # (alg, run) -> {metric: ndarray}
    aggregates: dict = field(default_factory=dict)  # (alg, metric) -> AggregateSeries

    @property
    def metric_names(self) -> tuple[str, ...]:
        if self.config.mode == "queueing":
            return ("cum_regret", "subopt_draws", "queue_len", "queue_regret")
        return ("cum_regret", "subopt_draws")


def percentile_75(values) -> float:
    """Nearest-rank 75th percentile: sorted value at index ceil(0.75 n)."""
    vals = sorted(values)
    if not vals:
        raise ValidationError(["percentile of empty input"])
    rank = math.ceil(0.75 * len(vals))
    return vals[rank - 1]


def _belman_schedule(name: str, config: ExperimentConfig):
    variant = name
    if name == "belman":
        variant = {
            "explore": "belman_explore",
            "exploit": "belman_exploit",
            "two_phase": "belman_two_phase",
        }[config.mode]
    if variant == "belman_explore":
        return InfiniteExposure()
    if variant == "belman_exploit":
        return LogSchedule(config.exposure_c)
    return TwoPhase(config.t_exp, LogSchedule(config.exposure_c))


def make_bandit_policy(name: str, config: ExperimentConfig):
    if name.startswith("belman"):
        return BelManPolicy(_belman_schedule(name, config), ri_every=config.ri_every)
    return {
        "ucb": UCBPolicy,
        "ucb_tuned": UCBTunedPolicy,
        "klucb": KLUCBPolicy,
        "klucb_exp": KLUCBExpPolicy,
        "thompson": ThompsonPolicy,
        "bayes_ucb": BayesUCBPolicy,
        "random": RandomPolicy,
    }[name]()


def _bandit_run(config: ExperimentConfig, alg: str, run_idx: int) -> RunTrace:
    instance = config.instance()
    policy = make_bandit_policy(alg, config)
    policy_rng = rng_from(config.base_seed, STREAM_ALGORITHM, ALGORITHM_IDS[alg], run_idx)
    env_rng = rng_from(config.base_seed, STREAM_ENV, run_idx)
    return play(policy, instance, policy_rng, env_rng)


def _queue_run(config: ExperimentConfig, alg: str, run_idx: int) -> QueueTrace:
    seed = mix_seed(config.base_seed, STREAM_ALGORITHM, ALGORITHM_IDS[alg], run_idx)
    arrival_seed = mix_seed(config.base_seed, STREAM_ARRIVALS, run_idx)
    return simulate(
        config.queue_config(), "opt" if alg == "_opt_ref" else alg, seed,
        arrival_seed=arrival_seed, exposure_c=config.exposure_c, ri_every=config.ri_every,
    )


def _run_task(args):
    config, alg, run_idx = args
    if config.mode == "queueing":
        return alg, run_idx, _queue_run(config, alg, run_idx)
    return alg, run_idx, _bandit_run(config, alg, run_idx)


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("BANDIT_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError([f"BANDIT_WORKERS must be an integer, got {env!r}"])
    return 1


def run_experiment(config: ExperimentConfig, *, workers: int | None = None) -> ExperimentResult:
    """Run every (algorithm, replication) pair and aggregate the metrics.

    Execution may be parallel; aggregation is a deterministic reduce over
    sorted (algorithm, run) keys, so the worker count never changes the
    output.
    """
    n_workers = _resolve_workers(workers)
    tasks = []
    if config.mode == "queueing":
        for r in range(config.n_runs):
            tasks.append((config, "_opt_ref", r))
    for alg in config.algorithms:
        for r in range(config.n_runs):
            tasks.append((config, alg, r))

    raw: dict = {}
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for alg, r, trace in pool.map(_run_task, tasks, chunksize=1):
                raw[(alg, r)] = trace
    else:
        for task in tasks:
            alg, r, trace = _run_task(task)
            raw[(alg, r)] = trace

    result = ExperimentResult(config=config)
    if config.mode == "queueing":
        qc = config.queue_config()
        rates = np.asarray(qc.service_rates)
        best = rates.max()
        gaps = best - rates
        for alg in config.algorithms:
            for r in range(config.n_runs):
                trace = raw[(alg, r)]
                ref = raw[("_opt_ref", r)]
                chosen = trace.server
                step_gap = np.where(chosen >= 0, gaps[np.clip(chosen, 0, None)], 0.0)
                step_subopt = (chosen >= 0) & (rates[np.clip(chosen, 0, None)] < best)
                result.traces[(alg, r)] = trace
                result.metrics[(alg, r)] = {
                    "cum_regret": np.cumsum(step_gap),
                    "subopt_draws": np.cumsum(step_subopt).astype(np.int64),
                    "queue_len": trace.queue_len.astype(np.float64),
                    "queue_regret": queue_regret(trace, ref),
                }
    else:
        instance = config.instance()
        for alg in config.algorithms:
            for r in range(config.n_runs):
                trace = raw[(alg, r)]
                result.traces[(alg, r)] = trace
                result.metrics[(alg, r)] = {
                    "cum_regret": cumulative_regret(trace, instance),
                    "subopt_draws": suboptimal_draws(trace, instance).astype(np.float64),
                }

    for alg in config.algorithms:
        stacked = {
            m: np.vstack([result.metrics[(alg, r)][m] for r in range(config.n_runs)])
            for m in result.metric_names
        }
        for m, mat in stacked.items():
            mean = mat.mean(axis=0)
            # Nearest-rank p75 column-wise: row ceil(0.75 n) of the sorted runs.
            rank = math.ceil(0.75 * config.n_runs) - 1
            p75 = np.sort(mat, axis=0)[rank]
            result.aggregates[(alg, m)] = AggregateSeries(mean=mean, p75=p75)
    return result


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def emit_csv(result: ExperimentResult, out_dir) -> tuple[Path, Path]:
    """Write runs.csv and agg.csv; returns their paths.

    Row order is fixed (config algorithm order, then run id, then t) and
    floats use %.10g, so identical results serialize identically.
    """
    if not result.traces:
        raise ValidationError(["nothing to emit: no traces in result"])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = result.config
    queueing = config.mode == "queueing"

    runs_path = out / "runs.csv"
    header = "run_id,algorithm,t,arm,reward,cum_regret,subopt_draws"
    if queueing:
        header += ",queue_len,queue_regret"
    lines = [header]
    for alg in config.algorithms:
        for r in range(config.n_runs):
            trace = result.traces[(alg, r)]
            metrics = result.metrics[(alg, r)]
            cum_regret = metrics["cum_regret"]
            subopt = metrics["subopt_draws"]
            if queueing:
                arms = trace.server
                rewards = trace.served
                q_len = metrics["queue_len"]
                q_reg = metrics["queue_regret"]
            else:
                arms = trace.arms
                rewards = trace.rewards
            for i in range(config.horizon):
                row = (
                    f"{r},{alg},{i + 1},{arms[i]},{_fmt(rewards[i])},"
                    f"{_fmt(cum_regret[i])},{int(subopt[i])}"
                )
                if queueing:
                    row += f",{int(q_len[i])},{_fmt(q_reg[i])}"
                lines.append(row)
    runs_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    agg_path = out / "agg.csv"
    lines = ["algorithm,t,metric,mean,p75"]
    for alg in config.algorithms:
        for m in result.metric_names:
            series = result.aggregates[(alg, m)]
            for i in range(config.horizon):
                lines.append(
                    f"{alg},{i + 1},{m},{_fmt(series.mean[i])},{_fmt(series.p75[i])}"
                )
    agg_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return runs_path, agg_path


def load_config(source: str | dict) -> ExperimentConfig:
    """Load a config from a preset name, a JSON file path, or a dict."""
    import json

    if isinstance(source, dict):
        return ExperimentConfig.from_dict(source)
    if source in PRESETS:
        return ExperimentConfig.from_dict(PRESETS[source])
    path = Path(source)
    if not path.exists():
        raise ValidationError([f"config {source!r} is neither a preset nor a file"])
    return ExperimentConfig.from_dict(json.loads(path.read_text(encoding="utf-8")))
