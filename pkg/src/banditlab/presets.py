"""Named experiment presets, one per benchmark figure configuration."""

from __future__ import annotations

_BERNOULLI_20 = [0.25, 0.22, 0.2, 0.17, 0.17, 0.2, 0.13, 0.13, 0.1, 0.07,
                 0.07, 0.05, 0.05, 0.05, 0.02, 0.02, 0.02, 0.01, 0.01, 0.01]

_SEVEN = ["belman", "ucb", "ucb_tuned", "klucb", "thompson", "bayes_ucb", "random"]


def _queueing(name: str, rates: list[float], seed: int) -> dict:
    return {
        "schema_version": 1,
        "name": name,
        "mode": "queueing",
        "arrival_rate": 0.35,
        "service_rates": rates,
        "algorithms": ["belman", "thompson", "q_ucb", "q_ths", "opt", "random"],
        "horizon": 10_000,
        "n_runs": 50,
        "base_seed": seed,
    }


PRESETS: dict[str, dict] = {
    "fig1": {
        "schema_version": 1,
        "name": "fig1",
        "mode": "exploit",
        "family": "bernoulli",
        "theta": [0.8, 0.9],
        "algorithms": _SEVEN,
        "horizon": 1000,
        "n_runs": 25,
        "base_seed": 1001,
    },
    "fig2": {
        "schema_version": 1,
        "name": "fig2",
        "mode": "exploit",
        "family": "bernoulli",
        "theta": _BERNOULLI_20,
        "algorithms": _SEVEN,
        "horizon": 1000,
        "n_runs": 25,
        "base_seed": 1002,
    },
    "fig3": {
        "schema_version": 1,
        "name": "fig3",
        "mode": "exploit",
        "family": "exponential",
        "theta": [5.0, 4.0, 3.0, 2.0, 1.0],
        "bounded": "resample",
        "algorithms": ["belman", "klucb", "klucb_exp", "thompson", "ucb_tuned", "random"],
        "horizon": 1000,
        "n_runs": 25,
        "base_seed": 1003,
    },
    "fig4_longhorizon": {
        "schema_version": 1,
        "name": "fig4_longhorizon",
        "mode": "exploit",
        "family": "bernoulli",
        "theta": _BERNOULLI_20,
        "algorithms": ["belman", "ucb", "klucb", "thompson", "random"],
        "horizon": 20_000,
        "n_runs": 5,
        "base_seed": 1004,
    },
    # Full-size variant of the long-horizon study; not exercised in CI.
    "fig4_longhorizon_full": {
        "schema_version": 1,
        "name": "fig4_longhorizon_full",
        "mode": "exploit",
        "family": "bernoulli",
        "theta": _BERNOULLI_20,
        "algorithms": ["belman", "ucb", "klucb", "thompson", "random"],
        "horizon": 50_000,
        "n_runs": 50,
        "base_seed": 1004,
        "ri_every": 1,
    },
    "fig5_twophase": {
        "schema_version": 1,
        "name": "fig5_twophase",
        "mode": "two_phase",
        "family": "bernoulli",
        "theta": _BERNOULLI_20,
        "algorithms": ["belman", "belman_exploit"],
        "horizon": 1500,
        "n_runs": 25,
        "base_seed": 1005,
        "t_exp": 500,
    },
    "fig8_queueing_a": _queueing("fig8_queueing_a", [0.5, 0.33, 0.33, 0.33, 0.25], 1008),
    "fig8_queueing_b": _queueing("fig8_queueing_b", [0.33, 0.5, 0.25, 0.33, 0.25], 1009),
    "fig8_queueing_c": _queueing("fig8_queueing_c", [0.25, 0.33, 0.5, 0.25, 0.25], 1010),
}

PRESET_DESCRIPTIONS: dict[str, str] = {
    "fig1": "2-arm Bernoulli (0.8, 0.9), T=1000, 25 runs, 7 algorithms",
    "fig2": "20-arm Bernoulli, T=1000, 25 runs, 7 algorithms",
    "fig3": "5-arm bounded exponential (rates 5..1), T=1000, 25 runs",
    "fig4_longhorizon": "20-arm Bernoulli, T=20000, 5 runs (desk-scale long horizon)",
    "fig4_longhorizon_full": "20-arm Bernoulli, T=50000, 50 runs (full size, slow)",
    "fig5_twophase": "two-phase vs plain BelMan, 20 arms, T_exp=500, T=1500",
    "fig8_queueing_a": "queueing bandit, lambda=0.35, rates [.5 .33 .33 .33 .25]",
    "fig8_queueing_b": "queueing bandit, lambda=0.35, rates [.33 .5 .25 .33 .25]",
    "fig8_queueing_c": "queueing bandit, lambda=0.35, rates [.25 .33 .5 .25 .25]",
}


def preset_config(name: str) -> dict:
    """A deep-enough copy of the named preset's config dict."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}")
    cfg = dict(PRESETS[name])
    for key, val in cfg.items():
        if isinstance(val, list):
            cfg[key] = list(val)
    return cfg
