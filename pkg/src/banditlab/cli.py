"""Command-line entry point.

Commands::

    bandit run --config <preset-or-file> [--seed N] [--workers N] [--out DIR]
    bandit list-presets
    bandit oracle-check

Exit codes: 0 success, 1 validation error, 2 numerical-convergence
failure.  ``BANDIT_WORKERS`` overrides the worker count when --workers
is not given.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConvergenceError, DivergentNormalizerError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


def _cmd_run(args) -> int:
    from .harness import emit_csv, load_config, run_experiment

    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if overrides:
        config = config.replaced(**overrides)
    result = run_experiment(config, workers=args.workers)
    out_dir = config.out_dir or f"out/{config.name}"
    runs_path, agg_path = emit_csv(result, out_dir)
    print(f"wrote {runs_path}")
    print(f"wrote {agg_path}")
    for alg in config.algorithms:
        final = result.aggregates[(alg, "queue_regret" if config.mode == "queueing" else "cum_regret")]
        metric = "queue regret" if config.mode == "queueing" else "regret"
        print(f"{alg}: mean final {metric} = {final.mean[-1]:.4f}")
    return EXIT_OK


def _cmd_list_presets(_args) -> int:
    from .presets import PRESET_DESCRIPTIONS, PRESETS

    width = max(len(name) for name in PRESETS)
    for name in PRESETS:
        print(f"{name:<{width}}  {PRESET_DESCRIPTIONS.get(name, '')}")
    return EXIT_OK


def _cmd_oracle_check(_args) -> int:
    """Small oracle suites: KL quadrature, projection grid, argmin ranking."""
    import numpy as np

    from . import oracles
    from .expfam import BeliefState, RewardFamily, kl_belief
    from .manifold import BeliefReward, i_projection_score, ri_objective, ri_projection

    rng = np.random.default_rng(7)
    failures = []

    worst = 0.0
    for family in (RewardFamily.BERNOULLI, RewardFamily.EXPONENTIAL):
        for _ in range(20):
            a1, b1, a2, b2 = np.exp(rng.uniform(np.log(0.3), np.log(30.0), size=4))
            p = BeliefState(family, float(a1), float(b1))
            q = BeliefState(family, float(a2), float(b2))
            worst = max(worst, abs(kl_belief(p, q) - oracles.kl_quadrature(p, q)))
    print(f"kl closed form vs quadrature: max |diff| = {worst:.3g} "
          f"({'PASS' if worst < 1e-6 else 'FAIL'})")
    if worst >= 1e-6:
        failures.append("kl")

    worst = 0.0
    for _ in range(5):
        k = int(rng.integers(2, 4))
        arms = [
            BeliefReward(BeliefState(
                RewardFamily.BERNOULLI,
                float(np.exp(rng.uniform(np.log(0.8), np.log(5.0)))),
                float(np.exp(rng.uniform(np.log(0.8), np.log(5.0)))),
            ))
            for _ in range(k)
        ]
        tau = float(rng.uniform(0.8, 2.0))
        sol = ri_projection(arms, tau)
        ga, gb, interior = oracles.ri_grid_search(arms, tau)
        if not interior:
            failures.append("ri-grid-boundary")
            continue
        grid_val = ri_objective(arms, tau, BeliefState(RewardFamily.BERNOULLI, ga, gb))
        sol_val = ri_objective(arms, tau, sol.pseudo_belief)
        worst = max(worst, sol_val - grid_val)
    print(f"rI-projection vs grid search: max objective excess = {worst:.3g} "
          f"({'PASS' if worst < 1e-4 else 'FAIL'})")
    if worst >= 1e-4:
        failures.append("ri")

    mismatches = 0
    for _ in range(10):
        k = int(rng.integers(2, 4))
        arms = [
            BeliefReward(BeliefState(
                RewardFamily.BERNOULLI,
                float(rng.uniform(1.0, 8.0)),
                float(rng.uniform(1.0, 8.0)),
            ))
            for _ in range(k)
        ]
        tau = float(rng.uniform(0.8, 2.0))
        q = ri_projection(arms, tau)
        closed = np.argmin([i_projection_score(a, q) for a in arms])
        quad = np.argmin([oracles.joint_kl_quadrature(a, q) for a in arms])
        mismatches += int(closed != quad)
    print(f"argmin decomposition: {mismatches} ranking mismatches out of 10 "
          f"({'PASS' if mismatches == 0 else 'FAIL'})")
    if mismatches:
        failures.append("argmin")

    if failures:
        raise ConvergenceError(f"oracle checks failed: {', '.join(failures)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandit", description="Bandit experiment laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment config or preset")
    run_p.add_argument("--config", required=True, help="preset name or JSON config path")
    run_p.add_argument("--seed", type=int, default=None, help="override base_seed")
    run_p.add_argument("--workers", type=int, default=None, help="parallel worker count")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.set_defaults(func=_cmd_run)

    list_p = sub.add_parser("list-presets", help="list named experiment presets")
    list_p.set_defaults(func=_cmd_list_presets)

    oracle_p = sub.add_parser("oracle-check", help="run the quadrature/grid oracle suites")
    oracle_p.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        for violation in exc.violations:
            print(f"error: {violation}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, DivergentNormalizerError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
