"""Orchestration: configs, aggregation, CSV emission, CLI, seeding."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from banditlab.cli import main as cli_main
from banditlab.errors import ValidationError
from banditlab.harness import (
    ALGORITHM_IDS,
    ExperimentConfig,
    emit_csv,
    load_config,
    percentile_75,
    run_experiment,
)
from banditlab.presets import PRESETS, preset_config
from banditlab.seeding import mix_seed, splitmix64

TINY = {
    "schema_version": 1,
    "name": "tiny",
    "mode": "exploit",
    "family": "bernoulli",
    "theta": [0.3, 0.7],
    "algorithms": ["belman", "thompson", "random"],
    "horizon": 40,
    "n_runs": 3,
    "base_seed": 77,
}

TINY_QUEUE = {
    "schema_version": 1,
    "name": "tinyq",
    "mode": "queueing",
    "arrival_rate": 0.35,
    "service_rates": [0.5, 0.25],
    "algorithms": ["belman", "opt", "random"],
    "horizon": 60,
    "n_runs": 2,
    "base_seed": 99,
}


class TestSeeding:
    def test_splitmix64_reference_vector(self):
        # Standard test vector for splitmix64 seeded with 0.
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_mix_is_order_sensitive(self):
        assert mix_seed(1, 2) != mix_seed(2, 1)
        assert mix_seed(1, 2) == mix_seed(1, 2)

    def test_rejects_negative_parts(self):
        with pytest.raises(ValueError):
            mix_seed(-1)


class TestPercentile:
    def test_nearest_rank_examples(self):
        assert percentile_75([1, 2, 3, 4]) == 3
        assert percentile_75([5]) == 5
        assert percentile_75([0, 0, 0, 10]) == 0

    def test_within_range(self):
        vals = [3.5, -1.0, 2.0, 9.0, 4.0]
        assert min(vals) <= percentile_75(vals) <= max(vals)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            percentile_75([])


class TestConfigValidation:
    def test_collects_all_violations(self):
        bad = {"schema_version": 2, "mode": "bogus", "algorithms": [], "horizon": 0,
               "n_runs": 0, "base_seed": -1}
        with pytest.raises(ValidationError) as err:
            ExperimentConfig.from_dict(bad)
        assert len(err.value.violations) >= 5

    def test_presets_all_valid(self):
        for name in PRESETS:
            config = ExperimentConfig.from_dict(preset_config(name))
            assert config.horizon >= 1

    def test_unknown_algorithm_for_mode(self):
        cfg = dict(TINY_QUEUE, algorithms=["ucb"])
        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict(cfg)

    def test_klucb_requires_bounded_rewards(self):
        cfg = dict(TINY, family="exponential", theta=[2.0, 1.0], algorithms=["klucb"])
        with pytest.raises(ValidationError):
            ExperimentConfig.from_dict(cfg)

    def test_algorithm_ids_are_unique_and_stable(self):
        assert len(set(ALGORITHM_IDS.values())) == len(ALGORITHM_IDS)
        assert ALGORITHM_IDS["belman"] == 1


class TestRunExperiment:
    def test_single_run_percentile_equals_series(self):
        config = ExperimentConfig.from_dict(dict(TINY, n_runs=1, algorithms=["random"]))
        result = run_experiment(config)
        agg = result.aggregates[("random", "cum_regret")]
        series = result.metrics[("random", 0)]["cum_regret"]
        assert np.array_equal(agg.mean, series)
        assert np.array_equal(agg.p75, series)

    def test_aggregate_mean_matches_recompute(self):
        config = ExperimentConfig.from_dict(TINY)
        result = run_experiment(config)
        for alg in config.algorithms:
            mats = np.vstack([result.metrics[(alg, r)]["cum_regret"] for r in range(3)])
            assert np.allclose(result.aggregates[(alg, "cum_regret")].mean, mats.mean(axis=0))

    def test_rerun_identical(self):
        config = ExperimentConfig.from_dict(TINY)
        r1 = run_experiment(config)
        r2 = run_experiment(config)
        for key in r1.traces:
            assert np.array_equal(r1.traces[key].arms, r2.traces[key].arms)

    def test_common_reward_streams_across_algorithms(self):
        # Algorithms share the environment stream within a run: two
        # distinct policies see identical rewards whenever their chosen
        # arms coincide step by step from the start.
        config = ExperimentConfig.from_dict(dict(TINY, algorithms=["ucb", "ucb_tuned"]))
        result = run_experiment(config)
        a = result.traces[("ucb", 0)]
        b = result.traces[("ucb_tuned", 0)]
        same_prefix = 0
        while same_prefix < 40 and a.arms[same_prefix] == b.arms[same_prefix]:
            same_prefix += 1
        assert np.array_equal(a.rewards[:same_prefix], b.rewards[:same_prefix])

    def test_workers_do_not_change_output(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY)
        seq = run_experiment(config, workers=1)
        par = run_experiment(config, workers=2)
        p1, a1 = emit_csv(seq, tmp_path / "seq")
        p2, a2 = emit_csv(par, tmp_path / "par")
        assert p1.read_bytes() == p2.read_bytes()
        assert a1.read_bytes() == a2.read_bytes()

    def test_queueing_mode_metrics(self):
        config = ExperimentConfig.from_dict(TINY_QUEUE)
        result = run_experiment(config)
        assert set(result.metric_names) == {"cum_regret", "subopt_draws", "queue_len", "queue_regret"}
        regret = result.metrics[("opt", 0)]["queue_regret"]
        assert len(regret) == 60


class TestEmitCsv:
    def test_runs_csv_columns_exact(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY)
        result = run_experiment(config)
        runs_path, agg_path = emit_csv(result, tmp_path)
        header = runs_path.read_text().splitlines()[0]
        assert header == "run_id,algorithm,t,arm,reward,cum_regret,subopt_draws"
        agg_header = agg_path.read_text().splitlines()[0]
        assert agg_header == "algorithm,t,metric,mean,p75"

    def test_queueing_adds_columns(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY_QUEUE)
        result = run_experiment(config)
        runs_path, _ = emit_csv(result, tmp_path)
        header = runs_path.read_text().splitlines()[0]
        assert header.endswith(",queue_len,queue_regret")

    def test_agg_row_count(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY)
        result = run_experiment(config)
        _, agg_path = emit_csv(result, tmp_path)
        rows = agg_path.read_text().splitlines()[1:]
        assert len(rows) == len(config.algorithms) * config.horizon * 2

    def test_round_trip_parse(self, tmp_path):
        # Values survive parse -> format -> parse at the emitted %.10g
        # precision (10 significant digits, the file format's contract).
        config = ExperimentConfig.from_dict(TINY)
        result = run_experiment(config)
        runs_path, _ = emit_csv(result, tmp_path)
        lines = runs_path.read_text().splitlines()[1:]
        for idx in (0, 17, len(lines) - 1):
            row = lines[idx].split(",")
            r, alg, t = int(row[0]), row[1], int(row[2])
            trace = result.traces[(alg, r)]
            assert float(row[3]) == trace.arms[t - 1]
            assert float(row[4]) == float(format(trace.rewards[t - 1], ".10g"))
            assert float(row[5]) == float(
                format(result.metrics[(alg, r)]["cum_regret"][t - 1], ".10g")
            )

    def test_byte_identical_reruns(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY)
        p1, a1 = emit_csv(run_experiment(config), tmp_path / "one")
        p2, a2 = emit_csv(run_experiment(config), tmp_path / "two")
        assert p1.read_bytes() == p2.read_bytes()
        assert a1.read_bytes() == a2.read_bytes()

    def test_empty_result_rejected(self, tmp_path):
        config = ExperimentConfig.from_dict(TINY)
        from banditlab.harness import ExperimentResult

        with pytest.raises(ValidationError):
            emit_csv(ExperimentResult(config=config), tmp_path)


class TestCli:
    def test_list_presets(self, capsys):
        assert cli_main(["list-presets"]) == 0
        out = capsys.readouterr().out
        for name in PRESETS:
            assert name in out

    def test_run_with_config_file(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(dict(TINY, out_dir=str(tmp_path / "out"))))
        assert cli_main(["run", "--config", str(path)]) == 0
        assert (tmp_path / "out" / "runs.csv").exists()
        assert (tmp_path / "out" / "agg.csv").exists()

    def test_run_preset_with_overrides(self, tmp_path):
        path = tmp_path / "config.json"
        cfg = dict(TINY, horizon=10, n_runs=1, algorithms=["random"])
        path.write_text(json.dumps(cfg))
        assert cli_main(["run", "--config", str(path), "--seed", "5",
                         "--out", str(tmp_path / "o2")]) == 0
        assert (tmp_path / "o2" / "runs.csv").exists()

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"schema_version": 1, "mode": "bogus"}))
        assert cli_main(["run", "--config", str(path)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_config_is_validation_error(self):
        assert cli_main(["run", "--config", "no_such_preset"]) == 1

    def test_load_config_accepts_presets(self):
        config = load_config("fig1")
        assert config.name == "fig1"
        assert config.horizon == 1000
