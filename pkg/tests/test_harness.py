import json

import numpy as np
import pytest

import esngrid.harness as harness
from esngrid.harness import (
    ExperimentConfig,
    ResultRecord,
    emit_report,
    factor_pairs,
    mean_ci,
    neuronal_partitioning,
    param_sweep,
    run_experiment,
)

TINY_DATA = {"n_steps": 620, "splits": [300, 120, 120], "horizon": 5, "washout": 20}
TINY_HP = {"n_reservoir": 16, "spectral_radius": 0.9, "leak": 0.8, "input_norm": 0.5,
           "ip": {"epochs": 0}}


def tiny_config(**overrides):
    base = dict(
        task="mackey",
        data=TINY_DATA,
        hyperparameters=TINY_HP,
        topology={"breadth": 1, "depth": 1},
        seed=1,
        repetitions=2,
        lambda_max_steps=15,
    )
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


class TestFactorPairs:
    def test_six(self):
        assert factor_pairs(6) == [(1, 6), (2, 3), (3, 2), (6, 1)]

    def test_one(self):
        assert factor_pairs(1) == [(1, 1)]

    def test_twelve_has_six_divisors(self):
        assert len(factor_pairs(12)) == 6

    def test_positive_required(self):
        with pytest.raises(ValueError):
            factor_pairs(0)


class TestConfig:
    def test_exactly_one_mode(self):
        with pytest.raises(ValueError, match="exactly one"):
            ExperimentConfig(task="mackey", topology={"breadth": 1, "depth": 1},
                             sweep={"parameter": "leak", "values": [0.5]})
        with pytest.raises(ValueError, match="exactly one"):
            ExperimentConfig(task="mackey")

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_dict({"task": "mackey", "topology": {}, "typo": 1})

    def test_search_space_needs_fixed_topology(self):
        with pytest.raises(ValueError, match="search space"):
            ExperimentConfig(task="mackey", partition={"budget": 8},
                             search_space=[{"name": "leak", "lower": 0.1, "upper": 1.0}])

    def test_repetition_seeds_from_base(self):
        cfg = tiny_config(repetitions=3)
        seeds = cfg.repetition_seeds()
        assert len(seeds) == 3 and len(set(seeds)) == 3
        assert cfg.repetition_seeds() == seeds

    def test_explicit_seed_list_wins(self):
        cfg = tiny_config(seeds=[5, 6])
        assert cfg.repetition_seeds() == [5, 6]


class TestMeanCi:
    def test_single_value(self):
        assert mean_ci([2.0]) == (2.0, 0.0)

    def test_matches_t_table(self):
        # n=4, std=1: half width = t_{.975,3} / 2 = 1.5912
        mean, half = mean_ci([1.0, 2.0, 3.0, 4.0])
        assert mean == 2.5
        sample_std = np.std([1, 2, 3, 4], ddof=1)
        assert half == pytest.approx(3.182446 * sample_std / 2.0, abs=1e-4)


class TestRunExperiment:
    def test_fixed_run_produces_record(self, tmp_path):
        cfg = tiny_config(output_dir=str(tmp_path / "out"))
        record = run_experiment(cfg)
        assert len(record.repetitions) == 2
        assert 0.0 <= record.summary["nrmse"]["mean"]
        assert (tmp_path / "out" / "result.json").exists()
        assert (tmp_path / "out" / "result.csv").exists()
        assert (tmp_path / "out" / "model.json").exists()
        assert (tmp_path / "out" / "separation_points.csv").exists()

    def test_end_to_end_determinism(self):
        # acceptance: identical config+seed means identical bytes, timing aside
        a = run_experiment(tiny_config()).to_json(include_timing=False)
        b = run_experiment(tiny_config()).to_json(include_timing=False)
        assert a == b

    def test_stage_tagged_failure(self):
        cfg = tiny_config(task="custom-csv", data={})
        with pytest.raises(harness.StageError) as err:
            run_experiment(cfg)
        assert err.value.stage == "data"

    def test_pso_search_improves_and_never_touches_test(self, monkeypatch):
        state = {"in_pso": False}
        accesses = []

        class RecordingList(list):
            def __getitem__(self, item):
                if state["in_pso"]:
                    accesses.append(item)
                return super().__getitem__(item)

            def __iter__(self):
                if state["in_pso"]:
                    accesses.append("iter")
                return super().__iter__()

        real_build = harness.build_datasets

        def wrapped_build(task, data):
            train, val, test = real_build(task, data)
            test.sequences = RecordingList(test.sequences)
            return train, val, test

        real_optimize = harness.optimize

        def spying_optimize(*args, **kwargs):
            state["in_pso"] = True
            try:
                return real_optimize(*args, **kwargs)
            finally:
                state["in_pso"] = False

        monkeypatch.setattr(harness, "build_datasets", wrapped_build)
        monkeypatch.setattr(harness, "optimize", spying_optimize)

        cfg = tiny_config(
            repetitions=1,
            search_space=[
                {"name": "spectral_radius", "lower": 0.3, "upper": 1.3},
                {"name": "leak", "lower": 0.2, "upper": 1.0},
            ],
            pso={"iterations": 2, "particles": 3},
        )
        record = run_experiment(cfg)
        assert accesses == []
        assert np.isfinite(record.summary["nrmse"]["mean"])


class TestPartitioning:
    def test_budget_division_uses_floor(self, monkeypatch):
        captured = []

        def stub(payload):
            captured.append(payload)
            return {"key": payload["key"], "nrmse_mean": 0.1, "nrmse_ci": 0.0,
                    "lambda_max": -0.1, "repetitions": []}

        monkeypatch.setattr(harness, "_run_cell", stub)
        cfg = tiny_config(topology=None, partition={"budget": 2048, "n_layers": [3]})
        rows = neuronal_partitioning(cfg)
        assert all(p["hyperparameters"]["n_reservoir"] == 682 for p in captured)
        assert {(r["depth"], r["breadth"]) for r in rows} == {(1, 3), (3, 1)}

    def test_row_count_is_divisor_sum(self, monkeypatch):
        monkeypatch.setattr(
            harness,
            "_run_cell",
            lambda payload: {"key": payload["key"], "nrmse_mean": 0.1, "nrmse_ci": 0.0,
                             "lambda_max": -0.1, "repetitions": []},
        )
        cfg = tiny_config(topology=None, partition={"budget": 64, "n_layers": [1, 2, 6, 12]})
        rows = neuronal_partitioning(cfg)
        assert len(rows) == 1 + 2 + 4 + 6

    def test_one_neuron_per_reservoir_boundary(self, tmp_path):
        cfg = tiny_config(
            topology=None,
            partition={"budget": 8, "n_layers": [8]},
            repetitions=1,
            output_dir=str(tmp_path),
        )
        rows = neuronal_partitioning(cfg)
        assert rows and all(r["n_reservoir"] == 1 for r in rows)
        header = (tmp_path / "partition.csv").read_text().splitlines()[0]
        assert header == "n_layers,depth,breadth,n_reservoir,nrmse_mean,nrmse_ci,lambda_max"

    def test_budget_below_layers_rejected(self):
        cfg = tiny_config(topology=None, partition={"budget": 4, "n_layers": [8]})
        with pytest.raises(ValueError, match="budget"):
            neuronal_partitioning(cfg)

    def test_failed_cells_are_skipped(self, monkeypatch):
        def flaky(payload):
            if payload["n_layers"] == 2:
                raise RuntimeError("no")
            return {"key": payload["key"], "nrmse_mean": 0.1, "nrmse_ci": 0.0,
                    "lambda_max": -0.1, "repetitions": []}

        monkeypatch.setattr(harness, "_run_cell", flaky)
        cfg = tiny_config(topology=None, partition={"budget": 16, "n_layers": [1, 2]})
        rows = neuronal_partitioning(cfg)
        assert len(rows) == 1


class TestParamSweep:
    def test_single_cell(self):
        cfg = tiny_config(
            topology=None,
            repetitions=1,
            sweep={"parameter": "leak", "values": [0.7], "grid": [[1, 1]]},
        )
        rows, correlation = param_sweep(cfg)
        assert len(rows) == 1
        assert correlation is None

    def test_grid_shape_and_csv(self, tmp_path):
        cfg = tiny_config(
            topology=None,
            repetitions=1,
            output_dir=str(tmp_path),
            sweep={"parameter": "spectral_radius", "values": [0.6, 1.0], "grid": [[1, 1], [2, 1]]},
        )
        rows, correlation = param_sweep(cfg)
        assert len(rows) == 4
        text = (tmp_path / "sweep.csv").read_text().splitlines()
        assert text[0] == "parameter,value,breadth,depth,nrmse_mean,nrmse_ci,lambda_max"
        assert len(text) == 5

    def test_unknown_parameter(self):
        cfg = tiny_config(topology=None, sweep={"parameter": "bogus", "values": [1.0]})
        with pytest.raises(ValueError, match="unknown sweep parameter"):
            param_sweep(cfg)

    def test_workers_do_not_change_results(self):
        cfg = tiny_config(
            topology=None,
            repetitions=1,
            sweep={"parameter": "leak", "values": [0.5, 0.9], "grid": [[1, 1]]},
        )
        serial, _ = param_sweep(cfg, workers=1)
        parallel, _ = param_sweep(cfg, workers=2)
        assert json.dumps(serial, sort_keys=True) == json.dumps(parallel, sort_keys=True)


def make_record(label, rmse_mean, nrmse_mean, mape_mean=None, fl_acc_mean=None):
    summary = {
        "rmse": {"mean": rmse_mean, "ci95": 0.0},
        "nrmse": {"mean": nrmse_mean, "ci95": 0.0},
    }
    if mape_mean is not None:
        summary["mape"] = {"mean": mape_mean, "ci95": 0.0}
    if fl_acc_mean is not None:
        summary["fl_acc"] = {"mean": fl_acc_mean, "ci95": 0.0}
    return ResultRecord(
        config_echo={"label": label, "task": "mackey"},
        repetitions=[],
        summary=summary,
        chosen_betas=[],
        wall_clock_s=1.0,
    )


class TestEmitReport:
    def test_single_row(self):
        text = emit_report([make_record("run", 0.001, 0.01)], "csv")
        assert text.splitlines()[0] == "label,rmse,nrmse,mape,fl_acc"
        assert len(text.splitlines()) == 2

    def test_thousandths_rendering(self):
        text = emit_report([make_record("run", 0.00722, 0.0275, mape_mean=0.555)], "csv")
        row = text.splitlines()[1].split(",")
        assert row[1] == "7.22"
        assert row[2] == "27.5"
        assert row[3] == "5.55"

    def test_fl_acc_rendered_as_percent(self):
        text = emit_report([make_record("p", 0.1, 0.2, fl_acc_mean=0.3344)], "csv")
        assert text.splitlines()[1].split(",")[4] == "33.44%"

    def test_markdown_round_trips_csv_cells(self):
        records = [make_record("a", 0.00722, 0.0275), make_record("b", 0.001119, 0.00517)]
        csv_rows = [line.split(",") for line in emit_report(records, "csv").splitlines()]
        md_lines = emit_report(records, "markdown-table").splitlines()
        md_rows = [[c.strip() for c in line.strip("|").split("|")] for line in md_lines]
        assert md_rows[0] == csv_rows[0]
        assert md_rows[2:] == csv_rows[1:]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            emit_report([], "csv")

    def test_json_format(self):
        text = emit_report([make_record("run", 0.1, 0.2)], "json")
        assert json.loads(text)[0]["summary"]["rmse"]["mean"] == 0.1
