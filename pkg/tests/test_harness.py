import json
from dataclasses import replace

import numpy as np
import pytest
import yaml

from rafkit.cli import main as cli_main
from rafkit.config import ExperimentConfig, load_config
from rafkit.forecast import ForecastRequest, ForecasterSpec, make_forecaster
from rafkit.harness import (
    available_slices,
    emit_trajectories,
    prepare_series,
    run_experiment,
    sweep_pool_size,
)
from rafkit.ingest import IngestConfig
from rafkit.kb import build_kb_and_test
from rafkit.synthetic import seasonal_anomaly_series, write_series_csv


@pytest.fixture(scope="module")
def small_csv(tmp_path_factory):
    series = seasonal_anomaly_series(days=240, variables=3, seed=5, n_targets=2)
    path = tmp_path_factory.mktemp("data") / "small.csv"
    write_series_csv(series, path)
    return path


def small_config(csv_path, out_dir, **overrides) -> ExperimentConfig:
    base = dict(
        ingest=IngestConfig(csv_path, target_station_names=("WL1", "WL2")),
        lookback=30,
        horizons=(5, 8),
        train_fraction=0.85,
        retrievers=("similarity", "mutual-information"),
        strategies=("B",),
        top_k=2,
        forecaster=ForecasterSpec(kind="autoregressive", ar_order=3, ridge_damping=1e-3),
        coverages=(0.0, 0.85),
        out_dir=out_dir,
        k_emb=64,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_grid_cardinality_and_archive_counts(self, small_csv, tmp_path):
        cfg = small_config(small_csv, tmp_path / "out")
        rows, archive, failures = run_experiment(cfg)
        assert not failures
        # per horizon: 1 bare cell + 2 retrievers; 3 rows each (2 stations + Overall)
        assert len(rows) == 2 * (1 + 2) * 3
        series = prepare_series(cfg)
        for cell in archive["cells"]:
            _, test = build_kb_and_test(series, 30, cell["lead_time"], 0.85)
            assert len(cell["samples"]) == len(test)

    def test_coverage_zero_equals_bare_forecaster(self, small_csv, tmp_path):
        cfg = small_config(small_csv, tmp_path / "out")
        rows, archive, _ = run_experiment(cfg)
        series = prepare_series(cfg)
        forecaster = make_forecaster(cfg.forecaster)
        for cell in archive["cells"]:
            if cell["coverage"] != 0.0:
                continue
            _, test = build_kb_and_test(series, 30, cell["lead_time"], 0.85)
            by_origin = {p.origin: p for p in test.samples}
            for sample in cell["samples"]:
                pair = by_origin[sample["origin"]]
                req = ForecastRequest(pair.lookback, pair.h, series.target_indices)
                np.testing.assert_array_equal(
                    np.array(sample["pred"]), forecaster(req).values
                )

    def test_truth_passthrough(self, small_csv, tmp_path):
        cfg = small_config(small_csv, tmp_path / "out")
        _, archive, _ = run_experiment(cfg)
        series = prepare_series(cfg)
        cell = archive["cells"][0]
        _, test = build_kb_and_test(series, 30, cell["lead_time"], 0.85)
        by_origin = {p.origin: p for p in test.samples}
        for sample in cell["samples"]:
            pair = by_origin[sample["origin"]]
            np.testing.assert_array_equal(
                np.array(sample["truth"]),
                pair.future[:, list(series.target_indices)],
            )

    def test_byte_identical_reruns(self, small_csv, tmp_path):
        cfg1 = small_config(small_csv, tmp_path / "a")
        cfg2 = small_config(small_csv, tmp_path / "b")
        run_experiment(cfg1)
        run_experiment(cfg2)
        assert (tmp_path / "a" / "report.csv").read_bytes() == (
            tmp_path / "b" / "report.csv"
        ).read_bytes()
        assert (tmp_path / "a" / "archive.json").read_bytes() == (
            tmp_path / "b" / "archive.json"
        ).read_bytes()

    def test_workers_do_not_change_results(self, small_csv, tmp_path):
        serial = small_config(small_csv, tmp_path / "s")
        threaded = small_config(small_csv, tmp_path / "t", workers=4)
        run_experiment(serial)
        run_experiment(threaded)
        assert (tmp_path / "s" / "report.csv").read_bytes() == (
            tmp_path / "t" / "report.csv"
        ).read_bytes()

    def test_failed_cell_does_not_abort_run(self, small_csv, tmp_path):
        # a dead external endpoint fails every cell; the run must still
        # return with the failures recorded rather than raising
        cfg = small_config(small_csv, tmp_path / "out", horizons=(5,))
        series = prepare_series(cfg)
        bad = replace(cfg, forecaster=ForecasterSpec(kind="external", endpoint="exec:false"))
        rows, _, failures = run_experiment(bad, series=series)
        assert failures
        assert (tmp_path / "out" / "failures.json").exists()


class TestSweep:
    def test_singleton_sweep_matches_run(self, small_csv, tmp_path):
        cfg = small_config(
            small_csv, tmp_path / "out", coverages=(0.85,), horizons=(5,)
        )
        sweep = sweep_pool_size(cfg, (0.85,))
        rows, _, _ = run_experiment(
            replace(cfg, out_dir=tmp_path / "direct"), write=False
        )
        direct = {
            (r.lead_time, r.retriever, r.strategy): r.mae
            for r in rows
            if r.station == "Overall"
        }
        for entry in sweep:
            key = (entry["lead_time"], entry["retriever"], entry["strategy"])
            assert abs(direct[key] - entry["mae"]) < 1e-15

    def test_sweep_csv_written(self, small_csv, tmp_path):
        cfg = small_config(
            small_csv, tmp_path / "out", horizons=(5,), retrievers=("similarity",)
        )
        sweep_pool_size(cfg, (0.0, 0.85))
        text = (tmp_path / "out" / "sweep.csv").read_text()
        assert text.startswith("coverage,lead_time,retriever,strategy,mae")
        assert "\n0," in text and "\n0.85," in text


class TestTrajectories:
    def test_truth_column_and_methods(self, small_csv, tmp_path):
        cfg = small_config(small_csv, tmp_path / "out", horizons=(5,))
        _, archive, _ = run_experiment(cfg)
        out = emit_trajectories(archive, "WL1", 5, tmp_path / "traj.csv")
        import csv as csv_mod

        with out.open() as fh:
            records = list(csv_mod.reader(fh))
        header = records[0]
        assert header[:2] == ["date", "truth"]
        assert len(header) == 2 + 3  # bare + 2 retriever cells
        series = prepare_series(cfg)
        _, test = build_kb_and_test(series, 30, 5, 0.85)
        by_origin = {p.origin: p for p in test.samples}
        first_origin = sorted(by_origin)[0]
        first_truth = float(records[1][1])
        assert first_truth == pytest.approx(
            by_origin[first_origin].future[4, 0], abs=1e-9
        )

    def test_missing_slice_lists_available(self, small_csv, tmp_path):
        cfg = small_config(small_csv, tmp_path / "out", horizons=(5,))
        _, archive, _ = run_experiment(cfg)
        with pytest.raises(ValueError, match="available"):
            emit_trajectories(archive, "WL1", 99, tmp_path / "x.csv")
        assert ("WL1", 5) in available_slices(archive)

    def test_empty_archive_errors(self, tmp_path):
        with pytest.raises(ValueError, match="available"):
            emit_trajectories(
                {"meta": {"stations": ["WL1"], "dates": []}, "cells": []},
                "WL1",
                5,
                tmp_path / "x.csv",
            )


class TestConfigAndCli:
    def write_config(self, tmp_path, csv_path, **exp_overrides):
        exp = dict(
            lookback=30,
            horizons=[5],
            train_fraction=0.85,
            retrievers=["sim"],
            strategies=["b"],
            top_k=2,
            coverages=[0.85],
            out_dir=str(tmp_path / "out"),
        )
        exp.update(exp_overrides)
        doc = {
            "data": {
                "csv_path": str(csv_path),
                "targets": ["WL1", "WL2"],
                "units": {"WL1": "ft"},
            },
            "experiment": exp,
            "retrieval": {"k_emb": 64},
            "forecaster": {"kind": "ar", "order": 3, "damping": 0.001},
        }
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump(doc), encoding="utf-8")
        return path

    def test_load_config_aliases(self, small_csv, tmp_path):
        path = self.write_config(tmp_path, small_csv)
        cfg = load_config(path)
        assert cfg.retrievers == ("similarity",)
        assert cfg.strategies == ("B",)
        assert cfg.forecaster.kind == "autoregressive"
        assert cfg.ingest.units["WL1"] == "ft"

    def test_invalid_coverage_rejected(self, small_csv, tmp_path):
        path = self.write_config(tmp_path, small_csv, coverages=[0.9])
        with pytest.raises(ValueError, match="coverage"):
            load_config(path)

    def test_cli_evaluate_and_trajectories(self, small_csv, tmp_path):
        path = self.write_config(tmp_path, small_csv)
        assert cli_main(["evaluate", "--config", str(path)]) == 0
        report = (tmp_path / "out" / "report.csv").read_text()
        assert report.startswith(
            "station,lead_time,retriever,strategy,forecaster,coverage,mae,rmse,sedi,n_samples"
        )
        assert (
            cli_main(
                [
                    "trajectories",
                    "--config",
                    str(path),
                    "--station",
                    "WL1",
                    "--horizon",
                    "5",
                ]
            )
            == 0
        )
        assert (tmp_path / "out" / "trajectory_WL1_h5.csv").exists()

    def test_cli_flags_override_config(self, small_csv, tmp_path, capsys):
        path = self.write_config(tmp_path, small_csv)
        assert (
            cli_main(
                [
                    "retrieve",
                    "--config",
                    str(path),
                    "--retriever",
                    "mi",
                    "--top-k",
                    "3",
                ]
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "mutual-information" in out
        assert "#3" in out

    def test_cli_forecast_single_query(self, small_csv, tmp_path, capsys):
        path = self.write_config(tmp_path, small_csv)
        assert cli_main(["forecast", "--config", str(path)]) == 0
        out = capsys.readouterr().out
        assert out.startswith("date,WL1,WL2")
        assert len(out.strip().splitlines()) == 6  # header + h=5 rows

    def test_cli_ingest_summary(self, small_csv, tmp_path, capsys):
        path = self.write_config(tmp_path, small_csv)
        assert cli_main(["ingest", "--config", str(path)]) == 0
        out = capsys.readouterr().out
        assert "rows: 240" in out and "targets: WL1, WL2" in out

    def test_cli_build_kb(self, small_csv, tmp_path, capsys):
        path = self.write_config(tmp_path, small_csv)
        assert cli_main(["build-kb", "--config", str(path)]) == 0
        files = list((tmp_path / "out").glob("*.rafkb"))
        assert files
        from rafkit.kb import load_kb

        kb = load_kb(files[0])
        assert kb.l == 30

    def test_raf_config_env(self, small_csv, tmp_path, monkeypatch, capsys):
        path = self.write_config(tmp_path, small_csv)
        monkeypatch.setenv("RAF_CONFIG", str(path))
        assert cli_main(["ingest"]) == 0
        assert "rows: 240" in capsys.readouterr().out
