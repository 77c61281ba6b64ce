"""Experiment orchestration: the evaluation grid, pool-size sweeps, and
trajectory extraction.

Each grid cell is one (horizon, coverage, retriever, strategy) combination
evaluated over every test sample. Coverage 0 is the no-retrieval baseline
and is evaluated once per horizon with retriever/strategy labelled "none".
Failures abort only their own cell; the run summary lists them.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .forecast import PipelineConfig, make_forecaster, run_raf_pipeline
from .ingest import ingest
from .kb import KnowledgeBase, TestSet, build_kb_and_test, restrict_pool
from .metrics import MetricRow, mae, overall_row, rmse, sedi, sedi_thresholds
from .retrieval import Retriever
from .series import MultivariateSeries

REPORT_HEADER = (
    "station,lead_time,retriever,strategy,forecaster,coverage,mae,rmse,sedi,n_samples"
)


def prepare_series(config: ExperimentConfig) -> MultivariateSeries:
    return ingest(config.ingest)


def _evaluate_cell(
    kb: KnowledgeBase,
    test: TestSet,
    pcfg: PipelineConfig,
    workers: int,
    retriever: Retriever | None,
) -> dict[int, np.ndarray]:
    def one(pair):
        result = run_raf_pipeline(kb, pair, pcfg, retriever=retriever)
        return pair.origin, result.values

    if workers <= 1:
        return dict(one(pair) for pair in test.samples)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return dict(pool.map(one, test.samples))


def _cell_rows(
    predictions: dict[int, np.ndarray],
    test_by_origin: dict,
    stations: tuple[str, ...],
    lead_time: int,
    retriever: str,
    strategy: str,
    forecaster: str,
    coverage: float,
    target_indices: tuple[int, ...],
) -> list[MetricRow]:
    origins = sorted(predictions)
    rows = []
    for pos, name in enumerate(stations):
        truth = np.concatenate(
            [test_by_origin[o].future[:, target_indices[pos]] for o in origins]
        )
        pred = np.concatenate([predictions[o][:, pos] for o in origins])
        if truth.size >= 10:
            thresholds = sedi_thresholds(truth)
            sedi_value = sedi(truth, pred, thresholds)
        else:
            sedi_value = None
        rows.append(
            MetricRow(
                station=name,
                lead_time=lead_time,
                retriever=retriever,
                strategy=strategy,
                forecaster=forecaster,
                coverage=coverage,
                mae=mae(truth, pred),
                rmse=rmse(truth, pred),
                sedi=sedi_value,
                n_samples=len(origins),
            )
        )
    rows.append(overall_row(rows))
    return rows


def run_experiment(
    config: ExperimentConfig,
    series: MultivariateSeries | None = None,
    write: bool = True,
) -> tuple[list[MetricRow], dict, list[dict]]:
    """Evaluate the full grid; returns (report rows, forecast archive,
    failed cells). Writes report.csv and archive.json under out_dir."""
    if series is None:
        series = prepare_series(config)
    stations = series.target_names
    if not stations:
        raise ValueError("no target stations configured")
    targets = series.target_indices
    forecaster = make_forecaster(config.forecaster)
    forecaster_label = config.forecaster.label()

    rows: list[MetricRow] = []
    cells = []
    failures: list[dict] = []
    for h in config.horizons:
        kb_full, test = build_kb_and_test(
            series, config.lookback, h, config.train_fraction, config.stride
        )
        test_by_origin = {p.origin: p for p in test.samples}
        coverages = config.resolved_coverages()

        def run_cell(kb, retriever_name, strategy, coverage, prebuilt):
            pcfg = PipelineConfig(
                target_indices=targets,
                forecaster=forecaster,
                forecaster_label=forecaster_label,
                retriever=retriever_name if retriever_name != "none" else "similarity",
                strategy=strategy if strategy != "none" else "B",
                k=config.top_k,
                k_emb=config.k_emb,
                bins=config.bins,
                max_rows=config.forecaster.max_rows,
            )
            predictions = _evaluate_cell(kb, test, pcfg, config.workers, prebuilt)
            rows.extend(
                _cell_rows(
                    predictions,
                    test_by_origin,
                    stations,
                    h,
                    retriever_name,
                    strategy,
                    forecaster_label,
                    coverage,
                    targets,
                )
            )
            cells.append(
                {
                    "lead_time": h,
                    "retriever": retriever_name,
                    "strategy": strategy,
                    "forecaster": forecaster_label,
                    "coverage": coverage,
                    "samples": [
                        {
                            "origin": o,
                            "truth": test_by_origin[o]
                            .future[:, list(targets)]
                            .tolist(),
                            "pred": predictions[o].tolist(),
                        }
                        for o in sorted(predictions)
                    ],
                }
            )

        if any(c == 0 for c in coverages):
            empty = restrict_pool(kb_full, 0.0, config.train_fraction, config.pool_keep)
            try:
                run_cell(empty, "none", "none", 0.0, None)
            except Exception as exc:
                failures.append(
                    {"lead_time": h, "coverage": 0.0, "error": str(exc)}
                )
        for coverage in coverages:
            if coverage == 0:
                continue
            kb = restrict_pool(kb_full, coverage, config.train_fraction, config.pool_keep)
            for retriever_name in config.retrievers:
                try:
                    prebuilt = Retriever(
                        kb, retriever_name, k_emb=config.k_emb, bins=config.bins
                    )
                except Exception as exc:
                    failures.append(
                        {
                            "lead_time": h,
                            "coverage": coverage,
                            "retriever": retriever_name,
                            "error": str(exc),
                        }
                    )
                    continue
                for strategy in config.strategies:
                    try:
                        run_cell(kb, retriever_name, strategy, coverage, prebuilt)
                    except Exception as exc:
                        failures.append(
                            {
                                "lead_time": h,
                                "coverage": coverage,
                                "retriever": retriever_name,
                                "strategy": strategy,
                                "error": str(exc),
                            }
                        )

    archive = {
        "meta": {
            "dates": [d.isoformat() for d in series.dates],
            "stations": list(stations),
            "target_indices": list(targets),
            "lookback": config.lookback,
            "train_fraction": config.train_fraction,
            "seed": config.seed,
        },
        "cells": cells,
    }
    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_report_csv(rows, out / "report.csv")
        (out / "archive.json").write_text(
            json.dumps(archive, sort_keys=True), encoding="utf-8"
        )
        if failures:
            (out / "failures.json").write_text(
                json.dumps(failures, sort_keys=True, indent=2), encoding="utf-8"
            )
    return rows, archive, failures


def _station_rank(row: MetricRow, stations: tuple[str, ...]) -> int:
    return stations.index(row.station) if row.station in stations else len(stations)


def write_report_csv(rows: list[MetricRow], path: str | Path) -> Path:
    path = Path(path)
    stations = tuple(dict.fromkeys(r.station for r in rows if r.station != "Overall"))
    ordered = sorted(
        rows,
        key=lambda r: (
            r.lead_time,
            r.coverage,
            r.retriever,
            r.strategy,
            _station_rank(r, stations),
        ),
    )
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_HEADER.split(","))
        for r in ordered:
            writer.writerow(
                [
                    r.station,
                    r.lead_time,
                    r.retriever,
                    r.strategy,
                    r.forecaster,
                    format(r.coverage, "g"),
                    format(r.mae, ".9g"),
                    format(r.rmse, ".9g"),
                    "" if r.sedi is None else format(r.sedi, ".9g"),
                    r.n_samples,
                ]
            )
    return path


def sweep_pool_size(
    config: ExperimentConfig,
    coverages: tuple[float, ...] | None = None,
    series: MultivariateSeries | None = None,
    write: bool = True,
) -> list[dict]:
    """One run_experiment per coverage level; returns long-format rows
    (coverage, lead_time, retriever, strategy, mae) from the Overall
    station and writes sweep.csv."""
    if series is None:
        series = prepare_series(config)
    coverages = coverages if coverages is not None else config.resolved_coverages()
    sweep_rows: list[dict] = []
    for coverage in coverages:
        sub = replace(
            config,
            coverages=(coverage,),
            out_dir=Path(config.out_dir) / f"coverage_{coverage:g}",
        )
        rows, _, failures = run_experiment(sub, series=series, write=write)
        for r in rows:
            if r.station == "Overall":
                sweep_rows.append(
                    {
                        "coverage": coverage,
                        "lead_time": r.lead_time,
                        "retriever": r.retriever,
                        "strategy": r.strategy,
                        "mae": r.mae,
                    }
                )
        for f in failures:
            sweep_rows.append(
                {
                    "coverage": coverage,
                    "lead_time": f.get("lead_time"),
                    "retriever": f.get("retriever", "?"),
                    "strategy": f.get("strategy", "?"),
                    "mae": float("nan"),
                }
            )
    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "sweep.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["coverage", "lead_time", "retriever", "strategy", "mae"])
            for row in sweep_rows:
                writer.writerow(
                    [
                        format(row["coverage"], "g"),
                        row["lead_time"],
                        row["retriever"],
                        row["strategy"],
                        format(row["mae"], ".9g"),
                    ]
                )
    return sweep_rows


def available_slices(archive: dict) -> list[tuple[str, int]]:
    stations = archive["meta"]["stations"]
    leads = sorted({c["lead_time"] for c in archive["cells"]})
    return [(s, h) for s in stations for h in leads]


def emit_trajectories(
    archive: dict,
    station: str,
    horizon: int,
    out_path: str | Path,
    plot: bool = False,
) -> Path:
    """CSV of (date, truth, one prediction column per method) at the final
    forecast step for the given station and lead time."""
    meta = archive["meta"]
    stations = meta["stations"]
    cells = [c for c in archive["cells"] if c["lead_time"] == horizon]
    if station not in stations or not cells:
        raise ValueError(
            f"no archived slice for station={station!r}, horizon={horizon}; "
            f"available: {available_slices(archive)}"
        )
    pos = stations.index(station)
    dates = meta["dates"]

    methods = {}
    truth_by_origin: dict[int, float] = {}
    for cell in cells:
        label = (
            f"{cell['retriever']}/{cell['strategy']}/{cell['forecaster']}"
            f"@cov{cell['coverage']:g}"
        )
        series = {}
        for sample in cell["samples"]:
            origin = sample["origin"]
            series[origin] = sample["pred"][horizon - 1][pos]
            truth_by_origin[origin] = sample["truth"][horizon - 1][pos]
        methods[label] = series

    labels = sorted(methods)
    origins = sorted(truth_by_origin)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "truth"] + labels)
        for o in origins:
            writer.writerow(
                [
                    dates[o + horizon],
                    format(truth_by_origin[o], ".17g"),
                ]
                + [
                    ""
                    if o not in methods[lab]
                    else format(methods[lab][o], ".17g")
                    for lab in labels
                ]
            )
    if plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(10, 4))
        xs = [dates[o + horizon] for o in origins]
        ax.plot(xs, [truth_by_origin[o] for o in origins], "k-", label="truth")
        for lab in labels:
            ax.plot(xs, [methods[lab].get(o) for o in origins], label=lab)
        ax.set_title(f"{station}, lead {horizon} days")
        ax.legend(fontsize=6)
        step = max(1, len(xs) // 8)
        ax.set_xticks(xs[::step])
        fig.autofmt_xdate()
        fig.tight_layout()
        fig.savefig(out_path.with_suffix(".png"), dpi=120)
        plt.close(fig)
    return out_path
