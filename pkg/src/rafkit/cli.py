"""Command-line interface.

Subcommands: ingest, build-kb, retrieve, forecast, evaluate, sweep-pool,
trajectories. Every flag mirrors a config key and wins over the file; the
config file may also be supplied via $RAF_CONFIG.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import apply_cli_overrides, config_from_env_or_flag
from .forecast import PipelineConfig, make_forecaster, run_raf_pipeline
from .harness import emit_trajectories, prepare_series, run_experiment, sweep_pool_size
from .kb import build_kb_and_test, restrict_pool, save_kb
from .retrieval import Retriever
from .synthetic import write_series_csv


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="config file (or set RAF_CONFIG)")
    parser.add_argument("--lookback", type=int)
    parser.add_argument("--horizons", help="comma-separated, e.g. 7,14,21,28")
    parser.add_argument("--retriever", choices=["sim", "mi"])
    parser.add_argument("--strategy", choices=["a", "b", "c"])
    parser.add_argument("--top-k", dest="top_k", type=int)
    parser.add_argument(
        "--forecaster", choices=["persistence", "seasonal", "ar", "external"]
    )
    parser.add_argument("--endpoint", help="URL or exec:CMD for external models")
    parser.add_argument("--coverage", type=float)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int)


def _load(args):
    cfg = config_from_env_or_flag(args.config)
    return apply_cli_overrides(cfg, args)


def _single_horizon(cfg) -> int:
    return cfg.horizons[0]


def cmd_ingest(args) -> int:
    cfg = _load(args)
    series = prepare_series(cfg)
    first, last = series.dates[0], series.dates[-1]
    print(f"rows: {series.length}  columns: {series.width}")
    print(f"span: {first} .. {last}")
    print(f"targets: {', '.join(series.target_names)}")
    if args.out:
        out = Path(args.out) / "clean.csv"
        write_series_csv(series, out)
        print(f"wrote {out}")
    return 0


def cmd_build_kb(args) -> int:
    cfg = _load(args)
    series = prepare_series(cfg)
    out = Path(args.out) if args.out else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    for h in cfg.horizons:
        kb, test = build_kb_and_test(
            series, cfg.lookback, h, cfg.train_fraction, cfg.stride
        )
        for coverage in cfg.resolved_coverages():
            kb_c = restrict_pool(kb, coverage, cfg.train_fraction, cfg.pool_keep)
            path = out / f"kb_h{h}_cov{coverage:g}.rafkb"
            save_kb(kb_c, path)
            print(f"{path}: {len(kb_c)} samples (test set: {len(test)})")
    return 0


def _query_for(cfg, series, horizon, origin):
    kb, test = build_kb_and_test(
        series, cfg.lookback, horizon, cfg.train_fraction, cfg.stride
    )
    coverage = cfg.resolved_coverages()[0]
    kb = restrict_pool(kb, coverage, cfg.train_fraction, cfg.pool_keep)
    by_origin = {p.origin: p for p in test.samples}
    if origin is None:
        origin = test.samples[0].origin
    if origin not in by_origin:
        raise SystemExit(
            f"origin {origin} not in the test set "
            f"(origins {test.samples[0].origin}..{test.samples[-1].origin})"
        )
    return kb, by_origin[origin]


def cmd_retrieve(args) -> int:
    cfg = _load(args)
    series = prepare_series(cfg)
    h = _single_horizon(cfg)
    kb, query = _query_for(cfg, series, h, args.origin)
    retriever = Retriever(kb, cfg.retrievers[0], k_emb=cfg.k_emb, bins=cfg.bins)
    contexts = retriever.retrieve(query.lookback, cfg.top_k)
    print(f"query origin {query.origin} ({series.dates[query.origin]}), "
          f"retriever {contexts.retriever_id}, k={contexts.k}")
    for rank, (pair, score) in enumerate(contexts.entries, start=1):
        first = series.dates[pair.origin - pair.l + 1]
        last = series.dates[pair.origin]
        print(f"  #{rank}: origin {pair.origin}  [{first} .. {last}]  score {score:.6g}")
    return 0


def cmd_forecast(args) -> int:
    cfg = _load(args)
    series = prepare_series(cfg)
    h = _single_horizon(cfg)
    kb, query = _query_for(cfg, series, h, args.origin)
    pcfg = PipelineConfig(
        target_indices=series.target_indices,
        forecaster=make_forecaster(cfg.forecaster),
        forecaster_label=cfg.forecaster.label(),
        retriever=cfg.retrievers[0],
        strategy=cfg.strategies[0],
        k=cfg.top_k,
        k_emb=cfg.k_emb,
        bins=cfg.bins,
        max_rows=cfg.forecaster.max_rows,
    )
    result = run_raf_pipeline(kb, query, pcfg)
    header = "date," + ",".join(series.target_names)
    lines = [header]
    for i in range(h):
        day = series.dates[query.origin + 1 + i]
        cells = ",".join(format(x, ".9g") for x in result.values[i])
        lines.append(f"{day},{cells}")
    text = "\n".join(lines)
    if args.out:
        out = Path(args.out) / f"forecast_origin{query.origin}_h{h}.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
        print(f"wrote {out}")
    else:
        print(text)
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load(args)
    rows, _, failures = run_experiment(cfg)
    print(f"wrote {cfg.out_dir / 'report.csv'} ({len(rows)} rows)")
    for r in rows:
        if r.station == "Overall":
            sedi_text = "-" if r.sedi is None else f"{r.sedi:.3f}"
            print(
                f"  h={r.lead_time:>2} cov={r.coverage:g} {r.retriever}/{r.strategy}: "
                f"MAE {r.mae:.4f}  RMSE {r.rmse:.4f}  SEDI {sedi_text}"
            )
    if failures:
        print(f"FAILED cells: {json.dumps(failures)}", file=sys.stderr)
        return 1
    return 0


def cmd_sweep_pool(args) -> int:
    cfg = _load(args)
    coverages = None
    if args.coverages:
        coverages = tuple(float(c) for c in args.coverages.split(","))
    rows = sweep_pool_size(cfg, coverages)
    print(f"wrote {cfg.out_dir / 'sweep.csv'}")
    for row in rows:
        print(
            f"  cov={row['coverage']:g} h={row['lead_time']} "
            f"{row['retriever']}/{row['strategy']}: MAE {row['mae']:.4f}"
        )
    return 0


def cmd_trajectories(args) -> int:
    cfg = _load(args)
    archive_path = Path(args.archive) if args.archive else cfg.out_dir / "archive.json"
    archive = json.loads(archive_path.read_text(encoding="utf-8"))
    out = Path(args.out) if args.out else cfg.out_dir
    h = int(args.horizon)
    path = emit_trajectories(
        archive, args.station, h, out / f"trajectory_{args.station}_h{h}.csv",
        plot=args.plot,
    )
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rafkit",
        description="Retrieval-augmented forecasting toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, datum-adjust and gap-fill the CSV")
    _add_common(p)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("build-kb", help="build and serialize retrieval pools")
    _add_common(p)
    p.set_defaults(fn=cmd_build_kb)

    p = sub.add_parser("retrieve", help="inspect one query's context set")
    _add_common(p)
    p.add_argument("--origin", type=int, help="query origin (default: first test sample)")
    p.set_defaults(fn=cmd_retrieve)

    p = sub.add_parser("forecast", help="forecast a single query")
    _add_common(p)
    p.add_argument("--origin", type=int)
    p.set_defaults(fn=cmd_forecast)

    p = sub.add_parser("evaluate", help="run the full evaluation grid")
    _add_common(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("sweep-pool", help="MAE vs retrieval pool size")
    _add_common(p)
    p.add_argument("--coverages", help="comma-separated, e.g. 0,0.25,0.45,0.65,0.85")
    p.set_defaults(fn=cmd_sweep_pool)

    p = sub.add_parser("trajectories", help="truth vs prediction series for one station")
    _add_common(p)
    p.add_argument("--station", required=True)
    p.add_argument("--horizon", required=True, type=int)
    p.add_argument("--archive", help="archive.json path (default: out_dir/archive.json)")
    p.add_argument("--plot", action="store_true", help="also render a PNG")
    p.set_defaults(fn=cmd_trajectories)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
