"""Experiment configuration: dataclass defaults, YAML file loading, CLI
override merging. Flags win over file values; the file may also be named
via the RAF_CONFIG environment variable."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .forecast import ForecasterSpec
from .ingest import DatumAdjustment, IngestConfig

RETRIEVER_ALIASES = {
    "sim": "similarity",
    "similarity": "similarity",
    "mi": "mutual-information",
    "mutual-information": "mutual-information",
}
STRATEGY_ALIASES = {"a": "A", "b": "B", "c": "C", "A": "A", "B": "B", "C": "C"}
FORECASTER_ALIASES = {
    "persistence": "persistence",
    "seasonal": "seasonal-naive",
    "seasonal-naive": "seasonal-naive",
    "ar": "autoregressive",
    "autoregressive": "autoregressive",
    "external": "external",
}
DEFAULT_STATIONS = ("NP205", "P33", "G620", "NESRS1", "NESRS2")


@dataclass
class ExperimentConfig:
    ingest: IngestConfig
    lookback: int = 100
    horizons: tuple[int, ...] = (7, 14, 21, 28)
    train_fraction: float = 0.85
    retrievers: tuple[str, ...] = ("similarity", "mutual-information")
    strategies: tuple[str, ...] = ("B",)
    top_k: int = 3
    forecaster: ForecasterSpec = field(default_factory=ForecasterSpec)
    coverages: tuple[float, ...] = ()
    out_dir: Path = Path("results")
    seed: int = 0
    workers: int = 1
    stride: int = 1
    k_emb: int = 512
    bins: int | None = None
    pool_keep: str = "recent"

    def __post_init__(self):
        self.horizons = tuple(int(h) for h in self.horizons)
        self.retrievers = tuple(RETRIEVER_ALIASES[r] for r in self.retrievers)
        self.strategies = tuple(STRATEGY_ALIASES[s] for s in self.strategies)
        self.coverages = tuple(float(c) for c in self.coverages)
        self.out_dir = Path(self.out_dir)
        if self.lookback < 1:
            raise ValueError(f"lookback must be >= 1, got {self.lookback}")
        if any(h < 1 for h in self.horizons):
            raise ValueError(f"horizons must be positive, got {self.horizons}")
        for c in self.coverages:
            if c < 0 or c > self.train_fraction + 1e-12:
                raise ValueError(
                    f"coverage {c} outside [0, train_fraction={self.train_fraction}]"
                )

    def resolved_coverages(self) -> tuple[float, ...]:
        """Default: one run on the full pool."""
        return self.coverages if self.coverages else (self.train_fraction,)


def _parse_adjustments(entries) -> tuple[DatumAdjustment, ...]:
    out = []
    for entry in entries or ():
        out.append(DatumAdjustment(str(entry["variable"]), float(entry["offset"])))
    return tuple(out)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}

    data = raw.get("data", {})
    if "csv_path" not in data:
        raise ValueError(f"{path}: config needs data.csv_path")
    csv_path = Path(data["csv_path"])
    if not csv_path.is_absolute():
        csv_path = path.parent / csv_path
    ingest = IngestConfig(
        csv_path=csv_path,
        date_column=data.get("date_column", "date"),
        date_format=data.get("date_format", "%Y-%m-%d"),
        adjustments=_parse_adjustments(data.get("adjustments")),
        target_station_names=tuple(data.get("targets", DEFAULT_STATIONS)),
        units=dict(data.get("units", {})),
    )

    exp = raw.get("experiment", {})
    retrieval = raw.get("retrieval", {})
    fc = raw.get("forecaster", {})
    spec = ForecasterSpec(
        kind=FORECASTER_ALIASES[fc.get("kind", "persistence")],
        seasonal_period=int(fc.get("period", 7)),
        ar_order=int(fc.get("order", 8)),
        ridge_damping=float(fc.get("damping", 1e-3)),
        endpoint=fc.get("endpoint"),
        max_rows=fc.get("max_rows"),
    )
    out_dir = Path(exp.get("out_dir", "results"))
    if not out_dir.is_absolute():
        out_dir = path.parent / out_dir
    return ExperimentConfig(
        ingest=ingest,
        lookback=int(exp.get("lookback", 100)),
        horizons=tuple(exp.get("horizons", (7, 14, 21, 28))),
        train_fraction=float(exp.get("train_fraction", 0.85)),
        retrievers=tuple(exp.get("retrievers", ("similarity", "mutual-information"))),
        strategies=tuple(exp.get("strategies", ("B",))),
        top_k=int(exp.get("top_k", 3)),
        forecaster=spec,
        coverages=tuple(exp.get("coverages", ())),
        out_dir=out_dir,
        seed=int(exp.get("seed", 0)),
        workers=int(exp.get("workers", 1)),
        stride=int(exp.get("stride", 1)),
        k_emb=int(retrieval.get("k_emb", 512)),
        bins=retrieval.get("bins"),
        pool_keep=str(exp.get("pool_keep", "recent")),
    )


def config_from_env_or_flag(flag_value: str | None) -> ExperimentConfig:
    """Resolve --config, falling back to $RAF_CONFIG."""
    path = flag_value or os.environ.get("RAF_CONFIG")
    if not path:
        raise ValueError(
            "no configuration: pass --config PATH or set RAF_CONFIG"
        )
    return load_config(path)


def apply_cli_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    """Non-None CLI flags replace the corresponding config values."""
    updates = {}
    if getattr(args, "lookback", None) is not None:
        updates["lookback"] = args.lookback
    if getattr(args, "horizons", None) is not None:
        updates["horizons"] = tuple(
            int(h) for h in str(args.horizons).split(",") if h
        )
    if getattr(args, "retriever", None) is not None:
        updates["retrievers"] = (RETRIEVER_ALIASES[args.retriever],)
    if getattr(args, "strategy", None) is not None:
        updates["strategies"] = (STRATEGY_ALIASES[args.strategy],)
    if getattr(args, "top_k", None) is not None:
        updates["top_k"] = args.top_k
    if getattr(args, "coverage", None) is not None:
        updates["coverages"] = (float(args.coverage),)
    if getattr(args, "coverages", None) is not None:
        updates["coverages"] = tuple(
            float(c) for c in str(args.coverages).split(",") if c != ""
        )
    if getattr(args, "out", None) is not None:
        updates["out_dir"] = Path(args.out)
    if getattr(args, "workers", None) is not None:
        updates["workers"] = args.workers
    if getattr(args, "forecaster", None) is not None or getattr(
        args, "endpoint", None
    ) is not None:
        spec = cfg.forecaster
        kind = (
            FORECASTER_ALIASES[args.forecaster]
            if getattr(args, "forecaster", None)
            else spec.kind
        )
        endpoint = getattr(args, "endpoint", None) or spec.endpoint
        updates["forecaster"] = replace(spec, kind=kind, endpoint=endpoint)
    return replace(cfg, **updates) if updates else cfg
