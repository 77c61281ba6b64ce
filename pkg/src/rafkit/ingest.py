"""CSV ingestion: parse, datum-correct, align to a daily grid, fill gaps.

The expected file is UTF-8, comma-separated, header row first, one date
column (ISO-8601 by default) and real-valued variable columns where an
empty cell means missing. Dates absent from the file are inserted as
missing rows so the output always sits on a uniform daily grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Mapping

import numpy as np

from .series import MultivariateSeries, Variable


@dataclass(frozen=True)
class DatumAdjustment:
    """Additive offset (ft) converting a water-level column between
    vertical reference systems."""

    variable_name: str
    offset: float


@dataclass
class IngestConfig:
    csv_path: str | Path
    date_column: str = "date"
    date_format: str = "%Y-%m-%d"
    adjustments: tuple[DatumAdjustment, ...] = ()
    target_station_names: tuple[str, ...] = ()
    units: Mapping[str, str] = field(default_factory=dict)


def load_csv(config: IngestConfig) -> MultivariateSeries:
    """Read the CSV onto a uniform daily grid; unobserved cells become NaN.

    Raises ValueError with the offending file line for malformed dates,
    non-numeric cells, and duplicate dates.
    """
    path = Path(config.csv_path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [name.strip() for name in header]
        if config.date_column not in header:
            raise ValueError(
                f"{path}: date column {config.date_column!r} not in header {header}"
            )
        date_pos = header.index(config.date_column)
        names = [name for i, name in enumerate(header) if i != date_pos]

        rows: dict = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}"
                )
            raw_date = row[date_pos].strip()
            try:
                day = datetime.strptime(raw_date, config.date_format).date()
            except ValueError:
                raise ValueError(
                    f"{path}:{line_no}: cannot parse date {raw_date!r} "
                    f"with format {config.date_format!r}"
                ) from None
            if day in rows:
                raise ValueError(f"{path}:{line_no}: duplicate date {day}")
            cells = [cell for i, cell in enumerate(row) if i != date_pos]
            parsed = np.empty(len(cells))
            for j, cell in enumerate(cells):
                text = cell.strip()
                if not text:
                    parsed[j] = np.nan
                    continue
                try:
                    parsed[j] = float(text)
                except ValueError:
                    raise ValueError(
                        f"{path}:{line_no}: non-numeric value {cell!r} "
                        f"in column {names[j]!r}"
                    ) from None
            rows[day] = parsed

    if not rows:
        raise ValueError(f"{path}: no data rows")

    first, last = min(rows), max(rows)
    n_days = (last - first).days + 1
    values = np.full((n_days, len(names)), np.nan)
    for day, parsed in rows.items():
        values[(day - first).days] = parsed
    dates = tuple(first + timedelta(days=i) for i in range(n_days))

    variables = tuple(Variable(name, config.units.get(name, "")) for name in names)
    targets = []
    for station in config.target_station_names:
        if station not in names:
            raise ValueError(
                f"target station {station!r} not among columns {names}"
            )
        targets.append(names.index(station))
    return MultivariateSeries(dates, values, variables, tuple(targets))


def apply_datum_adjustments(
    series: MultivariateSeries, adjustments: tuple[DatumAdjustment, ...]
) -> MultivariateSeries:
    """Add each adjustment's offset to every entry of its named column."""
    names = list(series.variable_names)
    values = series.values.copy()
    for adj in adjustments:
        if adj.variable_name not in names:
            raise ValueError(
                f"unknown column {adj.variable_name!r}; known columns: {names}"
            )
        values[:, names.index(adj.variable_name)] += adj.offset
    return series.with_values(values)


def interpolate_gaps(series: MultivariateSeries) -> MultivariateSeries:
    """Fill NaN runs: linear between observations on the date axis, backward
    fill before the first observation, forward fill after the last."""
    values = series.values.copy()
    t = np.arange(series.length, dtype=float)
    for col in range(series.width):
        observed = ~np.isnan(values[:, col])
        if not observed.any():
            name = series.variables[col].name
            raise ValueError(f"column {name!r} has no observed values")
        if observed.all():
            continue
        values[:, col] = np.interp(t, t[observed], values[observed, col])
    return series.with_values(values)


def ingest(config: IngestConfig) -> MultivariateSeries:
    """Full preprocessing: load, datum-adjust, interpolate."""
    series = load_csv(config)
    series = apply_datum_adjustments(series, tuple(config.adjustments))
    return interpolate_gaps(series)
