"""Evaluation metrics: MAE, RMSE, SEDI for extremes, station correlations.

SEDI classifies each value as low-extreme (strictly below the low
threshold), high-extreme (strictly above the high threshold), or normal,
and reports the fraction of true extremes the forecast also flags on the
same side. A slice with no true extremes has no defined SEDI and is
reported as absent, never as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import MultivariateSeries


def _paired(truth, pred) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(truth, dtype=float).ravel()
    p = np.asarray(pred, dtype=float).ravel()
    if t.size == 0:
        raise ValueError("empty inputs")
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: truth {t.size}, pred {p.size}")
    return t, p


def mae(truth, pred) -> float:
    t, p = _paired(truth, pred)
    return float(np.mean(np.abs(t - p)))


def rmse(truth, pred) -> float:
    t, p = _paired(truth, pred)
    return float(np.sqrt(np.mean((t - p) ** 2)))


@dataclass(frozen=True)
class SediThresholds:
    y_low: float
    y_up: float
    p_low: float
    p_up: float


def sedi_thresholds(truth, p_low: float = 0.1, p_up: float = 0.9) -> SediThresholds:
    """Empirical quantile thresholds, linear interpolation between order
    statistics (position (N-1)*p)."""
    t = np.asarray(truth, dtype=float).ravel()
    if t.size < 10:
        raise ValueError(f"need at least 10 samples for thresholds, got {t.size}")
    if not 0.0 < p_low < p_up < 1.0:
        raise ValueError(f"need 0 < p_low < p_up < 1, got ({p_low}, {p_up})")
    y_low = float(np.quantile(t, p_low, method="linear"))
    y_up = float(np.quantile(t, p_up, method="linear"))
    return SediThresholds(y_low, y_up, p_low, p_up)


def sedi(truth, pred, thresholds: SediThresholds) -> float | None:
    """Joint-extreme count over true-extreme count, strict inequalities on
    both sides. Returns None when the truth has no extremes at all."""
    t, p = _paired(truth, pred)
    true_low = t < thresholds.y_low
    true_up = t > thresholds.y_up
    denom = int(true_low.sum() + true_up.sum())
    if denom == 0:
        return None
    joint = int(
        ((p < thresholds.y_low) & true_low).sum()
        + ((p > thresholds.y_up) & true_up).sum()
    )
    return joint / denom


def correlation_matrix(series: MultivariateSeries, columns) -> np.ndarray:
    """Pairwise Pearson coefficients. Diagonal is exactly 1; any constant
    column gets NaN across its whole row and column (correlation with a
    constant is undefined)."""
    cols = list(columns)
    if series.length < 2:
        raise ValueError("need at least 2 rows")
    for c in cols:
        if not 0 <= c < series.width:
            raise ValueError(f"column {c} out of range")
    x = series.values[:, cols]
    centered = x - x.mean(axis=0)
    std = x.std(axis=0)
    n = len(cols)
    out = np.full((n, n), np.nan)
    for i in range(n):
        if std[i] == 0.0:
            continue
        out[i, i] = 1.0
        for j in range(i + 1, n):
            if std[j] == 0.0:
                continue
            r = float(
                np.mean(centered[:, i] * centered[:, j]) / (std[i] * std[j])
            )
            out[i, j] = out[j, i] = r
    return out


@dataclass(frozen=True)
class MetricRow:
    station: str
    lead_time: int
    retriever: str
    strategy: str
    forecaster: str
    coverage: float
    mae: float
    rmse: float
    sedi: float | None
    n_samples: int


def overall_row(rows: list[MetricRow]) -> MetricRow:
    """Unweighted mean across stations; SEDI averages the defined values
    only (absent if none are defined)."""
    if not rows:
        raise ValueError("no station rows to aggregate")
    first = rows[0]
    sedis = [r.sedi for r in rows if r.sedi is not None]
    return MetricRow(
        station="Overall",
        lead_time=first.lead_time,
        retriever=first.retriever,
        strategy=first.strategy,
        forecaster=first.forecaster,
        coverage=first.coverage,
        mae=float(np.mean([r.mae for r in rows])),
        rmse=float(np.mean([r.rmse for r in rows])),
        sedi=float(np.mean(sedis)) if sedis else None,
        n_samples=first.n_samples,
    )
