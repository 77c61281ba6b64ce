"""Seeded synthetic benchmark: seasonal sinusoids with recurring anomaly
episodes.

The generated series mimics the benchmark setting this project targets:
daily multivariate records where most variation is smooth and seasonal,
punctuated by 30-day anomaly episodes drawn from a small set of templates.
Episodes recur throughout the whole span, so analogous historical windows
exist for every test query.
"""

from __future__ import annotations

from datetime import date
from pathlib import Path

import numpy as np

from .series import MultivariateSeries, Variable

TEMPLATE_LENGTH = 30
N_TEMPLATES = 3


def episode_templates(length: int = TEMPLATE_LENGTH) -> np.ndarray:
    """Three unit-amplitude 30-day episode shapes: a smooth surge, a slow
    ramp with sharp release, and a damped oscillation."""
    u = np.linspace(0.0, 1.0, length)
    surge = np.sin(np.pi * u) ** 2
    ramp = np.where(u < 0.75, u / 0.75, (1.0 - u) / 0.25)
    oscillation = np.sin(3.0 * 2.0 * np.pi * u) * np.sin(np.pi * u)
    return np.stack([surge, ramp, oscillation])


def seasonal_anomaly_series(
    days: int = 1538,
    variables: int = 8,
    seed: int = 7,
    *,
    n_targets: int = 3,
    start: date = date(2020, 10, 16),
    episode_amplitude: float = 1.6,
    episode_gap: tuple[int, int] = (18, 40),
    noise: float = 0.25,
) -> MultivariateSeries:
    """Deterministic benchmark series: per-variable annual plus ~2-month
    sinusoids, recurring cross-variable anomaly episodes cycling through
    the three templates, and white observation noise."""
    if variables < n_targets:
        raise ValueError(f"{variables} variables cannot host {n_targets} targets")
    rng = np.random.default_rng(seed)
    t = np.arange(days, dtype=float)
    values = np.empty((days, variables))
    for v in range(variables):
        offset = rng.uniform(3.0, 8.0)
        annual_amp = rng.uniform(0.6, 1.2)
        meso_amp = rng.uniform(0.25, 0.5)
        annual_phase = rng.uniform(0.0, 365.0)
        meso_phase = rng.uniform(0.0, 61.0)
        values[:, v] = (
            offset
            + annual_amp * np.sin(2.0 * np.pi * (t + annual_phase) / 365.0)
            + meso_amp * np.sin(2.0 * np.pi * (t + meso_phase) / 61.0)
        )

    templates = episode_templates()
    loadings = rng.uniform(0.5, 1.5, size=(N_TEMPLATES, variables))
    pos = int(rng.integers(10, 40))
    episode = 0
    while pos + TEMPLATE_LENGTH < days:
        tpl = episode % N_TEMPLATES
        amp = episode_amplitude * rng.uniform(0.85, 1.15)
        values[pos : pos + TEMPLATE_LENGTH] += (
            amp * templates[tpl][:, None] * loadings[tpl][None, :]
        )
        pos += TEMPLATE_LENGTH + int(rng.integers(episode_gap[0], episode_gap[1]))
        episode += 1

    values += rng.normal(0.0, noise, size=(days, variables))

    names = [f"WL{i + 1}" for i in range(n_targets)]
    units = ["ft"] * n_targets
    covariate_pool = [
        ("FLOW1", "cfs"),
        ("RAIN1", "inches"),
        ("PET1", "mm"),
        ("FLOW2", "cfs"),
        ("WL_AUX1", "ft"),
        ("WL_AUX2", "ft"),
        ("RAIN2", "inches"),
    ]
    for i in range(variables - n_targets):
        name, unit = covariate_pool[i % len(covariate_pool)]
        if i >= len(covariate_pool):
            name = f"{name}_{i}"
        names.append(name)
        units.append(unit)
    dates = tuple(
        date.fromordinal(start.toordinal() + i) for i in range(days)
    )
    series = MultivariateSeries(
        dates,
        values,
        tuple(Variable(n, u) for n, u in zip(names, units)),
        tuple(range(n_targets)),
    )
    return series


def write_series_csv(series: MultivariateSeries, path: str | Path) -> Path:
    """Round-trip-faithful CSV: ISO dates, 17-significant-digit floats,
    empty cell for NaN."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("date," + ",".join(series.variable_names) + "\n")
        for i, day in enumerate(series.dates):
            cells = [
                "" if np.isnan(x) else format(x, ".17g") for x in series.values[i]
            ]
            fh.write(day.isoformat() + "," + ",".join(cells) + "\n")
    return path


def write_benchmark_csv(path: str | Path, seed: int = 7) -> Path:
    """Generate the canonical 1538-day, 8-variable benchmark file."""
    return write_series_csv(seasonal_anomaly_series(seed=seed), path)
