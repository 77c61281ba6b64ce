"""Core containers for daily multivariate series and lookback/future windows.

Everything here is immutable after construction and safe to share across
threads; the operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

ONE_DAY = timedelta(days=1)


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Variable:
    """Named series column with a physical unit (ft, cfs, inches, mm, ...)."""

    name: str
    unit: str = ""


@dataclass(frozen=True)
class MultivariateSeries:
    """T x m matrix of daily observations on a uniform calendar grid.

    ``target_indices`` mark the columns that are forecast targets (the
    water-level stations); the remaining columns are covariates.
    """

    dates: tuple[date, ...]
    values: np.ndarray
    variables: tuple[Variable, ...]
    target_indices: tuple[int, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        dates = tuple(self.dates)
        if len(dates) != values.shape[0]:
            raise ValueError(
                f"{len(dates)} dates but {values.shape[0]} value rows"
            )
        for prev, cur in zip(dates, dates[1:]):
            if cur - prev != ONE_DAY:
                raise ValueError(
                    f"dates must increase in 1-day steps; {prev} -> {cur}"
                )
        variables = tuple(self.variables)
        if len(variables) != values.shape[1]:
            raise ValueError(
                f"{len(variables)} variable descriptors but "
                f"{values.shape[1]} columns"
            )
        targets = tuple(int(i) for i in self.target_indices)
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate target indices: {targets}")
        for i in targets:
            if not 0 <= i < values.shape[1]:
                raise ValueError(
                    f"target index {i} out of range for {values.shape[1]} columns"
                )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "target_indices", targets)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(self.variables[i].name for i in self.target_indices)

    def with_values(self, values: np.ndarray) -> "MultivariateSeries":
        """Same grid and descriptors, new value matrix."""
        return MultivariateSeries(self.dates, values, self.variables, self.target_indices)


@dataclass(frozen=True)
class WindowPair:
    """One (lookback, future) sample.

    ``origin`` is the index of the last lookback row in the source series,
    so the pair covers source rows [origin - l + 1, origin + h].
    """

    lookback: np.ndarray
    future: np.ndarray
    origin: int

    def __post_init__(self):
        lookback = _frozen_array(self.lookback)
        future = _frozen_array(self.future)
        if lookback.ndim != 2 or future.ndim != 2:
            raise ValueError("lookback and future must be 2-D matrices")
        if lookback.shape[1] != future.shape[1]:
            raise ValueError(
                f"column mismatch: lookback {lookback.shape[1]}, future {future.shape[1]}"
            )
        object.__setattr__(self, "lookback", lookback)
        object.__setattr__(self, "future", future)
        object.__setattr__(self, "origin", int(self.origin))

    @property
    def l(self) -> int:
        return self.lookback.shape[0]

    @property
    def h(self) -> int:
        return self.future.shape[0]

    @property
    def width(self) -> int:
        return self.lookback.shape[1]


def window_at(series: MultivariateSeries, origin: int, l: int, h: int) -> WindowPair:
    """Slice the pair with lookback rows [origin-l+1, origin] and future rows
    [origin+1, origin+h]."""
    total = series.length
    if l < 1 or h < 1:
        raise ValueError(f"window lengths must be positive, got l={l}, h={h}")
    if origin - l + 1 < 0 or origin + h > total - 1:
        raise ValueError(
            f"window out of range: origin={origin}, l={l}, h={h}, T={total}"
        )
    lookback = series.values[origin - l + 1 : origin + 1]
    future = series.values[origin + 1 : origin + h + 1]
    return WindowPair(lookback, future, origin)


def zscore_window(window: np.ndarray) -> np.ndarray:
    """Standardize each column to mean 0, population std 1 (divisor l).

    Columns with zero standard deviation map to all-zeros.
    """
    w = np.asarray(window, dtype=float)
    if w.ndim != 2 or w.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D window, got shape {w.shape}")
    centered = w - w.mean(axis=0)
    # compensated second pass: for near-constant columns at large offsets
    # the one-pass mean rounds at the data scale, which would leave the
    # z-scores visibly biased
    centered -= centered.mean(axis=0)
    # rescale before squaring so tiny/huge columns don't under/overflow
    scale = np.abs(centered).max(axis=0)
    scale = np.where(scale > 0.0, scale, 1.0)
    std = scale * np.sqrt(((centered / scale) ** 2).mean(axis=0))
    constant = (w == w[0:1]).all(axis=0) | (std == 0.0)
    safe = np.where(constant, 1.0, std)
    z = centered / safe
    z[:, constant] = 0.0
    return z
