"""Combine retrieved context pairs with the query lookback.

Three schemes: average the contexts then prepend (A), prepend each context
separately and average the resulting forecasts downstream (B), or
concatenate every context in ranked order (C). In all of them the query
lookback stays untouched as the trailing rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .retrieval import ContextSet
from .series import WindowPair

CONTEXT_LOOKBACK = "context-lookback"
CONTEXT_FUTURE = "context-future"
QUERY_LOOKBACK = "query-lookback"


@dataclass(frozen=True)
class AugmentedInput:
    """Forecaster input matrix with labelled row spans; the final segment is
    always the unmodified query lookback."""

    matrix: np.ndarray
    segments: tuple[tuple[str, tuple[int, int]], ...]
    strategy: str

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "segments", tuple(self.segments))
        cursor = 0
        for label, (start, stop) in self.segments:
            if start != cursor or stop <= start:
                raise ValueError(f"segments do not partition rows: {self.segments}")
            cursor = stop
        if cursor != matrix.shape[0]:
            raise ValueError(
                f"segments cover {cursor} rows but matrix has {matrix.shape[0]}"
            )
        if self.segments[-1][0] != QUERY_LOOKBACK:
            raise ValueError("final segment must be the query lookback")


def flatten_context(pair: WindowPair) -> np.ndarray:
    """Temporal concatenation [lookback; future], all columns kept."""
    return np.vstack([pair.lookback, pair.future])


def _flatten_all(contexts: ContextSet, query: np.ndarray) -> list[np.ndarray]:
    if len(contexts) == 0:
        raise ValueError("context set is empty")
    mats = [flatten_context(p) for p in contexts.pairs]
    shape = mats[0].shape
    for mat in mats[1:]:
        if mat.shape != shape:
            raise ValueError(
                f"inconsistent context shapes: {shape} vs {mat.shape}"
            )
    if query.ndim != 2 or query.shape[1] != shape[1]:
        raise ValueError(
            f"query shape {query.shape} incompatible with context width {shape[1]}"
        )
    return mats


def _with_context_segments(
    parts: list[np.ndarray], pair_l: int, pair_h: int, query_rows: int, strategy: str
) -> AugmentedInput:
    segments = []
    row = 0
    for _ in range(len(parts) - 1):
        segments.append((CONTEXT_LOOKBACK, (row, row + pair_l)))
        segments.append((CONTEXT_FUTURE, (row + pair_l, row + pair_l + pair_h)))
        row += pair_l + pair_h
    segments.append((QUERY_LOOKBACK, (row, row + query_rows)))
    return AugmentedInput(np.vstack(parts), tuple(segments), strategy)


def augment_strategy_a(contexts: ContextSet, query: np.ndarray) -> AugmentedInput:
    """Pointwise mean of the flattened contexts, prepended to the query."""
    query = np.asarray(query, dtype=float)
    mats = _flatten_all(contexts, query)
    mean = np.mean(np.stack(mats), axis=0)
    pair = contexts.pairs[0]
    return _with_context_segments([mean, query], pair.l, pair.h, query.shape[0], "A")


def augment_strategy_b(
    contexts: ContextSet, query: np.ndarray
) -> list[AugmentedInput]:
    """One input per context, [flatten(context); query]; the k forecasts are
    averaged pointwise downstream."""
    query = np.asarray(query, dtype=float)
    mats = _flatten_all(contexts, query)
    pair = contexts.pairs[0]
    return [
        _with_context_segments([mat, query], pair.l, pair.h, query.shape[0], "B")
        for mat in mats
    ]


def augment_strategy_c(
    contexts: ContextSet, query: np.ndarray, max_rows: int | None = None
) -> AugmentedInput:
    """All contexts concatenated in ranked order (best first) before the
    query. When max_rows would be exceeded, worst-ranked contexts are
    dropped first; the query always stays."""
    query = np.asarray(query, dtype=float)
    mats = _flatten_all(contexts, query)
    query_rows = query.shape[0]
    if max_rows is not None and max_rows < query_rows:
        raise ValueError(
            f"max_rows={max_rows} smaller than the query's {query_rows} rows"
        )
    keep = len(mats)
    if max_rows is not None:
        per_context = mats[0].shape[0]
        while keep > 0 and keep * per_context + query_rows > max_rows:
            keep -= 1
    pair = contexts.pairs[0]
    return _with_context_segments(
        mats[:keep] + [query], pair.l, pair.h, query_rows, "C"
    )
