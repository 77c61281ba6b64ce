"""Retrieval pool and test set construction via chronological splitting.

The base holds every sliding (lookback, future) pair whose full extent lies
inside the training span; test pairs forecast strictly post-boundary rows
while their lookbacks may reach back into the training tail.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .series import MultivariateSeries, WindowPair

KB_MAGIC = b"RAFKB1"


@dataclass(frozen=True)
class KnowledgeBase:
    samples: tuple[WindowPair, ...]
    l: int
    h: int
    width: int
    source_span: tuple[date, date]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        prev = None
        for s in self.samples:
            if s.l != self.l or s.h != self.h or s.width != self.width:
                raise ValueError(
                    f"sample at origin {s.origin} has shape ({s.l},{s.h},{s.width}), "
                    f"expected ({self.l},{self.h},{self.width})"
                )
            if prev is not None and s.origin <= prev:
                raise ValueError(f"origins not strictly increasing at {s.origin}")
            prev = s.origin

    def __len__(self) -> int:
        return len(self.samples)

    def lookback_stack(self) -> np.ndarray:
        """All lookbacks as one d x l x m array (d may be 0)."""
        if not self.samples:
            return np.empty((0, self.l, self.width))
        return np.stack([s.lookback for s in self.samples])


@dataclass(frozen=True)
class TestSet:
    samples: tuple[WindowPair, ...]
    l: int
    h: int
    width: int
    source_span: tuple[date, date]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self) -> int:
        return len(self.samples)


def chronological_split(
    series: MultivariateSeries, train_fraction: float
) -> tuple[tuple[int, int], tuple[int, int]]:
    """Return ((0, boundary), (boundary, T)) with boundary = floor(f * T)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train fraction must lie in (0, 1), got {train_fraction}")
    total = series.length
    if total < 2:
        raise ValueError(f"need at least 2 rows to split, got {total}")
    boundary = math.floor(train_fraction * total)
    return (0, boundary), (boundary, total)


def build_pairs(
    values: np.ndarray, l: int, h: int, stride: int = 1, origin_offset: int = 0
) -> list[WindowPair]:
    """Every WindowPair on the span, origins l-1, l-1+stride, ... while the
    future still fits. Stride 1 gives maximally overlapping windows."""
    values = np.asarray(values, dtype=float)
    span = values.shape[0]
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if span < l + h:
        raise ValueError(
            f"span of {span} rows too short for pairs; need at least l+h = {l + h}"
        )
    pairs = []
    for origin in range(l - 1, span - h, stride):
        pairs.append(
            WindowPair(
                values[origin - l + 1 : origin + 1],
                values[origin + 1 : origin + h + 1],
                origin + origin_offset,
            )
        )
    return pairs


def build_kb_and_test(
    series: MultivariateSeries,
    l: int,
    h: int,
    train_fraction: float = 0.85,
    stride: int = 1,
) -> tuple[KnowledgeBase, TestSet]:
    """Split chronologically and materialize the pool and the test set.

    Origins are absolute indices into ``series``. Test lookbacks may use the
    last l-1 training rows; test futures start at the boundary or later, so
    no test target row ever appears in the pool.
    """
    (_, boundary), (_, total) = chronological_split(series, train_fraction)
    if boundary < l + h:
        raise ValueError(
            f"training span of {boundary} rows cannot hold one l+h = {l + h} pair"
        )
    if total - boundary < h:
        raise ValueError(
            f"test span of {total - boundary} rows shorter than horizon {h}"
        )
    base_pairs = build_pairs(series.values[:boundary], l, h, stride)
    kb = KnowledgeBase(
        tuple(base_pairs),
        l,
        h,
        series.width,
        (series.dates[0], series.dates[boundary - 1]),
    )
    test_pairs = build_pairs(
        series.values[boundary - l :], l, h, 1, origin_offset=boundary - l
    )
    test = TestSet(
        tuple(test_pairs),
        l,
        h,
        series.width,
        (series.dates[boundary - l], series.dates[-1]),
    )
    return kb, test


def restrict_pool(
    kb: KnowledgeBase,
    coverage: float,
    train_fraction: float = 0.85,
    keep: str = "recent",
) -> KnowledgeBase:
    """Shrink the pool to ceil(d * coverage / train_fraction) samples.

    ``coverage`` is a fraction of the whole dataset, so coverage equal to
    the train fraction keeps everything and 0 empties the pool. ``keep``
    selects which end survives: "recent" (default) or "oldest".
    """
    if coverage < 0.0 or coverage > train_fraction + 1e-12:
        raise ValueError(
            f"coverage {coverage} outside [0, train_fraction={train_fraction}]"
        )
    if keep not in ("recent", "oldest"):
        raise ValueError(f"keep must be 'recent' or 'oldest', got {keep!r}")
    count = min(len(kb), math.ceil(len(kb) * coverage / train_fraction))
    kept = kb.samples[-count:] if keep == "recent" else kb.samples[:count]
    if count == 0:
        kept = ()
    return KnowledgeBase(kept, kb.l, kb.h, kb.width, kb.source_span)


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    """Binary snapshot: magic, (l, h, m, d) header, span ordinals, origins,
    then per-sample row-major float64 lookback+future blocks."""
    path = Path(path)
    d = len(kb)
    with path.open("wb") as fh:
        fh.write(KB_MAGIC)
        fh.write(struct.pack("<4I", kb.l, kb.h, kb.width, d))
        fh.write(
            struct.pack("<2q", kb.source_span[0].toordinal(), kb.source_span[1].toordinal())
        )
        fh.write(struct.pack(f"<{d}q", *(s.origin for s in kb.samples)))
        for s in kb.samples:
            fh.write(np.ascontiguousarray(s.lookback).tobytes())
            fh.write(np.ascontiguousarray(s.future).tobytes())


def load_kb(path: str | Path) -> KnowledgeBase:
    path = Path(path)
    blob = path.read_bytes()
    if blob[: len(KB_MAGIC)] != KB_MAGIC:
        raise ValueError(f"{path}: not a {KB_MAGIC.decode()} file")
    off = len(KB_MAGIC)
    l, h, m, d = struct.unpack_from("<4I", blob, off)
    off += struct.calcsize("<4I")
    first_ord, last_ord = struct.unpack_from("<2q", blob, off)
    off += struct.calcsize("<2q")
    origins = struct.unpack_from(f"<{d}q", blob, off)
    off += struct.calcsize(f"<{d}q")
    block = (l + h) * m
    data = np.frombuffer(blob, dtype="<f8", count=d * block, offset=off)
    data = data.reshape(d, l + h, m)
    samples = tuple(
        WindowPair(data[i, :l], data[i, l:], origins[i]) for i in range(d)
    )
    span = (date.fromordinal(first_ord), date.fromordinal(last_ord))
    return KnowledgeBase(samples, l, h, m, span)
