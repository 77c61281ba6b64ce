"""Scoring and ranking of knowledge-base lookbacks against a query window.

Two interchangeable scorers: Euclidean distance between pooled embeddings
(lower is better) and a histogram plug-in mutual-information estimate over
aligned timesteps (higher is better). Candidate scans are exhaustive; the
pool is small enough that no index structure is warranted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kb import KnowledgeBase
from .series import WindowPair, zscore_window


class EmptyPoolError(ValueError):
    """No candidates remain; caller should take the no-retrieval path."""


def sturges_bins(length: int) -> int:
    """Histogram bin count ceil(log2 l) + 1 (8 for l = 100)."""
    if length < 1:
        raise ValueError(f"need at least one sample, got {length}")
    return math.ceil(math.log2(length)) + 1 if length > 1 else 1


@dataclass(frozen=True)
class ScoredCandidate:
    base_index: int
    score: float
    polarity: str  # "higher-is-better" | "lower-is-better"


@dataclass(frozen=True)
class ContextSet:
    """Top-k retrieved pairs, best first, ties broken by ascending origin."""

    entries: tuple[tuple[WindowPair, float], ...]
    retriever_id: str
    k: int
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def pairs(self) -> tuple[WindowPair, ...]:
        return tuple(p for p, _ in self.entries)

    @property
    def scores(self) -> tuple[float, ...]:
        return tuple(s for _, s in self.entries)


@dataclass
class EmbedderSpec:
    kind: str = "builtin-pooled"  # or "external"
    k_emb: int = 512
    endpoint: str | None = None


def embed_builtin(window: np.ndarray, k_emb: int = 512) -> np.ndarray:
    """Deterministic pooled embedding of a lookback window.

    Per column: z-normalize, then average-pool into floor(k_emb / m) equal
    segments (the last segment absorbs remainder rows). Pooled values are
    concatenated column-by-column and zero-padded to exactly k_emb.
    """
    w = np.asarray(window, dtype=float)
    if w.ndim != 2 or w.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D window, got shape {w.shape}")
    rows, cols = w.shape
    segments = k_emb // cols
    if segments < 1:
        raise ValueError(
            f"k_emb={k_emb} too small for {cols} columns; need k_emb >= m"
        )
    segments = min(segments, rows)
    z = zscore_window(w)
    base = rows // segments
    starts = base * np.arange(segments)
    sums = np.add.reduceat(z, starts, axis=0)
    sizes = np.diff(np.append(starts, rows)).astype(float)
    pooled = sums / sizes[:, None]
    out = np.zeros(k_emb)
    out[: cols * segments] = pooled.T.ravel()
    return out


def score_similarity(query_emb: np.ndarray, candidate_emb: np.ndarray) -> float:
    """Euclidean distance between embedding vectors (lower is better)."""
    a = np.asarray(query_emb, dtype=float)
    b = np.asarray(candidate_emb, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"embedding length mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _entropy_from_counts(counts: np.ndarray) -> float:
    """Plug-in entropy in nats; counts summed in sorted order so that
    transposed joint tables give bit-identical results."""
    nz = np.sort(counts[counts > 0]).astype(float)
    total = nz.sum()
    return float(np.log(total) - np.sum(nz * np.log(nz)) / total)


def _digitize(x: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width bin indices over x's own min-max range, matching
    np.histogram edge semantics (last bin closed)."""
    lo, hi = x.min(), x.max()
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.searchsorted(edges, x, side="right") - 1
    return np.clip(idx, 0, bins - 1)


def entropy_histogram(
    samples, bins: int, value_range: tuple[float, float]
) -> float:
    """Entropy (nats) of the equal-width histogram of ``samples`` over
    ``value_range``; a value equal to the upper edge lands in the last bin."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("cannot estimate entropy of an empty sample list")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    lo, hi = value_range
    if lo > hi:
        raise ValueError(f"invalid range ({lo}, {hi})")
    if x.min() < lo or x.max() > hi:
        raise ValueError(
            f"samples outside range [{lo}, {hi}]: min={x.min()}, max={x.max()}"
        )
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    return _entropy_from_counts(counts)


class MutualInformationScorer:
    """Batch MI of a query window against a stack of candidate lookbacks.

    Bin indices and marginal entropies of the candidates are precomputed,
    so scoring a query costs one joint-histogram pass per variable.
    """

    def __init__(self, lookbacks: np.ndarray, bins: int):
        stack = np.asarray(lookbacks, dtype=float)
        if stack.ndim != 3:
            raise ValueError(f"expected (d, l, m) stack, got shape {stack.shape}")
        d, length, width = stack.shape
        if length < 2:
            raise ValueError(f"lookback length must be >= 2, got {length}")
        self.bins = bins
        self.length = length
        self.width = width
        self._idx = np.empty((d, length, width), dtype=np.int64)
        self._marginal = np.empty((d, width))
        for j in range(d):
            for v in range(width):
                idx = _digitize(stack[j, :, v], bins)
                self._idx[j, :, v] = idx
                self._marginal[j, v] = _entropy_from_counts(
                    np.bincount(idx, minlength=bins)
                )
        # c*ln(c) lookup for joint cell counts (all <= l)
        c = np.arange(length + 1, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            self._clnc = np.where(c > 0, c * np.log(np.maximum(c, 1.0)), 0.0)
        self._log_l = math.log(length)

    def scores(self, query: np.ndarray) -> np.ndarray:
        """Mean per-variable MI (nats, clamped >= 0) against every candidate."""
        q = np.asarray(query, dtype=float)
        if q.shape != (self.length, self.width):
            raise ValueError(
                f"query shape {q.shape} does not match candidates "
                f"({self.length}, {self.width})"
            )
        d = self._idx.shape[0]
        bins = self.bins
        cells = bins * bins
        offsets = (np.arange(d, dtype=np.int64) * cells)[:, None]
        total = np.zeros(d)
        for v in range(self.width):
            q_idx = _digitize(q[:, v], bins)
            q_entropy = _entropy_from_counts(np.bincount(q_idx, minlength=bins))
            codes = self._idx[:, :, v] * bins + q_idx[None, :]
            counts = np.bincount(
                (codes + offsets).ravel(), minlength=d * cells
            ).reshape(d, cells)
            counts.sort(axis=1)
            joint = self._log_l - self._clnc[counts].sum(axis=1) / self.length
            total += np.maximum(self._marginal[:, v] + q_entropy - joint, 0.0)
        return total / self.width


def score_mutual_information(
    query: np.ndarray, candidate: np.ndarray, bins: int | None = None
) -> float:
    """MI(candidate, query) in nats: per variable, aligned timesteps are
    paired, marginal and joint entropies come from equal-width histograms
    over each sequence's own min-max range, negative estimates clamp to 0,
    and the per-variable values are averaged. Higher is better."""
    q = np.asarray(query, dtype=float)
    c = np.asarray(candidate, dtype=float)
    if q.shape != c.shape:
        raise ValueError(f"shape mismatch: query {q.shape}, candidate {c.shape}")
    if q.ndim != 2 or q.shape[0] < 2:
        raise ValueError(f"need 2-D windows with at least 2 rows, got {q.shape}")
    if bins is None:
        bins = sturges_bins(q.shape[0])
    scorer = MutualInformationScorer(c[None, :, :], bins)
    return float(scorer.scores(q)[0])


class Retriever:
    """Reusable scorer over one knowledge base; build once per pool, then
    retrieve many queries."""

    def __init__(
        self,
        kb: KnowledgeBase,
        retriever_id: str = "similarity",
        *,
        k_emb: int = 512,
        bins: int | None = None,
        embedder=None,
    ):
        if retriever_id not in ("similarity", "mutual-information"):
            raise ValueError(f"unknown retriever {retriever_id!r}")
        self.kb = kb
        self.retriever_id = retriever_id
        self.polarity = (
            "lower-is-better" if retriever_id == "similarity" else "higher-is-better"
        )
        if len(kb) == 0:
            return
        if retriever_id == "similarity":
            self._embedder = embedder or (lambda w: embed_builtin(w, k_emb))
            self._candidate_embs = np.stack(
                [self._embedder(s.lookback) for s in kb.samples]
            )
        else:
            self._scorer = MutualInformationScorer(
                kb.lookback_stack(), bins if bins is not None else sturges_bins(kb.l)
            )

    def score_all(self, query: np.ndarray) -> list[ScoredCandidate]:
        """Score every candidate in base order."""
        if len(self.kb) == 0:
            return []
        if self.retriever_id == "similarity":
            q = self._embedder(np.asarray(query, dtype=float))
            deltas = self._candidate_embs - q[None, :]
            raw = np.sqrt(np.sum(deltas * deltas, axis=1))
        else:
            raw = self._scorer.scores(query)
        return [
            ScoredCandidate(i, float(s), self.polarity) for i, s in enumerate(raw)
        ]

    def retrieve(
        self,
        query: np.ndarray,
        k: int,
        exclude_extent: tuple[int, int] | None = None,
    ) -> ContextSet:
        """Rank and keep the best k candidates (with their futures).

        ``exclude_extent`` drops candidates whose row extent intersects the
        given [start, end] source rows — used when the query itself lives
        inside the base. Returns fewer than k entries (flagged truncated)
        when the pool is smaller than k."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        allowed = list(range(len(self.kb)))
        if exclude_extent is not None:
            q_start, q_end = exclude_extent
            allowed = [
                i
                for i, s in enumerate(self.kb.samples)
                if s.origin + s.h < q_start or s.origin - s.l + 1 > q_end
            ]
        if not allowed:
            raise EmptyPoolError(
                "retrieval pool is empty after exclusion; run the forecaster "
                "on the bare lookback (no-retrieval path)"
            )
        scored = self.score_all(query)
        sign = 1.0 if self.polarity == "lower-is-better" else -1.0
        ranked = sorted(
            allowed,
            key=lambda i: (sign * scored[i].score, self.kb.samples[i].origin),
        )
        chosen = ranked[:k]
        entries = tuple(
            (self.kb.samples[i], scored[i].score) for i in chosen
        )
        return ContextSet(
            entries, self.retriever_id, len(entries), truncated=len(entries) < k
        )


def retrieve_top_k(
    kb: KnowledgeBase,
    query: np.ndarray,
    retriever: str = "similarity",
    k: int = 3,
    exclude_extent: tuple[int, int] | None = None,
    *,
    k_emb: int = 512,
    bins: int | None = None,
    embedder=None,
) -> ContextSet:
    """One-shot retrieval; see Retriever for the reusable form."""
    if len(kb) == 0:
        raise EmptyPoolError(
            "knowledge base is empty; run the forecaster on the bare lookback "
            "(no-retrieval path)"
        )
    r = Retriever(kb, retriever, k_emb=k_emb, bins=bins, embedder=embedder)
    return r.retrieve(query, k, exclude_extent)


def make_embedder(spec: EmbedderSpec):
    """Embedding callable for the given spec: the built-in pooled embedder,
    or an external encoder reached over the shared wire protocol."""
    if spec.kind == "builtin-pooled":
        return lambda window: embed_builtin(window, spec.k_emb)
    if spec.kind == "external":
        if not spec.endpoint:
            raise ValueError("external embedder needs an endpoint")
        from .protocol import WireClient

        client = WireClient(spec.endpoint)

        def _embed(window: np.ndarray) -> np.ndarray:
            return client.embed(np.asarray(window, dtype=float), spec.k_emb)

        return _embed
    raise ValueError(f"unknown embedder kind {spec.kind!r}")
