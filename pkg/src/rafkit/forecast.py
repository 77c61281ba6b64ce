"""Forecaster abstraction, built-in baselines, and pipeline orchestration.

The built-in forecasters (persistence, seasonal-naive, ridge AR) keep the
whole pipeline verifiable without any model runtime; a foundation model
attaches through the external wire protocol instead. All built-ins are
pure and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .augment import augment_strategy_a, augment_strategy_b, augment_strategy_c
from .kb import KnowledgeBase
from .protocol import WireClient
from .retrieval import EmptyPoolError, Retriever
from .series import WindowPair


@dataclass(frozen=True)
class ForecastRequest:
    context: np.ndarray
    horizon: int
    target_indices: tuple[int, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        context = np.asarray(self.context, dtype=float)
        if context.ndim != 2 or context.shape[0] < 1:
            raise ValueError(f"context must be a non-empty matrix, got {context.shape}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        targets = tuple(int(i) for i in self.target_indices)
        for i in targets:
            if not 0 <= i < context.shape[1]:
                raise ValueError(f"target index {i} out of range")
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "target_indices", targets)


@dataclass(frozen=True)
class ForecastResult:
    values: np.ndarray
    forecaster_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("forecast values must be a matrix")
        if not np.isfinite(values).all():
            raise ValueError("forecast contains non-finite values")
        object.__setattr__(self, "values", values)


@dataclass
class ForecasterSpec:
    kind: str = "persistence"  # persistence | seasonal-naive | autoregressive | external
    seasonal_period: int = 7
    ar_order: int = 8
    ridge_damping: float = 1e-3
    endpoint: str | None = None
    max_rows: int | None = None

    def label(self) -> str:
        if self.kind == "seasonal-naive":
            return f"seasonal-naive(s={self.seasonal_period})"
        if self.kind == "autoregressive":
            return f"ar(p={self.ar_order},lambda={self.ridge_damping:g})"
        if self.kind == "external":
            return f"external({self.endpoint})"
        return self.kind


def forecast_persistence(req: ForecastRequest) -> ForecastResult:
    """Repeat the last observed target values across the horizon."""
    last = req.context[-1, list(req.target_indices)]
    values = np.tile(last, (req.horizon, 1))
    return ForecastResult(values, "persistence")


def forecast_seasonal_naive(req: ForecastRequest, s: int = 7) -> ForecastResult:
    """Copy the value one season back; steps the context cannot cover fall
    back to persistence (flagged in the forecaster id)."""
    if s < 1:
        raise ValueError(f"seasonal period must be >= 1, got {s}")
    rows = req.context.shape[0]
    targets = list(req.target_indices)
    values = np.empty((req.horizon, len(targets)))
    fallback = False
    for i in range(1, req.horizon + 1):
        offset = rows - s + ((i - 1) % s)
        if offset >= 0:
            values[i - 1] = req.context[offset, targets]
        else:
            values[i - 1] = req.context[-1, targets]
            fallback = True
    label = f"seasonal-naive(s={s})"
    if fallback:
        label += "+persistence-fallback"
    return ForecastResult(values, label)


def _fit_ar(y: np.ndarray, p: int, lam: float) -> np.ndarray:
    """Ridge-damped least squares for y_t ~ intercept + p lags; the
    intercept is not penalized. Returns (intercept, beta_1..beta_p)."""
    rows = y.shape[0]
    design = np.empty((rows - p, p + 1))
    design[:, 0] = 1.0
    for j in range(1, p + 1):
        design[:, j] = y[p - j : rows - j]
    target = y[p:]
    normal = design.T @ design
    damping = lam * np.eye(p + 1)
    damping[0, 0] = 0.0
    try:
        return np.linalg.solve(normal + damping, design.T @ target)
    except np.linalg.LinAlgError:
        if lam == 0.0:
            raise ValueError(
                "normal matrix is singular with ridge damping 0; set damping > 0"
            ) from None
        raise


def forecast_autoregressive(
    req: ForecastRequest, p: int = 8, lam: float = 1e-3
) -> ForecastResult:
    """Per-target ridge AR(p) fit on the context, rolled out recursively
    (each step feeds predictions back as lags)."""
    if p < 1:
        raise ValueError(f"AR order must be >= 1, got {p}")
    if lam < 0:
        raise ValueError(f"ridge damping must be >= 0, got {lam}")
    rows = req.context.shape[0]
    if rows < 2 * p + 1:
        raise ValueError(
            f"context has {rows} rows; AR(p={p}) needs at least 2p+1 = {2 * p + 1}"
        )
    values = np.empty((req.horizon, len(req.target_indices)))
    for out_col, col in enumerate(req.target_indices):
        y = req.context[:, col]
        theta = _fit_ar(y, p, lam)
        history = list(y[-p:])
        for step in range(req.horizon):
            pred = theta[0] + sum(
                theta[j] * history[-j] for j in range(1, p + 1)
            )
            history.append(pred)
            values[step, out_col] = pred
    return ForecastResult(values, f"ar(p={p},lambda={lam:g})")


def forecast_external(req: ForecastRequest, endpoint) -> ForecastResult:
    """Ship the request over the wire protocol and validate the reply."""
    client = endpoint if isinstance(endpoint, WireClient) else WireClient(endpoint)
    variables = req.metadata.get("variables", ())
    values = client.forecast(req.context, req.horizon, req.target_indices, variables)
    label = getattr(client.endpoint, "url", None) or getattr(
        client.endpoint, "command", "?"
    )
    return ForecastResult(values, f"external({label})")


def make_forecaster(spec: ForecasterSpec) -> Callable[[ForecastRequest], ForecastResult]:
    if spec.kind == "persistence":
        return forecast_persistence
    if spec.kind == "seasonal-naive":
        return lambda req: forecast_seasonal_naive(req, spec.seasonal_period)
    if spec.kind == "autoregressive":
        return lambda req: forecast_autoregressive(req, spec.ar_order, spec.ridge_damping)
    if spec.kind == "external":
        if not spec.endpoint:
            raise ValueError("external forecaster needs an endpoint")
        client = WireClient(spec.endpoint)
        return lambda req: forecast_external(req, client)
    raise ValueError(f"unknown forecaster kind {spec.kind!r}")


@dataclass
class PipelineConfig:
    target_indices: tuple[int, ...]
    forecaster: Callable[[ForecastRequest], ForecastResult]
    forecaster_label: str = ""
    retriever: str = "similarity"
    strategy: str = "B"
    k: int = 3
    k_emb: int = 512
    bins: int | None = None
    max_rows: int | None = None


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except EmptyPoolError:
        raise
    except Exception as exc:
        raise RuntimeError(f"pipeline stage '{name}' failed: {exc}") from exc


def run_raf_pipeline(
    kb: KnowledgeBase,
    query: WindowPair,
    config: PipelineConfig,
    retriever: Retriever | None = None,
) -> ForecastResult:
    """Retrieve, augment, forecast. An empty pool (coverage 0, or nothing
    left after exclusion) degrades to forecasting on the bare lookback.

    Pass a prebuilt ``retriever`` to amortize candidate preprocessing when
    evaluating many queries against the same pool.
    """
    horizon = query.h
    meta = {
        "strategy": config.strategy,
        "retriever": config.retriever,
        "query_origin": query.origin,
    }

    def bare() -> ForecastResult:
        req = ForecastRequest(
            query.lookback,
            horizon,
            config.target_indices,
            dict(meta, strategy="none", retriever="none"),
        )
        return _stage("forecast", config.forecaster, req)

    if len(kb) == 0:
        return bare()

    if retriever is None:
        retriever = _stage(
            "retrieval-setup",
            Retriever,
            kb,
            config.retriever,
            k_emb=config.k_emb,
            bins=config.bins,
        )

    kb_first = kb.samples[0].origin - kb.l + 1
    kb_last = kb.samples[-1].origin + kb.h
    q_start, q_end = query.origin - query.l + 1, query.origin + query.h
    exclude = (q_start, q_end) if (q_start >= kb_first and q_end <= kb_last) else None

    try:
        contexts = retriever.retrieve(query.lookback, config.k, exclude)
    except EmptyPoolError:
        return bare()

    if config.strategy == "A":
        aug = _stage("augment", augment_strategy_a, contexts, query.lookback)
        req = ForecastRequest(aug.matrix, horizon, config.target_indices, meta)
        return _stage("forecast", config.forecaster, req)
    if config.strategy == "B":
        inputs = _stage("augment", augment_strategy_b, contexts, query.lookback)
        results = []
        for aug in inputs:
            req = ForecastRequest(aug.matrix, horizon, config.target_indices, meta)
            results.append(_stage("forecast", config.forecaster, req))
        mean = np.mean(np.stack([r.values for r in results]), axis=0)
        return ForecastResult(mean, results[0].forecaster_id)
    if config.strategy == "C":
        aug = _stage(
            "augment", augment_strategy_c, contexts, query.lookback, config.max_rows
        )
        req = ForecastRequest(aug.matrix, horizon, config.target_indices, meta)
        return _stage("forecast", config.forecaster, req)
    raise ValueError(f"unknown strategy {config.strategy!r}")
