"""Retrieval-augmented forecasting for daily multivariate time series.

Pipeline: build a chronological knowledge base of (lookback, future)
window pairs, retrieve the top-k most analogous historical episodes for a
query window (embedding distance or mutual information), augment the
query with them, and forecast with a pluggable model — built-in baselines
or an external foundation model behind a JSON wire protocol.
"""

from .augment import (
    AugmentedInput,
    augment_strategy_a,
    augment_strategy_b,
    augment_strategy_c,
    flatten_context,
)
from .config import ExperimentConfig, load_config
from .forecast import (
    ForecastRequest,
    ForecastResult,
    ForecasterSpec,
    PipelineConfig,
    forecast_autoregressive,
    forecast_external,
    forecast_persistence,
    forecast_seasonal_naive,
    make_forecaster,
    run_raf_pipeline,
)
from .ingest import DatumAdjustment, IngestConfig, apply_datum_adjustments, ingest, interpolate_gaps, load_csv
from .kb import (
    KnowledgeBase,
    TestSet,
    build_kb_and_test,
    build_pairs,
    chronological_split,
    load_kb,
    restrict_pool,
    save_kb,
)
from .metrics import (
    MetricRow,
    SediThresholds,
    correlation_matrix,
    mae,
    overall_row,
    rmse,
    sedi,
    sedi_thresholds,
)
from .retrieval import (
    ContextSet,
    EmbedderSpec,
    EmptyPoolError,
    Retriever,
    embed_builtin,
    entropy_histogram,
    make_embedder,
    retrieve_top_k,
    score_mutual_information,
    score_similarity,
    sturges_bins,
)
from .series import MultivariateSeries, Variable, WindowPair, window_at, zscore_window

__version__ = "0.1.0"
