"""gridward: streaming fault analysis for grid sensor time series.

Three stages over per-station series sampled at 30 Hz: an online
prefix-quartile outlier detector with a consecutive-run fault trigger,
autocorrelation-feature classifiers (SVM, random forest, small neural
network) for nine fault classes, and DTW k-medoids clustering to expose
subgroups inside a class. A seeded synthetic scenario generator provides
labeled corpora with planted geographic structure.

Hot kernels run from a compiled extension when it is available and from
a pure-Python twin otherwise; results are identical either way. Set
GRIDWARD_PURE=1 to force the fallback.
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .anomaly import (
    DetectorConfig,
    DetectorState,
    Event,
    EventKind,
    Severity,
    classify_sample,
    feed,
    find_trigger,
    heatmap_scores,
    outlier_vector,
    quartiles,
)
from .cluster import (
    Clustering,
    NormalizedSeries,
    WarpingPath,
    dtw,
    dtw_distance,
    dtw_matrix,
    elbow,
    geo_export,
    minmax_normalize,
    pam,
)
from .features import (
    FeatureVector,
    RAW_LENGTH,
    acf,
    difference,
    extract,
    load_features,
    pacf,
    periodogram,
    raw_features,
    save_features,
)
from .ingest import (
    ScenarioSpec,
    SignatureParams,
    fault_signature,
    generate_corpus,
    generate_scenario,
    load_dataset,
    save_dataset,
    scenario_from_config,
)
from .pipeline import FaultAlert, PipelineConfig, run_pipeline
from .types import (
    Channel,
    FaultLabel,
    FrozenStationError,
    GridwardError,
    StationMeta,
    TimeSeries,
)

__all__ = [
    "Channel",
    "Clustering",
    "DetectorConfig",
    "DetectorState",
    "Event",
    "EventKind",
    "FaultAlert",
    "FaultLabel",
    "FeatureVector",
    "FrozenStationError",
    "GridwardError",
    "NormalizedSeries",
    "PipelineConfig",
    "RAW_LENGTH",
    "ScenarioSpec",
    "Severity",
    "SignatureParams",
    "StationMeta",
    "TimeSeries",
    "WarpingPath",
    "acf",
    "backend_name",
    "classify_sample",
    "difference",
    "dtw",
    "dtw_distance",
    "dtw_matrix",
    "elbow",
    "extract",
    "fault_signature",
    "feed",
    "find_trigger",
    "generate_corpus",
    "generate_scenario",
    "geo_export",
    "heatmap_scores",
    "load_dataset",
    "load_features",
    "minmax_normalize",
    "outlier_vector",
    "pacf",
    "pam",
    "periodogram",
    "quartiles",
    "raw_features",
    "run_pipeline",
    "save_dataset",
    "save_features",
    "scenario_from_config",
]
