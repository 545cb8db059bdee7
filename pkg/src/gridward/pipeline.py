"""End-to-end replay: stream every station through the detector, freeze
on trigger, classify the post-onset window, and optionally cluster one
predicted class.

The replay is batch over recorded data; no wall-clock pacing. Frozen
stations stop contributing to Stage-1 outputs (outlier CSV rows and
heat-map scores end at the trigger index), while Stage-2 and Stage-3 read
the recorded window from the first outlier of the triggering run onward,
which may extend past the trigger. That mirrors operational intent: the
detector stops ingesting, the classifier works on what was captured.
"""

import csv
import os
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .anomaly import DetectorConfig, Severity, find_trigger, heatmap_scores, outlier_vector
from .classify import predict_model
from .classify.model_io import load_model
from .cluster import dtw_matrix, geo_export, minmax_normalize, pam
from .features import RAW_LENGTH, extract
from .ingest import load_dataset
from .types import FaultLabel, GridwardError

ALERT_HEADER = [
    "station_id",
    "trigger_index",
    "timestamp_s",
    "label",
    "confidence",
    "latency_samples",
]


@dataclass(frozen=True)
class FaultAlert:
    station_id: int
    trigger_index: int  # 1-based sample index of the trigger
    timestamp_s: float  # trigger_index / sample rate
    label: FaultLabel
    confidence: float
    latency_samples: int  # samples after the first outlier the classifier saw

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise GridwardError("FaultAlert: confidence must lie in [0, 1]")
        if self.trigger_index < 1:
            raise GridwardError("FaultAlert: trigger index must be >= 1")


@dataclass
class PipelineConfig:
    input_path: str
    model_path: str = None
    # detector
    trigger_n: int = 70
    severity_threshold: Severity = Severity.SEVERE
    warmup: int = 30
    heatmap_window: int = 40
    # features
    method: str = "acf"
    K: int = 20
    classify_window: int = 600
    # stage 3, active when cluster_class is set
    cluster_class: FaultLabel = None
    L: int = 5
    restarts: int = 5
    band: int = None
    # outputs, each optional
    alerts_csv: str = None
    outliers_csv: str = None
    heatmap_svg: str = None
    cluster_csv: str = None
    cluster_svg: str = None
    seed: int = 0

    def __post_init__(self):
        if self.classify_window < self.K + 1:
            raise GridwardError(
                f"classify_window must exceed K={self.K} (ACF needs more "
                f"samples than lags); got {self.classify_window}"
            )
        for p in (self.input_path, self.model_path):
            if p is not None and not os.path.exists(p):
                raise GridwardError(f"no such file: {p}")

    def detector(self) -> DetectorConfig:
        return DetectorConfig(
            trigger_n=self.trigger_n,
            severity_threshold=self.severity_threshold,
            warmup=self.warmup,
        )


def _expected_dim(method: str, K: int) -> int:
    return RAW_LENGTH if method == "raw" else K


def run_pipeline(config: PipelineConfig):
    """Returns the FaultAlert list (input order) and writes whichever
    artifact paths the config names."""
    if config.model_path is None:
        raise GridwardError("run_pipeline: a trained model file is required")
    model = load_model(config.model_path)
    want = _expected_dim(config.method, config.K)
    if model.feature_dim != want:
        raise GridwardError(
            f"model expects {model.feature_dim} features but "
            f"{config.method}/K={config.K} produces {want}"
        )
    dataset = load_dataset(config.input_path)
    if not dataset:
        raise GridwardError(f"{config.input_path}: empty dataset")
    det = config.detector()

    alerts = []
    truncated = []  # per-station severities up to the freeze point
    stations = []
    windows = {}  # station_id -> recorded window from first outlier
    labels = {}  # station_id -> predicted label
    for series, _ in dataset:
        sid = series.station.station_id
        stations.append(series.station)
        sev = outlier_vector(series, det)
        tr = find_trigger(sev, det)
        if tr is None:
            truncated.append(sev)
            continue
        truncated.append(sev[: tr + 1])
        start = tr - det.trigger_n + 1
        window = series.values[start : start + config.classify_window]
        windows[sid] = series.values[start:]
        feats = extract(
            replace(series, values=window), method=config.method, K=config.K
        )
        codes, conf = predict_model(model, feats.values[None, :])
        label = FaultLabel(int(codes[0]))
        confidence = float(conf[0])
        labels[sid] = label
        alerts.append(
            FaultAlert(
                station_id=sid,
                trigger_index=tr + 1,
                timestamp_s=(tr + 1) / series.sample_rate_hz,
                label=label,
                confidence=confidence,
                latency_samples=window.shape[0],
            )
        )

    if config.outliers_csv is not None:
        with open(config.outliers_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["station_id", "t", "severity"])
            for st, sev in zip(stations, truncated):
                sid = st.station_id
                fh.writelines(
                    f"{sid},{t},{int(s)}\n" for t, s in enumerate(sev, start=1)
                )
    if config.heatmap_svg is not None:
        from .viz import heatmap_svg

        scores = [
            heatmap_scores([sev], sev.shape[0], config.heatmap_window)[0]
            for sev in truncated
        ]
        heatmap_svg(
            [(st.latitude, st.longitude) for st in stations],
            scores,
            config.heatmap_svg,
            window=config.heatmap_window,
        )
    if config.alerts_csv is not None:
        with open(config.alerts_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(ALERT_HEADER)
            for a in alerts:
                w.writerow(
                    [
                        a.station_id,
                        a.trigger_index,
                        repr(a.timestamp_s),
                        a.label.name,
                        repr(a.confidence),
                        a.latency_samples,
                    ]
                )

    if config.cluster_class is not None:
        member_ids = [
            st.station_id
            for st in stations
            if labels.get(st.station_id) == config.cluster_class
        ]
        if len(member_ids) < 2:
            warnings.warn(
                f"stage 3 skipped: fewer than 2 stations predicted as "
                f"{config.cluster_class.name}",
                stacklevel=2,
            )
        else:
            by_id = {st.station_id: st for st in stations}
            samples = [minmax_normalize(windows[sid]) for sid in member_ids]
            dist = dtw_matrix(samples, band=config.band)
            clustering = pam(
                dist, config.L, seed=config.seed, restarts=config.restarts
            )
            geo_export(
                clustering,
                [by_id[sid] for sid in member_ids],
                csv_path=config.cluster_csv,
                svg_path=config.cluster_svg,
            )
    return alerts
