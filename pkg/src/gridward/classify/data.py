"""Labeled feature matrices, the common input of all three classifiers."""

from dataclasses import dataclass, field

import numpy as np

from ..features import extract
from ..types import FaultLabel, GridwardError


@dataclass
class LabeledDataset:
    X: np.ndarray  # (n, feature_dim) float64
    y: np.ndarray  # (n,) int32 fault-label codes
    station_ids: np.ndarray = None  # (n,) int64
    stations: list = None  # optional StationMeta, same order as rows

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.int32)
        if self.X.ndim != 2 or self.y.shape != (self.X.shape[0],):
            raise GridwardError("LabeledDataset: X must be (n, d), y must be (n,)")
        if self.station_ids is None:
            self.station_ids = np.arange(self.X.shape[0], dtype=np.int64)
        else:
            self.station_ids = np.asarray(self.station_ids, dtype=np.int64)
        if self.station_ids.shape != (self.X.shape[0],):
            raise GridwardError("LabeledDataset: station_ids length mismatch")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.y)

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx)
        stations = (
            [self.stations[i] for i in idx] if self.stations is not None else None
        )
        return LabeledDataset(
            self.X[idx], self.y[idx], self.station_ids[idx], stations
        )

    @classmethod
    def from_dataset(cls, dataset, method: str = "acf", K: int = 20):
        """Featurize a list of (TimeSeries, FaultLabel) pairs."""
        rows = []
        codes = []
        sids = []
        stations = []
        for series, label in dataset:
            if label is None:
                raise GridwardError(
                    f"station {series.station.station_id}: unlabeled series "
                    "cannot join a training set"
                )
            rows.append(extract(series, method, K).values)
            codes.append(int(label))
            sids.append(series.station.station_id)
            stations.append(series.station)
        return cls(
            np.asarray(rows), np.asarray(codes, dtype=np.int32),
            np.asarray(sids, dtype=np.int64), stations,
        )

    @classmethod
    def from_feature_rows(cls, station_ids, labels, X):
        codes = []
        for sid, lab in zip(station_ids, labels):
            if lab is None:
                raise GridwardError(f"station {sid}: missing label")
            codes.append(int(lab) if isinstance(lab, FaultLabel) else int(lab))
        return cls(X, np.asarray(codes, dtype=np.int32), station_ids)
