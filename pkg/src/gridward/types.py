"""Shared domain types: stations, channels, series, fault labels.

Everything downstream (detection, features, classifiers, clustering)
works in terms of these. They are deliberately dumb containers with
validation at construction; no behavior lives here.
"""

from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np


class GridwardError(Exception):
    """Base class for errors raised by this package."""


class FrozenStationError(GridwardError):
    """Raised when a sample is fed to a detector that already triggered."""


class Channel(Enum):
    FREQUENCY = "frequency"
    VOLTAGE = "voltage"
    PHASE_ANGLE = "phase_angle"

    @classmethod
    def from_text(cls, text: str) -> "Channel":
        for c in cls:
            if c.value == text:
                return c
        valid = ", ".join(c.value for c in cls)
        raise GridwardError(f"unknown channel {text!r}; valid channels: {valid}")


class FaultLabel(IntEnum):
    """The nine fault classes, with stable integer codes for serialization."""

    DroppedLoad = 0
    OpenAC = 1
    OpenDC = 2
    OpenGenerator = 3
    GMD2 = 4
    IceStorm = 5
    McNaryAttack = 6
    Ponderosa = 7
    Quake1 = 8

    @classmethod
    def from_text(cls, text: str) -> "FaultLabel":
        try:
            return cls[text]
        except KeyError:
            valid = ", ".join(m.name for m in cls)
            raise GridwardError(
                f"unknown fault label {text!r}; valid labels: {valid}"
            ) from None


@dataclass(frozen=True)
class StationMeta:
    station_id: int
    name: str
    latitude: float
    longitude: float

    def __post_init__(self):
        # normalize numpy scalars so repr() in the CSV writers stays plain
        object.__setattr__(self, "station_id", int(self.station_id))
        object.__setattr__(self, "latitude", float(self.latitude))
        object.__setattr__(self, "longitude", float(self.longitude))
        if self.station_id < 0:
            raise GridwardError(f"station_id must be >= 0, got {self.station_id}")
        if not -90.0 <= self.latitude <= 90.0:
            raise GridwardError(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise GridwardError(f"longitude out of range: {self.longitude}")


@dataclass
class TimeSeries:
    """A single station's measurement stream at a fixed sample rate."""

    station: StationMeta
    channel: Channel
    values: np.ndarray
    sample_rate_hz: float = 30.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.shape[0] < 2:
            raise GridwardError(
                f"station {self.station.station_id}: series must be 1-d with length >= 2"
            )
        if self.sample_rate_hz <= 0:
            raise GridwardError("sample_rate_hz must be positive")
        bad = np.flatnonzero(~np.isfinite(self.values))
        if bad.size:
            raise GridwardError(
                f"station {self.station.station_id} sample {bad[0] + 1}: non-finite value"
            )

    def __len__(self) -> int:
        return self.values.shape[0]


# A dataset is a list of (series, label-or-None) pairs.
Dataset = list
