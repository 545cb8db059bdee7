"""Stage 1: online outlier detection from prefix quartiles.

Each incoming sample x at time t is judged against the quartiles of the
prefix X_1..t (including x itself): beyond 3 IQR outside [Q1, Q3] is
severe (2), beyond 1.5 IQR is moderate (1), otherwise normal (0). The
strict inequalities matter for the degenerate IQR = 0 case: a constant
prefix flags nothing until a sample actually leaves the constant value.

Because the prefix grows with every sample, a sustained level shift
first produces a long run of severe flags and then, as shifted samples
take over the quartiles, the flags die out on their own. A fault trigger
is declared after trigger_n consecutive samples at or above the
configured severity, after which the detector freezes.

Quantile definition (fixed so oracle tests can be exact): linear
interpolation between order statistics at position (n - 1) * p of the
sorted prefix. Warm-up samples (1-based t <= warmup) are never flagged;
with fewer than four points quartiles are mostly noise anyway.
"""

import bisect
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from ._backend import outlier_severities as _severities_kernel
from .types import FrozenStationError, GridwardError, TimeSeries

__all__ = [
    "Severity",
    "QuartileSummary",
    "quartiles",
    "DetectorConfig",
    "DetectorState",
    "EventKind",
    "Event",
    "classify_sample",
    "feed",
    "outlier_vector",
    "heatmap_scores",
]


class Severity(IntEnum):
    NORMAL = 0
    MODERATE = 1
    SEVERE = 2


@dataclass(frozen=True)
class QuartileSummary:
    q1: float
    q3: float
    iqr: float


def _interp_quartile(sorted_vals, n: int, p: float) -> float:
    pos = (n - 1) * p
    lo = int(pos)
    hi = lo + 1
    frac = pos - lo
    if hi >= n:
        return float(sorted_vals[lo])
    return float(sorted_vals[lo] + frac * (sorted_vals[hi] - sorted_vals[lo]))


def quartiles(prefix) -> QuartileSummary:
    """Q1, Q3 and IQR of a nonempty sequence under the pinned quantile
    definition (linear interpolation at position (n-1)*p)."""
    arr = np.asarray(prefix, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise GridwardError("quartiles: input must be a nonempty 1-d sequence")
    if not np.isfinite(arr).all():
        raise GridwardError("quartiles: input contains non-finite values")
    s = np.sort(arr)
    n = s.shape[0]
    q1 = _interp_quartile(s, n, 0.25)
    q3 = _interp_quartile(s, n, 0.75)
    return QuartileSummary(q1=q1, q3=q3, iqr=q3 - q1)


@dataclass(frozen=True)
class DetectorConfig:
    trigger_n: int = 70
    severity_threshold: Severity = Severity.SEVERE
    warmup: int = 30

    def __post_init__(self):
        if self.trigger_n < 1:
            raise GridwardError("trigger_n must be >= 1")
        if self.warmup < 0:
            raise GridwardError("warmup must be >= 0")
        if self.severity_threshold not in (Severity.MODERATE, Severity.SEVERE):
            raise GridwardError("severity_threshold must be moderate or severe")


class EventKind(Enum):
    NORMAL = "normal"
    OUTLIER = "outlier"
    TRIGGERED = "triggered"


@dataclass(frozen=True)
class Event:
    kind: EventKind
    severity: Severity
    t: int  # 1-based index of the sample that produced this event


@dataclass
class DetectorState:
    """Online per-station detector; one instance per stream, single owner."""

    config: DetectorConfig = field(default_factory=DetectorConfig)
    consecutive_count: int = 0
    frozen: bool = False
    _sorted: list = field(default_factory=list, repr=False)

    @property
    def samples_seen(self) -> int:
        return len(self._sorted)

    def _insert(self, x: float) -> Severity:
        bisect.insort(self._sorted, x)
        n = len(self._sorted)
        if n <= self.config.warmup:
            return Severity.NORMAL
        q1 = _interp_quartile(self._sorted, n, 0.25)
        q3 = _interp_quartile(self._sorted, n, 0.75)
        iqr = q3 - q1
        if x > q3 + 3.0 * iqr or x < q1 - 3.0 * iqr:
            return Severity.SEVERE
        if x > q3 + 1.5 * iqr or x < q1 - 1.5 * iqr:
            return Severity.MODERATE
        return Severity.NORMAL


def classify_sample(state: DetectorState, x: float) -> Severity:
    """Insert x into the detector's prefix and return its severity.

    Mutates state (the prefix includes the judged sample). Does not touch
    the consecutive-run counter; use feed() for trigger semantics.
    """
    if state.frozen:
        raise FrozenStationError("station frozen")
    x = float(x)
    if not np.isfinite(x):
        raise GridwardError("classify_sample: non-finite sample")
    return state._insert(x)


def feed(state: DetectorState, x: float) -> Event:
    """Consume one sample: classify it, update the consecutive-run counter,
    and fire Triggered (freezing the detector) when the run reaches
    trigger_n."""
    sev = classify_sample(state, x)
    t = state.samples_seen
    if sev >= state.config.severity_threshold:
        state.consecutive_count += 1
        if state.consecutive_count >= state.config.trigger_n:
            state.frozen = True
            return Event(EventKind.TRIGGERED, sev, t)
        return Event(EventKind.OUTLIER, sev, t)
    state.consecutive_count = 0
    if sev > Severity.NORMAL:
        return Event(EventKind.OUTLIER, sev, t)
    return Event(EventKind.NORMAL, sev, t)


def outlier_vector(series, config: DetectorConfig = None) -> np.ndarray:
    """Batch severities for a whole series (freezing ignored): element t
    equals classify_sample applied to the prefix 1..t. Returns int8 array
    of the same length as the input."""
    if config is None:
        config = DetectorConfig()
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise GridwardError("outlier_vector: input must be 1-d")
    if not np.isfinite(values).all():
        raise GridwardError("outlier_vector: input contains non-finite values")
    return _severities_kernel(values, config.warmup)


def find_trigger(severities: np.ndarray, config: DetectorConfig = None):
    """Index (0-based) at which feed() would have fired Triggered, or None.

    Equivalent to streaming the samples through feed(): the first moment
    the running count of consecutive samples with severity >=
    severity_threshold reaches trigger_n.
    """
    if config is None:
        config = DetectorConfig()
    thr = int(config.severity_threshold)
    run = 0
    for t, s in enumerate(np.asarray(severities)):
        if s >= thr:
            run += 1
            if run >= config.trigger_n:
                return t
        else:
            run = 0
    return None


def heatmap_scores(outlier_vectors, t: int, window: int = 40) -> np.ndarray:
    """Per-station sum of the last `window` severities ending at 1-based
    index t; with window=40 the score lies in [0, 80]. t may be at most
    the length of every vector."""
    if t < 1:
        raise GridwardError("heatmap_scores: t must be >= 1")
    if window < 1:
        raise GridwardError("heatmap_scores: window must be >= 1")
    scores = np.zeros(len(outlier_vectors), dtype=np.float64)
    for k, vec in enumerate(outlier_vectors):
        vec = np.asarray(vec)
        if t > vec.shape[0]:
            raise GridwardError(
                f"heatmap_scores: t={t} beyond series length {vec.shape[0]} "
                f"(vector {k})"
            )
        start = max(0, t - window)
        scores[k] = float(np.sum(vec[start:t]))
    return scores
