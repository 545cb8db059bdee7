"""Stage 2 feature maps: differencing, ACF, PACF, periodogram, raw.

The canonical representation is the ACF of the first-differenced series
at lags 1..K (lag 0 is identically 1 and carries nothing). The biased
autocovariance estimator (divide by T, not T-h) keeps every |rho| <= 1.
PACF and the binned periodogram exist as comparison baselines, as does
the fixed-length raw representation used by the ablation study.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .types import FaultLabel, GridwardError, TimeSeries

METHODS = ("acf", "pacf", "periodogram", "raw")
RAW_LENGTH = 1802


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    method: str
    K: int

    def __post_init__(self):
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )
        if self.method not in METHODS:
            raise GridwardError(f"unknown feature method {self.method!r}")
        if self.values.shape != (self.K,):
            raise GridwardError(
                f"feature vector length {self.values.shape} != K={self.K}"
            )
        if not np.isfinite(self.values).all():
            raise GridwardError("feature vector contains non-finite values")
        # correlations live in [-1, 1]; tolerate only rounding-level excess
        if self.method == "acf" and np.abs(self.values).max() > 1.0 + 1e-9:
            raise GridwardError("acf features must lie in [-1, 1]")


def difference(series):
    """First-order difference with the first element pinned to 0, so the
    output has the same length as the input. Accepts a TimeSeries (returns
    a TimeSeries) or a plain sequence (returns an ndarray)."""
    if isinstance(series, TimeSeries):
        return replace(series, values=difference(series.values))
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise GridwardError("difference: need a 1-d series of length >= 2")
    out = np.empty_like(x)
    out[0] = 0.0
    np.subtract(x[1:], x[:-1], out=out[1:])
    return out


def acf(series, max_lag: int = 20) -> FeatureVector:
    """Autocorrelations at lags 1..max_lag of the given sequence.

    gamma(h) = (1/T) sum_{t} (x_{t+h} - mu)(x_t - mu), rho = gamma/gamma(0).
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise GridwardError("acf: input must be 1-d")
    T = x.shape[0]
    if T <= max_lag:
        raise GridwardError(f"acf: series length {T} must exceed max_lag {max_lag}")
    d = x - x.mean()
    g0 = float(np.dot(d, d)) / T
    if g0 <= 0.0:
        raise GridwardError("acf: zero variance")
    rho = np.empty(max_lag, dtype=np.float64)
    for h in range(1, max_lag + 1):
        rho[h - 1] = (float(np.dot(d[h:], d[:-h])) / T) / g0
    return FeatureVector(rho, "acf", max_lag)


def pacf(series, max_lag: int = 20) -> FeatureVector:
    """Partial autocorrelations via the Durbin-Levinson recursion applied
    to the ACF of the series. pacf(1) equals acf(1) by construction."""
    rho_fv = acf(series, max_lag)
    rho = np.concatenate(([1.0], rho_fv.values))
    phi = np.zeros((max_lag + 1, max_lag + 1), dtype=np.float64)
    out = np.empty(max_lag, dtype=np.float64)
    phi[1, 1] = rho[1]
    out[0] = rho[1]
    for k in range(2, max_lag + 1):
        num = rho[k] - float(np.dot(phi[k - 1, 1:k], rho[k - 1 : 0 : -1]))
        den = 1.0 - float(np.dot(phi[k - 1, 1:k], rho[1:k]))
        if den <= 1e-12:
            raise GridwardError(f"pacf: recursion degenerate at lag {k}")
        phi[k, k] = num / den
        if abs(phi[k, k]) >= 1.0:
            raise GridwardError(f"pacf: recursion degenerate at lag {k}")
        for j in range(1, k):
            phi[k, j] = phi[k - 1, j] - phi[k, k] * phi[k - 1, k - j]
        out[k - 1] = phi[k, k]
    return FeatureVector(out, "pacf", max_lag)


def periodogram(series, n_bins: int = 20) -> FeatureVector:
    """Mean-binned, sum-normalized squared FFT magnitudes of the
    mean-removed series, over n_bins equal-width bins spanning
    (0, Nyquist]."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise GridwardError("periodogram: input must be 1-d")
    T = x.shape[0]
    if T < 2 * n_bins:
        raise GridwardError(
            f"periodogram: series length {T} must be >= {2 * n_bins}"
        )
    d = x - x.mean()
    power = np.abs(np.fft.rfft(d)) ** 2
    freqs = np.fft.rfftfreq(T)  # cycles per sample, 0 .. 0.5
    keep = freqs > 0.0
    power = power[keep]
    freqs = freqs[keep]
    width = 0.5 / n_bins
    # bin b covers (b*width, (b+1)*width]
    bins = np.minimum(np.ceil(freqs / width).astype(np.int64) - 1, n_bins - 1)
    out = np.zeros(n_bins, dtype=np.float64)
    for b in range(n_bins):
        mask = bins == b
        if mask.any():
            out[b] = float(power[mask].mean())
    total = float(out.sum())
    if total <= 0.0:
        raise GridwardError("periodogram: zero variance")
    return FeatureVector(out / total, "periodogram", n_bins)


def raw_features(series, length: int = RAW_LENGTH) -> FeatureVector:
    """Raw series truncated or zero-padded to a fixed length; the
    fixed-dimension baseline the ACF representation is compared against."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise GridwardError("raw_features: input must be 1-d")
    out = np.zeros(length, dtype=np.float64)
    n = min(length, x.shape[0])
    out[:n] = x[:n]
    return FeatureVector(out, "raw", length)


def extract(series: TimeSeries, method: str = "acf", K: int = 20) -> FeatureVector:
    """Canonical Stage-2 representation of a series.

    For acf/pacf/periodogram the series is first-differenced and the map
    is applied to the result. The raw method skips differencing and
    truncates or pads the original values to RAW_LENGTH (K is ignored).
    """
    if method not in METHODS:
        raise GridwardError(f"unknown feature method {method!r}")
    if method == "raw":
        return raw_features(series.values)
    diffed = difference(series.values)
    try:
        if method == "acf":
            return acf(diffed, K)
        if method == "pacf":
            return pacf(diffed, K)
        return periodogram(diffed, K)
    except GridwardError as e:
        raise GridwardError(
            f"station {series.station.station_id} ({method}): {e}"
        ) from None


def save_features(path, station_ids, labels, X) -> None:
    """Write a feature CSV: station_id,label,f1,...,fK. labels entries may
    be FaultLabel, label name, or None (written empty)."""
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["station_id", "label"] + [f"f{k + 1}" for k in range(X.shape[1])]
        )
        for sid, lab, row in zip(station_ids, labels, X):
            if isinstance(lab, FaultLabel):
                lab = lab.name
            w.writerow(
                [sid, "" if lab is None else lab] + [repr(float(v)) for v in row]
            )


def load_features(path):
    """Inverse of save_features. Returns (station_ids, labels, X) with
    labels as FaultLabel or None."""
    station_ids = []
    labels = []
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["station_id", "label"]:
            raise GridwardError(f"{path}: not a feature CSV")
        width = len(header) - 2
        for ln, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise GridwardError(
                    f"{path} line {ln}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                station_ids.append(int(row[0]))
                vec = [float(v) for v in row[2:]]
            except ValueError as e:
                raise GridwardError(f"{path} line {ln}: {e}") from None
            labels.append(FaultLabel.from_text(row[1]) if row[1] else None)
            rows.append(vec)
    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), width)
    return np.asarray(station_ids, dtype=np.int64), labels, X
