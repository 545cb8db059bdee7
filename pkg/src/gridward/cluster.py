"""Intra-class subgroup discovery: min-max normalization, dynamic time
warping, and k-medoids (PAM) over a precomputed DTW distance matrix.

DTW here uses the absolute pointwise cost |u_i - v_j| (not its square)
and the step set {(1,0), (0,1), (1,1)}. Distances are raw path costs;
they are not divided by path or series length, so series of different
lengths contribute larger absolute costs. An optional band constrains
paths to |i - j| <= band around the diagonal; band = max(m, n) is
equivalent to no band. DTW satisfies identity and symmetry but not the
triangle inequality, so the matrix fed to PAM is a dissimilarity, not a
metric.

PAM: seeded uniform initial medoids, nearest-medoid assignment (ties go
to the lowest medoid sample index), then a greedy swap loop that accepts
only strict cost decreases. The strictness guarantees termination: each
accepted swap lowers a bounded total, and the swap space is finite. With
a fixed seed the whole procedure is deterministic; restarts keep the
lowest-cost result (first restart wins ties).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from ._backend import dtw_cost as _dtw_cost_kernel
from ._backend import dtw_path as _dtw_path_kernel
from .types import GridwardError, StationMeta, TimeSeries


@dataclass(frozen=True)
class NormalizedSeries:
    """A series rescaled to [0, 1], keeping a reference to its station."""

    values: np.ndarray
    station: StationMeta = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] < 1:
            raise GridwardError("NormalizedSeries: values must be a 1-d sequence")
        if not np.all(np.isfinite(v)):
            raise GridwardError("NormalizedSeries: non-finite value")
        if v.min() < 0.0 or v.max() > 1.0:
            raise GridwardError("NormalizedSeries: values outside [0, 1]")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class WarpingPath:
    """Monotone alignment between two sequences, 1-based index pairs
    running from (1, 1) to (m, n)."""

    pairs: np.ndarray  # (k, 2) int64

    def __post_init__(self):
        p = np.asarray(self.pairs, dtype=np.int64)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 1:
            raise GridwardError("WarpingPath: expected a (k, 2) index array")
        if p[0, 0] != 1 or p[0, 1] != 1:
            raise GridwardError("WarpingPath: must start at (1, 1)")
        d = np.diff(p, axis=0)
        if d.size and (
            d.min() < 0 or d.max() > 1 or np.any((d[:, 0] == 0) & (d[:, 1] == 0))
        ):
            raise GridwardError("WarpingPath: steps must advance by 0 or 1")
        object.__setattr__(self, "pairs", p)

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def __iter__(self):
        return iter(map(tuple, self.pairs))


@dataclass
class Clustering:
    L: int
    medoids: np.ndarray  # sample indices, ascending
    assignment: np.ndarray  # sample -> cluster id (position in medoids)
    total_cost: float
    per_cluster_avg: np.ndarray  # mean member-to-medoid DTW per cluster
    cost_history: list = field(default_factory=list)

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.L)


def _series_values(obj) -> np.ndarray:
    if isinstance(obj, (TimeSeries, NormalizedSeries)):
        v = obj.values
    else:
        v = np.ascontiguousarray(obj, dtype=np.float64)
        if v.ndim != 1:
            raise GridwardError("expected a 1-d sequence")
        if v.shape[0] < 1:
            raise GridwardError("expected a non-empty sequence")
        if not np.all(np.isfinite(v)):
            raise GridwardError("non-finite value in sequence")
    return v


def minmax_normalize(series) -> NormalizedSeries:
    """Rescale to [0, 1]. Constant input maps to all 0.5 rather than
    dividing by zero; any constant is equally far from both endpoints."""
    station = series.station if isinstance(series, TimeSeries) else None
    v = _series_values(series)
    lo = v.min()
    span = v.max() - lo
    if span == 0.0:
        out = np.full(v.shape[0], 0.5)
    else:
        out = (v - lo) / span
    return NormalizedSeries(values=out, station=station)


def _check_band(band, m: int, n: int) -> int:
    if band is None:
        return -1
    band = int(band)
    if band < abs(m - n):
        raise GridwardError("band excludes all valid paths")
    return band


def dtw(u, v, band=None):
    """Full DTW: returns (distance, WarpingPath). band=None is exact."""
    uv = _series_values(u)
    vv = _series_values(v)
    b = _check_band(band, uv.shape[0], vv.shape[0])
    cost, ai, bj = _dtw_path_kernel(uv, vv, b)
    pairs = np.stack(
        [ai.astype(np.int64) + 1, bj.astype(np.int64) + 1], axis=1
    )
    return float(cost), WarpingPath(pairs=pairs)


def dtw_distance(u, v, band=None) -> float:
    """Distance only; skips path backtracking and its O(mn) matrix."""
    uv = _series_values(u)
    vv = _series_values(v)
    b = _check_band(band, uv.shape[0], vv.shape[0])
    return float(_dtw_cost_kernel(uv, vv, b))


def dtw_matrix(samples, band=None) -> np.ndarray:
    """Pairwise DTW distances; symmetric with zero diagonal. Entries are
    independent, so the upper triangle is computed once and mirrored."""
    n = len(samples)
    if n < 2:
        raise GridwardError("dtw_matrix: need at least 2 samples")
    vals = [_series_values(s) for s in samples]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d = dtw_distance(vals[i], vals[j], band)
            out[i, j] = d
            out[j, i] = d
    return out


def _check_dist(dist) -> np.ndarray:
    d = np.asarray(dist, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise GridwardError("pam: distance matrix must be square")
    if not np.all(np.isfinite(d)):
        raise GridwardError("pam: non-finite distance")
    return d


def _assign(dist: np.ndarray, medoids: np.ndarray):
    """Nearest medoid per sample. medoids is ascending, and argmin takes
    the first minimum, so ties resolve to the lowest medoid index."""
    sub = dist[:, medoids]
    assignment = np.argmin(sub, axis=1)
    cost = float(sub[np.arange(dist.shape[0]), assignment].sum())
    return assignment, cost


def _pam_single(dist: np.ndarray, L: int, rng: np.random.Generator):
    n = dist.shape[0]
    medoids = np.sort(rng.choice(n, size=L, replace=False))
    _, cost = _assign(dist, medoids)
    history = [cost]
    is_medoid = np.zeros(n, dtype=bool)
    is_medoid[medoids] = True
    improved = True
    while improved:
        improved = False
        for i in range(L):
            for o in range(n):
                if is_medoid[o]:
                    continue
                trial = medoids.copy()
                trial[i] = o
                trial.sort()
                _, new_cost = _assign(dist, trial)
                # Strict decrease only; accepting equal-cost swaps can
                # cycle forever between tied medoid sets.
                if new_cost < cost:
                    is_medoid[medoids[i]] = False
                    is_medoid[o] = True
                    medoids = trial
                    cost = new_cost
                    history.append(cost)
                    improved = True
                    break
            if improved:
                break
    assignment, cost = _assign(dist, medoids)
    return medoids, assignment, cost, history


def pam(dist, L: int, seed: int = 0, restarts: int = 5) -> Clustering:
    """k-medoids by greedy swap search over a precomputed matrix.

    Each restart draws fresh initial medoids from its own seeded stream;
    the lowest-cost restart wins, earlier restart on ties.
    """
    d = _check_dist(dist)
    n = d.shape[0]
    if not 1 <= L <= n:
        raise GridwardError(f"pam: L must be in [1, {n}], got {L}")
    if restarts < 1:
        raise GridwardError("pam: restarts must be >= 1")
    best = None
    for r in range(restarts):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        )
        medoids, assignment, cost, history = _pam_single(d, L, rng)
        if best is None or cost < best[2]:
            best = (medoids, assignment, cost, history)
    medoids, assignment, cost, history = best
    per_cluster = np.zeros(L, dtype=np.float64)
    for c in range(L):
        members = np.flatnonzero(assignment == c)
        per_cluster[c] = d[members, medoids[c]].mean()
    return Clustering(
        L=L,
        medoids=medoids,
        assignment=assignment.astype(np.int64),
        total_cost=cost,
        per_cluster_avg=per_cluster,
        cost_history=history,
    )


def elbow(
    samples,
    L_range,
    seed: int = 0,
    restarts: int = 5,
    band=None,
    dist=None,
    csv_path: str = None,
):
    """Average intra-cluster DTW distance (mean over clusters of mean
    member-to-medoid distance) per candidate L. Pass dist to reuse a
    precomputed matrix; otherwise it is built from samples once.

    Returns a list of (L, average) tuples, optionally also written as
    CSV with header L,avg_intra_dtw.
    """
    d = _check_dist(dist) if dist is not None else dtw_matrix(samples, band)
    n = d.shape[0]
    rows = []
    for L in L_range:
        if not 1 <= L <= n:
            raise GridwardError(f"elbow: L must be in [1, {n}], got {L}")
        clustering = pam(d, L, seed=seed, restarts=restarts)
        rows.append((int(L), float(clustering.per_cluster_avg.mean())))
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["L", "avg_intra_dtw"])
            for L, avg in rows:
                w.writerow([L, repr(avg)])
    return rows


def geo_export(
    clustering: Clustering,
    stations,
    csv_path: str = None,
    svg_path: str = None,
) -> None:
    """Write cluster membership against station coordinates: a CSV
    `station_id,lat,lon,cluster` and/or an SVG scatter with one color
    per cluster."""
    if len(stations) != clustering.assignment.shape[0]:
        raise GridwardError(
            f"geo_export: {len(stations)} stations but "
            f"{clustering.assignment.shape[0]} assignments"
        )
    if csv_path is None and svg_path is None:
        raise GridwardError("geo_export: no output path given")
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["station_id", "lat", "lon", "cluster"])
            for st, c in zip(stations, clustering.assignment):
                w.writerow(
                    [st.station_id, repr(st.latitude), repr(st.longitude), int(c)]
                )
    if svg_path is not None:
        from .viz import cluster_scatter

        cluster_scatter(
            [(st.latitude, st.longitude) for st in stations],
            clustering.assignment,
            svg_path,
        )
