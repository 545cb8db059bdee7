import csv

import numpy as np
import pytest

from gridward.cluster import (
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
from gridward.types import Channel, GridwardError, StationMeta, TimeSeries

from oracles import dtw_brute, path_cost


def test_minmax_examples():
    assert np.array_equal(minmax_normalize([2.0, 4.0, 6.0]).values, [0.0, 0.5, 1.0])
    assert np.array_equal(minmax_normalize([7.0, 7.0, 7.0]).values, [0.5, 0.5, 0.5])


def test_minmax_keeps_station_and_bounds(rng):
    st = StationMeta(3, "bus-0003", 44.0, -121.0)
    ts = TimeSeries(st, Channel.FREQUENCY, rng.normal(60.0, 0.5, 50))
    ns = minmax_normalize(ts)
    assert ns.station is st
    assert ns.values.min() == 0.0 and ns.values.max() == 1.0
    # plain arrays come back without a station
    assert minmax_normalize([1.0, 2.0]).station is None


def test_normalized_series_rejects_out_of_range():
    with pytest.raises(GridwardError, match="outside"):
        NormalizedSeries(values=np.array([0.0, 1.1]))
    with pytest.raises(GridwardError, match="non-finite"):
        NormalizedSeries(values=np.array([0.0, np.nan]))


def test_warping_path_validation():
    WarpingPath(pairs=np.array([[1, 1], [2, 1], [2, 2], [3, 3]]))
    with pytest.raises(GridwardError, match=r"start at \(1, 1\)"):
        WarpingPath(pairs=np.array([[1, 2], [2, 2]]))
    with pytest.raises(GridwardError, match="advance"):
        WarpingPath(pairs=np.array([[1, 1], [3, 1]]))  # jump of 2
    with pytest.raises(GridwardError, match="advance"):
        WarpingPath(pairs=np.array([[1, 1], [1, 1]]))  # zero step
    with pytest.raises(GridwardError, match=r"\(k, 2\)"):
        WarpingPath(pairs=np.array([1, 1]))


def test_dtw_identity_is_diagonal(rng):
    u = rng.normal(0, 1, 12)
    d, path = dtw(u, u)
    assert d == 0.0
    assert np.array_equal(path.pairs, np.stack([np.arange(1, 13)] * 2, axis=1))


def test_dtw_stretch_example():
    # one-to-many alignment absorbs the repetition at zero cost
    d, path = dtw([0.0, 0.0, 1.0, 1.0], [0.0, 1.0])
    assert d == 0.0
    assert tuple(path.pairs[0]) == (1, 1)
    assert tuple(path.pairs[-1]) == (4, 2)


def test_dtw_matches_brute_force_and_path_cost(rng):
    for _ in range(60):
        m = int(rng.integers(1, 8))
        n = int(rng.integers(1, 8))
        u = rng.normal(0, 1, m)
        v = rng.normal(0, 1, n)
        d, path = dtw(u, v)
        assert d == pytest.approx(dtw_brute(u, v), abs=1e-12)
        # the reported path must actually realize the reported distance
        assert path_cost(u, v, path.pairs) == pytest.approx(d, abs=1e-12)
        assert tuple(path.pairs[-1]) == (m, n)


def test_dtw_symmetry(rng):
    for _ in range(40):
        u = rng.normal(0, 1, int(rng.integers(2, 30)))
        v = rng.normal(0, 1, int(rng.integers(2, 30)))
        assert dtw_distance(u, v) == dtw_distance(v, u)


def test_dtw_band_validation_and_equivalence(rng):
    u = rng.normal(0, 1, 20)
    v = rng.normal(0, 1, 11)
    with pytest.raises(GridwardError, match="band excludes all valid paths"):
        dtw_distance(u, v, band=8)  # |m - n| = 9
    assert dtw_distance(u, v, band=20) == dtw_distance(u, v)
    # tighter bands can only raise the cost
    assert dtw_distance(u, v, band=9) >= dtw_distance(u, v)


def test_dtw_rejects_bad_input():
    with pytest.raises(GridwardError):
        dtw_distance([], [1.0])
    with pytest.raises(GridwardError):
        dtw_distance([1.0, np.inf], [1.0])


def test_dtw_matrix_properties(rng):
    samples = [rng.normal(0, 1, int(rng.integers(5, 15))) for _ in range(6)]
    D = dtw_matrix(samples)
    assert np.array_equal(D, D.T)
    assert np.all(np.diag(D) == 0.0)
    assert D[1, 4] == dtw_distance(samples[1], samples[4])
    # identical samples at distance zero
    D2 = dtw_matrix([samples[0], samples[0], samples[2]])
    assert D2[0, 1] == 0.0
    with pytest.raises(GridwardError, match="at least 2"):
        dtw_matrix([samples[0]])


def _blob_matrix(rng, sizes, spread=0.1, sep=10.0):
    """Planted clusters as 1-d points; |a - b| is a valid dissimilarity."""
    pts = np.concatenate(
        [sep * k + rng.normal(0, spread, s) for k, s in enumerate(sizes)]
    )
    return np.abs(pts[:, None] - pts[None, :]), pts


def test_pam_l_equals_n_and_l1_exhaustive(rng):
    D, _ = _blob_matrix(rng, (4, 4))
    all_l = pam(D, 8, seed=0)
    assert all_l.total_cost == 0.0
    assert np.array_equal(np.sort(all_l.medoids), np.arange(8))
    one = pam(D, 1, seed=0, restarts=3)
    # exhaustive 1-median: the column with the smallest sum
    best = int(np.argmin(D.sum(axis=0)))
    assert one.medoids[0] == best
    assert one.total_cost == pytest.approx(float(D[:, best].sum()))


def test_pam_recovers_planted_blobs(rng):
    D, _ = _blob_matrix(rng, (6, 5, 7))
    got = pam(D, 3, seed=1, restarts=4)
    truth = np.repeat([0, 1, 2], [6, 5, 7])
    # same partition up to cluster relabeling
    for c in range(3):
        members = truth == c
        assert len(set(got.assignment[members])) == 1
    assert len(set(got.assignment[np.array([0, 6, 11])])) == 3


def test_pam_cost_history_non_increasing(rng):
    for trial in range(10):
        n = int(rng.integers(8, 20))
        D = np.abs(rng.normal(0, 1, (n, n)))
        D = (D + D.T) / 2.0
        np.fill_diagonal(D, 0.0)
        c = pam(D, 3, seed=trial, restarts=2)
        h = np.asarray(c.cost_history)
        assert np.all(np.diff(h) < 0.0)  # strict decrease per accepted swap
        assert c.total_cost == h[-1]


def test_pam_assignment_tie_goes_to_lowest_medoid():
    # two anchored blobs ({0,1,5} and {3,4,6}) whose unique best medoids
    # are samples 0 and 3; sample 2 sits exactly 4 away from both
    D = np.array(
        [
            [0.0, 1.0, 4.0, 9.0, 10.0, 1.0, 10.0],
            [1.0, 0.0, 5.0, 10.0, 11.0, 2.0, 11.0],
            [4.0, 5.0, 0.0, 4.0, 5.0, 5.0, 5.0],
            [9.0, 10.0, 4.0, 0.0, 1.0, 10.0, 1.0],
            [10.0, 11.0, 5.0, 1.0, 0.0, 11.0, 2.0],
            [1.0, 2.0, 5.0, 10.0, 11.0, 0.0, 11.0],
            [10.0, 11.0, 5.0, 1.0, 2.0, 11.0, 0.0],
        ]
    )
    c = pam(D, 2, seed=0, restarts=5)
    assert np.array_equal(c.medoids, [0, 3])
    assert D[2, 0] == D[2, 3]
    assert c.assignment[2] == 0


def test_pam_restarts_keep_best(rng):
    D, _ = _blob_matrix(rng, (5, 5, 5, 5))
    multi = pam(D, 4, seed=3, restarts=8)
    singles = [pam(D, 4, seed=3, restarts=1)]
    # restart r of a single run reuses stream keyed by r, so the 8-restart
    # winner can never cost more than the first restart alone
    assert multi.total_cost <= singles[0].total_cost


def test_pam_validation(rng):
    D = np.abs(rng.normal(0, 1, (4, 4)))
    D = (D + D.T) / 2.0
    with pytest.raises(GridwardError, match=r"L must be in \[1, 4\]"):
        pam(D, 5)
    with pytest.raises(GridwardError, match="restarts"):
        pam(D, 2, restarts=0)
    with pytest.raises(GridwardError, match="square"):
        pam(np.ones((2, 3)), 1)
    D[0, 1] = np.nan
    with pytest.raises(GridwardError, match="non-finite"):
        pam(D, 2)


def test_pam_per_cluster_avg_and_sizes(rng):
    D, _ = _blob_matrix(rng, (6, 6))
    c = pam(D, 2, seed=0)
    assert np.array_equal(c.cluster_sizes(), [6, 6])
    for k in range(2):
        members = np.flatnonzero(c.assignment == k)
        assert c.per_cluster_avg[k] == pytest.approx(
            float(D[members, c.medoids[k]].mean())
        )


def test_elbow_rows_and_csv(rng, tmp_path):
    D, _ = _blob_matrix(rng, (5, 5))
    out = tmp_path / "elbow.csv"
    rows = elbow(None, range(1, 11), seed=0, restarts=2, dist=D, csv_path=str(out))
    assert [L for L, _ in rows] == list(range(1, 11))
    assert rows[-1][1] == 0.0  # L = n puts every sample on its own medoid
    # the planted structure flattens the curve from L = 2 on
    assert rows[0][1] > 5 * rows[1][1]
    with open(out) as fh:
        got = list(csv.reader(fh))
    assert got[0] == ["L", "avg_intra_dtw"]
    assert len(got) == 11
    assert float(got[2][1]) == rows[1][1]


def test_elbow_from_raw_samples(rng):
    samples = [minmax_normalize(rng.normal(k, 0.05, 20)) for k in (0, 0, 5, 5)]
    rows = elbow(samples, [2], seed=0, restarts=2)
    D = dtw_matrix(samples)
    assert rows == elbow(None, [2], seed=0, restarts=2, dist=D)
    with pytest.raises(GridwardError, match="elbow: L"):
        elbow(samples, [5], seed=0)


def test_geo_export_csv_and_svg(rng, tmp_path):
    D, _ = _blob_matrix(rng, (3, 3))
    c = pam(D, 2, seed=0)
    stations = [
        StationMeta(i, f"bus-{i:04d}", 44.0 + 0.1 * i, -120.0 - 0.1 * i)
        for i in range(6)
    ]
    csv_path = tmp_path / "clusters.csv"
    svg_path = tmp_path / "clusters.svg"
    geo_export(c, stations, csv_path=str(csv_path), svg_path=str(svg_path))
    with open(csv_path) as fh:
        got = list(csv.reader(fh))
    assert got[0] == ["station_id", "lat", "lon", "cluster"]
    assert len(got) == 7
    assert got[1][0] == "0" and float(got[1][1]) == 44.0
    assert {row[3] for row in got[1:]} == {"0", "1"}
    svg = svg_path.read_text()
    assert svg.count("<circle") == 6
    assert svg.count("#1f77b4") >= 1 and svg.count("#ff7f0e") >= 1


def test_geo_export_validation(rng):
    D, _ = _blob_matrix(rng, (3, 3))
    c = pam(D, 2, seed=0)
    stations = [StationMeta(i, f"bus-{i:04d}", 44.0, -120.0) for i in range(5)]
    with pytest.raises(GridwardError, match="5 stations but 6"):
        geo_export(c, stations, csv_path="unused.csv")
    with pytest.raises(GridwardError, match="no output path"):
        geo_export(c, stations + [StationMeta(5, "bus-0005", 44.0, -120.0)])


def test_dtw_separates_settle_profiles_within_a_class():
    # stations of one fault family land in distinct sub-shapes (zone id =
    # station id mod 5); DTW on normalized series must place same-shape
    # stations closer together than cross-shape ones
    from gridward.ingest import FaultLabel, ScenarioSpec, generate_scenario

    spec = ScenarioSpec(
        fault_class=FaultLabel.GMD2,
        n_stations=10,
        series_length=480,
        onset_index=120,
        onset_jitter=10,
        long_fraction=0.0,
        seed=4,
    )
    series = [minmax_normalize(s) for s, _, _ in generate_scenario(spec)]
    D = dtw_matrix(series)
    for i in range(10):
        same = [D[i, j] for j in range(10) if j != i and j % 5 == i % 5]
        other = [D[i, j] for j in range(10) if j % 5 != i % 5]
        assert max(same) < min(other)
