"""Dataset I/O and the synthetic 9-class fault scenario generator.

Real labeled grid telemetry of this kind is not publicly available, so
the generator synthesizes it: per station, a 30 Hz baseline plus i.i.d.
Gaussian noise, then a class-specific deviation starting at a jittered
onset. Each fault class gets its own parametric family (step, growing
sinusoid, double step, sag, ramp-and-recover, damped sinusoid, spike
train, square wave, chirp), with parameters chosen so the classes stay
pairwise distinguishable through the lens the pipeline actually uses:
the ACF of the first-differenced series. Oscillatory families carry a
constant offset bigger than their envelope, so early post-onset samples
form one contiguous severe run for the Stage-1 detector instead of
dipping back to baseline twice a cycle.

Stations sit in five geographic zones (Pacific Northwest box). A zone
scales the signature amplitude for every class, planting within-class
subgroups; for the ramp family the zone also sets the post-fault
recovery fraction, a value-level difference that survives min-max
normalization so Stage-3 DTW clustering can recover the zones.

Determinism: every station draws from its own PCG64 stream spawned from
(seed, station index), so a scenario is a pure function of its spec and
stations can be generated in any order or in parallel.
"""

import csv
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .types import Channel, FaultLabel, GridwardError, StationMeta, TimeSeries

__all__ = [
    "SignatureParams",
    "ScenarioSpec",
    "DEFAULT_SIGNATURES",
    "fault_signature",
    "generate_scenario",
    "generate_corpus",
    "load_dataset",
    "save_dataset",
    "parse_config_file",
    "scenario_from_config",
]

N_ZONES = 5
# zone centers: Seattle, Portland, Spokane, Bend, Tri-Cities
ZONE_CENTERS = (
    (47.6, -122.3),
    (45.5, -122.7),
    (47.7, -117.4),
    (44.0, -121.3),
    (46.2, -119.1),
)
# symmetric amplitude ladder around 1.0, scaled by geo_attenuation
AMP_OFFSETS = (-1.0, -0.5, 0.0, 0.5, 1.0)
# turns the same ladder into the ramp family's recovery-fraction spread
_SETTLE_GAIN = 7.0 / 3.0


@dataclass(frozen=True)
class SignatureParams:
    """Knobs of one class's parametric deviation shape.

    Field meaning varies by family (documented per family in
    fault_signature): decay is a time constant or a delay in samples,
    frequency is in Hz, slope is a chirp sweep rate in Hz per sample,
    offset is a constant level in units of amplitude, settle is a
    residual/recovery/duty fraction.
    """

    amplitude: float
    decay: float = 0.0
    frequency: float = 0.0
    slope: float = 0.0
    offset: float = 0.0
    settle: float = 0.0


DEFAULT_SIGNATURES = {
    FaultLabel.DroppedLoad: SignatureParams(
        amplitude=0.5, decay=20.0, settle=0.35
    ),
    FaultLabel.OpenAC: SignatureParams(
        amplitude=0.5, decay=240.0, frequency=1.25, offset=-1.15
    ),
    FaultLabel.OpenDC: SignatureParams(amplitude=0.7, decay=12.0, settle=0.8),
    FaultLabel.OpenGenerator: SignatureParams(amplitude=0.8, decay=30.0),
    FaultLabel.GMD2: SignatureParams(amplitude=0.6, settle=0.5),
    FaultLabel.IceStorm: SignatureParams(
        amplitude=0.45, decay=240.0, frequency=1.76, offset=-1.15
    ),
    FaultLabel.McNaryAttack: SignatureParams(
        amplitude=0.4, frequency=3.0, offset=-1.2, settle=0.2
    ),
    FaultLabel.Ponderosa: SignatureParams(
        amplitude=0.45, frequency=0.75, offset=-1.2, settle=0.3
    ),
    FaultLabel.Quake1: SignatureParams(
        amplitude=0.5, decay=400.0, frequency=0.6, slope=0.003, offset=-1.15
    ),
}


def fault_signature(
    label: FaultLabel,
    n: int,
    params: SignatureParams = None,
    sample_rate_hz: float = 30.0,
) -> np.ndarray:
    """Closed-form post-onset deviation of a class, for n samples starting
    at the onset (tau = 0 .. n-1). Added to the baseline by the generator.
    """
    p = params if params is not None else DEFAULT_SIGNATURES[label]
    A = p.amplitude
    tau = np.arange(n, dtype=np.float64)
    rate = sample_rate_hz

    if label == FaultLabel.DroppedLoad:
        # step to -A, fast partial recovery to the settle fraction
        return -A * (p.settle + (1.0 - p.settle) * np.exp(-tau / p.decay))
    if label == FaultLabel.OpenAC:
        # growing sinusoid on a displaced floor; decay acts as growth time
        env = np.minimum(1.0, tau / p.decay)
        return A * (p.offset + env * np.cos(2.0 * np.pi * p.frequency * tau / rate))
    if label == FaultLabel.OpenDC:
        # double step: second drop of settle*A after decay samples
        return -A * (1.0 + p.settle * (tau >= p.decay))
    if label == FaultLabel.OpenGenerator:
        # smooth sag, peak -A at tau = decay, recovers on its own
        k = p.decay
        return -A * (tau / k) * np.exp(1.0 - tau / k)
    if label == FaultLabel.GMD2:
        # ramp to -A, hold, then recover by the settle fraction; phase
        # lengths scale with the post-onset span so short test series
        # keep the same normalized shape
        r1 = max(2.0, round(0.15 * n))
        h_end = round(0.45 * n)
        r2 = max(2.0, round(0.15 * n))
        ramp = np.minimum(tau / r1, 1.0)
        rec = np.clip((tau - h_end) / r2, 0.0, 1.0)
        return -A * (ramp - p.settle * rec)
    if label == FaultLabel.IceStorm:
        env = np.exp(-tau / p.decay)
        return A * (p.offset + env * np.cos(2.0 * np.pi * p.frequency * tau / rate))
    if label in (FaultLabel.McNaryAttack, FaultLabel.Ponderosa):
        # pulse train on a displaced floor; settle is the duty cycle
        period = rate / p.frequency
        width = round(p.settle * period)
        in_pulse = (tau % period) < width
        return A * (p.offset - in_pulse.astype(np.float64))
    if label == FaultLabel.Quake1:
        # chirp: instantaneous frequency frequency + slope*tau, decaying
        env = np.exp(-tau / p.decay)
        phase = 2.0 * np.pi * (p.frequency * tau + 0.5 * p.slope * tau * tau) / rate
        return A * (p.offset + env * np.cos(phase))
    raise GridwardError(f"no signature family for {label!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    fault_class: FaultLabel
    n_stations: int = 126
    series_length: int = 1802
    baseline: float = 60.0
    noise_sigma: float = 0.002
    onset_index: int = 600
    onset_jitter: int = 900
    amp_jitter: float = 0.25
    baseline_jitter: float = 0.15
    signature_params: SignatureParams = None
    geo_attenuation: float = 0.3
    seed: int = 0
    channel: Channel = Channel.FREQUENCY
    sample_rate_hz: float = 30.0
    long_fraction: float = 0.1
    long_length: int = 3000
    station_id_offset: int = 0

    def __post_init__(self):
        if not isinstance(self.fault_class, FaultLabel):
            raise GridwardError(f"invalid fault_class: {self.fault_class!r}")
        if self.n_stations < 1:
            raise GridwardError("n_stations must be >= 1")
        if self.noise_sigma <= 0:
            raise GridwardError("noise_sigma must be > 0")
        if not 2 <= self.onset_index < self.series_length:
            raise GridwardError(
                f"onset_index must satisfy 2 <= onset < series_length, got "
                f"{self.onset_index} vs {self.series_length}"
            )
        if self.onset_jitter < 0:
            raise GridwardError("onset_jitter must be >= 0")
        if self.onset_index + self.onset_jitter >= self.series_length:
            raise GridwardError("onset_index + onset_jitter must stay in range")
        if not 0.0 <= self.amp_jitter < 1.0:
            raise GridwardError("amp_jitter must lie in [0, 1)")
        if self.baseline_jitter < 0.0:
            raise GridwardError("baseline_jitter must be >= 0")
        if not 0.0 <= self.long_fraction <= 1.0:
            raise GridwardError("long_fraction must lie in [0, 1]")
        if self.long_length < self.series_length:
            raise GridwardError("long_length must be >= series_length")
        if not 0.0 <= self.geo_attenuation < 1.0:
            raise GridwardError("geo_attenuation must lie in [0, 1)")
        if self.station_id_offset < 0:
            raise GridwardError("station_id_offset must be >= 0")


def _station_rng(seed: int, station_id: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(1, station_id)))
    )


def _scenario_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    )


def generate_scenario(spec: ScenarioSpec):
    """Synthesize one fault class across spec.n_stations stations.

    Returns a list of (TimeSeries, FaultLabel, StationMeta) triples.
    Deterministic for a fixed spec: each station owns a PRNG stream keyed
    by its id, and the long-series lottery draws from a separate
    scenario-level stream.
    """
    params = (
        spec.signature_params
        if spec.signature_params is not None
        else DEFAULT_SIGNATURES[spec.fault_class]
    )
    n_long = int(round(spec.long_fraction * spec.n_stations))
    long_set = set()
    if n_long > 0:
        order = _scenario_rng(spec.seed).permutation(spec.n_stations)
        long_set = set(int(i) for i in order[:n_long])

    out = []
    for i in range(spec.n_stations):
        sid = spec.station_id_offset + i
        rng = _station_rng(spec.seed, sid)
        zone = sid % N_ZONES
        base_lat, base_lon = ZONE_CENTERS[zone]
        lat = base_lat + rng.uniform(-0.8, 0.8)
        lon = base_lon + rng.uniform(-0.9, 0.9)
        onset = spec.onset_index + int(rng.integers(0, spec.onset_jitter + 1))
        # station-level spread on top of the zone ladder; cancels out of
        # autocorrelation features and min-max normalization, but keeps
        # raw value vectors from lining up across stations
        amp_station = 1.0 + rng.uniform(-spec.amp_jitter, spec.amp_jitter)
        # each bus holds its own operating point; a constant shift that
        # differencing and min-max normalization both remove
        level = spec.baseline + rng.uniform(
            -spec.baseline_jitter, spec.baseline_jitter
        )
        T = spec.long_length if i in long_set else spec.series_length

        amp_factor = (1.0 + spec.geo_attenuation * AMP_OFFSETS[zone]) * amp_station
        p = replace(params, amplitude=params.amplitude * amp_factor)
        if spec.fault_class == FaultLabel.GMD2:
            settle = params.settle * (
                1.0 + _SETTLE_GAIN * spec.geo_attenuation * AMP_OFFSETS[zone]
            )
            p = replace(p, settle=float(np.clip(settle, 0.02, 0.98)))

        values = level + rng.normal(0.0, spec.noise_sigma, T)
        values[onset:] += fault_signature(
            spec.fault_class, T - onset, p, spec.sample_rate_hz
        )

        station = StationMeta(sid, f"bus-{sid:04d}", lat, lon)
        series = TimeSeries(station, spec.channel, values, spec.sample_rate_hz)
        out.append((series, spec.fault_class, station))
    return out


def generate_corpus(
    seed: int = 0,
    minor_count: int = 126,
    major_counts: tuple = (560, 559),
    **overrides,
):
    """The standard multi-class corpus: two consolidated classes with a
    few hundred examples each, the remaining seven with minor_count each.

    Returns a dataset list of (TimeSeries, FaultLabel) pairs. Extra
    keyword arguments override ScenarioSpec fields (series_length,
    noise_sigma, ...). With the defaults this yields 2001 series.
    """
    majors = (FaultLabel.DroppedLoad, FaultLabel.OpenAC)
    data = []
    offset = 0
    for label in FaultLabel:
        count = (
            major_counts[majors.index(label)] if label in majors else minor_count
        )
        spec = ScenarioSpec(
            fault_class=label,
            n_stations=count,
            seed=seed,
            station_id_offset=offset,
            **overrides,
        )
        data.extend((series, lab) for series, lab, _ in generate_scenario(spec))
        offset += count
    return data


# ---------------------------------------------------------------------------
# CSV round-trip

_HEADER = ["station_id", "name", "lat", "lon", "channel", "label", "t", "value"]


def save_dataset(data, path) -> None:
    """Write (TimeSeries, label-or-None) pairs to CSV, one row per sample,
    full round-trip float precision, t starting at 1."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(_HEADER)
            for item in data:
                series, label = item[0], item[1]  # pairs or scenario triples
                st = series.station
                lab = label.name if label is not None else ""
                if any(c in st.name for c in ',"\r\n'):
                    # rare path: let the csv module quote awkward names
                    for t, v in enumerate(series.values.tolist(), start=1):
                        w.writerow(
                            [st.station_id, st.name, repr(st.latitude),
                             repr(st.longitude), series.channel.value, lab, t,
                             repr(v)]
                        )
                    continue
                head = (
                    f"{st.station_id},{st.name},{st.latitude!r},{st.longitude!r},"
                    f"{series.channel.value},{lab},"
                )
                fh.writelines(
                    head + f"{t},{v!r}\n"
                    for t, v in enumerate(series.values.tolist(), start=1)
                )
    except OSError as e:
        raise GridwardError(f"cannot write dataset to {path}: {e}") from None


def _finish_group(rows, path, seen_ids, out, schema):
    if not rows:
        return
    sid, name, lat, lon, channel, label = rows[0][1:7]
    for ln, *rest in rows[1:]:
        if rest[:6] != [sid, name, lat, lon, channel, label]:
            raise GridwardError(
                f"{path} line {ln}: station metadata changed mid-group"
            )
    if sid in seen_ids:
        raise GridwardError(f"{path}: station_id {sid} appears in two groups")
    seen_ids.add(sid)
    prev_t = None
    values = []
    for ln, *rest in rows:
        t, v = rest[6], rest[7]
        if prev_t is not None and t <= prev_t:
            raise GridwardError(f"{path} line {ln}: t not increasing")
        prev_t = t
        values.append(v)
    if schema is not None and channel != schema:
        return
    station = StationMeta(sid, name, lat, lon)
    series = TimeSeries(station, Channel.from_text(channel), np.asarray(values))
    out.append((series, FaultLabel.from_text(label) if label else None))


def load_dataset(path, schema: str = None):
    """Read a dataset CSV back into (TimeSeries, label-or-None) pairs.

    Rows must be grouped by station (a group is a maximal run of rows with
    the same station_id) and ordered by t within a group. schema, when
    given, keeps only series of that channel ("frequency", ...).
    """
    out = []
    seen = set()
    group = []
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise GridwardError(f"cannot read dataset from {path}: {e}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _HEADER:
            raise GridwardError(f"{path}: bad or missing header")
        for ln, row in enumerate(reader, start=2):
            if len(row) != len(_HEADER):
                raise GridwardError(
                    f"{path} line {ln}: expected {len(_HEADER)} fields, got {len(row)}"
                )
            try:
                sid = int(row[0])
                lat = float(row[2])
                lon = float(row[3])
                t = int(row[6])
                v = float(row[7])
            except ValueError as e:
                raise GridwardError(f"{path} line {ln}: {e}") from None
            if not math.isfinite(v):
                raise GridwardError(
                    f"{path} line {ln}: station {sid} sample {t}: non-finite value"
                )
            if group and group[-1][1] != sid:
                _finish_group(group, path, seen, out, schema)
                group = []
            group.append([ln, sid, row[1], lat, lon, row[4], row[5], t, v])
        _finish_group(group, path, seen, out, schema)
    return out


# ---------------------------------------------------------------------------
# plain-text config files: `key = value` per line, # comments

def parse_config_file(path) -> dict:
    opts = {}
    try:
        fh = open(path)
    except OSError as e:
        raise GridwardError(f"cannot read config {path}: {e}") from None
    with fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise GridwardError(f"{path} line {ln}: expected `key = value`")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not key or not value:
                raise GridwardError(f"{path} line {ln}: expected `key = value`")
            if key in opts:
                raise GridwardError(f"{path} line {ln}: duplicate key {key!r}")
            opts[key] = value
    return opts


def scenario_from_config(path) -> ScenarioSpec:
    """Build a ScenarioSpec from a config file; unknown keys are rejected."""
    opts = parse_config_file(path)
    spec_fields = {f.name: f.type for f in fields(ScenarioSpec)}
    kwargs = {}
    for key, value in opts.items():
        if key not in spec_fields:
            valid = ", ".join(sorted(spec_fields))
            raise GridwardError(f"unknown config key {key!r}; valid keys: {valid}")
        if key == "fault_class":
            kwargs[key] = FaultLabel.from_text(value)
        elif key == "channel":
            kwargs[key] = Channel.from_text(value)
        elif key in (
            "n_stations",
            "series_length",
            "onset_index",
            "onset_jitter",
            "seed",
            "long_length",
            "station_id_offset",
        ):
            kwargs[key] = int(value)
        elif key == "signature_params":
            raise GridwardError("signature_params cannot be set from a config file")
        else:
            kwargs[key] = float(value)
    if "fault_class" not in kwargs:
        raise GridwardError("config must set fault_class")
    return ScenarioSpec(**kwargs)
