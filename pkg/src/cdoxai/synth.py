"""Seeded synthetic arrival fleets with known per-segment ground truth.

Tracks are built inside the configured terminal area along a near-straight
inbound chord, with headings oscillating around the base course to hit a
target mean heading change, and exact zero-altitude-change runs injected as
level-offs. Because level segments absorb an arbitrary share of the route
length, total distance and entry altitude can be drawn independently of the
class signal: only the mean descent gradient, the segment count, and the
heading-change magnitude carry label information.

In geometric mode the label is the adherence category implied by the
injected level-off count (adherence is exactly (n - k) / n). In rule mode
labels come from applying a supplied fuzzy rule table to the realized,
fuzzified driver features, so the concept is recoverable by construction.

All draws derive from (seed, flight_index), so fleets are reproducible
across platforms; everything is plain float64 numpy arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSpec
from .features import (
    DEFAULT_LEVEL_THRESHOLD,
    FlightFeatures,
    HIGH,
    LOW,
    MEDIUM,
    WeatherRecord,
    assemble_dataset,
    cdocat,
    extract_operational_features,
    is_cdo_segment,
    join_weather,
    label_flight,
    segment_track,
)
from .geo import FEET_PER_NM
from .fexai import RULE_FEATURES, RuleBase, fuzzify
from .ingest import ArrivalTrack, TmaConfig, TrackPoint, clip_to_tma

DEFAULT_TMA = TmaConfig(center_lat=25.273, center_lon=51.608, radius_nm=45.0, altitude_floor_ft=3500.0)

# Adherence targets are drawn inside these per-class bands; the gaps around
# the 0.30/0.55 category boundaries keep the synthetic concept learnable.
ADHERENCE_BANDS = {LOW: (0.05, 0.25), MEDIUM: (0.35, 0.52), HIGH: (0.58, 0.95)}

# Rule mode draws driver targets from the middle of each fuzzy set's
# interval, clear of the projection thresholds.
RULE_MODE_BANDS = {
    "mdrate": {"Low": (0.010, 0.021), "Medium": (0.030, 0.040), "High": (0.049, 0.066)},
    "flt_segments": {"Few": (60, 210), "Moderate": (270, 710), "Many": (790, 880)},
    "mdirection": {"Straight": (0.40, 1.10), "Moderate": (1.55, 1.95), "Complex": (2.40, 3.50)},
}

_EPOCH = 1_704_067_200  # fleet time origin; flights are spaced 2 h apart


@dataclass(frozen=True)
class SynthSpec:
    """Distributional knobs for one synthetic fleet."""

    n_flights: int = 1000
    seed: int = 7
    label_mode: str = "geometric"  # "geometric" | "rule"
    class_weights: tuple[float, float, float] = (0.30, 0.30, 0.40)  # Low/Medium/High
    # geometric mode: monotone maps from the adherence target to the drivers.
    # The jitters are tuned so no single driver separates the classes on its
    # own; models have to combine all three.
    n_base: float = 650.0
    n_slope: float = 560.0
    n_range: tuple[int, int] = (40, 758)
    n_jitter: float = 0.15
    gradient_intercept: float = 0.008
    gradient_slope: float = 0.058
    gradient_jitter: float = 0.25
    mdirection_intercept: float = 0.35
    mdirection_slope: float = 2.6
    mdirection_jitter: float = 0.25
    # direct injection (geometric mode): pin the segment and level-off counts
    fixed_segments: int | None = None
    fixed_level_offs: int | None = None
    # route geometry, independent of the label signal
    distance_range_nm: tuple[float, float] = (28.0, 62.0)
    entry_alt_range_ft: tuple[float, float] = (8500.0, 13500.0)
    end_margin_ft: float = 300.0
    speed_range_kt: tuple[float, float] = (150.0, 250.0)
    level_run_mean: float = 3.0
    level_threshold: float = DEFAULT_LEVEL_THRESHOLD
    tma: TmaConfig = DEFAULT_TMA
    rule_table: RuleBase | None = None

    def __post_init__(self):
        if self.n_flights < 0:
            raise InfeasibleSpec("n_flights must be non-negative")
        if self.label_mode not in ("geometric", "rule"):
            raise InfeasibleSpec(f"unknown label_mode {self.label_mode!r}")
        if self.label_mode == "rule" and self.rule_table is None:
            raise InfeasibleSpec("rule mode needs a rule_table")
        if self.n_range[0] < 4:
            raise InfeasibleSpec("n_range minimum must be at least 4")


@dataclass
class TrackTruth:
    """Generator-side ground truth for one flight."""

    flight_id: str
    n_segments: int
    level_count: int
    segment_compliance: np.ndarray  # bool per segment
    adherence: float  # (n - k) / n
    cdocat: str
    intended_class: str | None = None  # geometric mode
    antecedent: tuple[str, str, str] | None = None  # rule mode
    rule_label: str | None = None  # rule mode


@dataclass
class FleetDataset:
    """A generated fleet pushed through ingest and feature extraction."""

    spec: SynthSpec
    tracks: list[ArrivalTrack]
    weather: dict[str, dict[str, WeatherRecord]]
    features: list[FlightFeatures]
    matrix: np.ndarray  # (n, 29)
    labels: list[str]  # geometric: cdocat; rule: Low/NotLow from the table
    cdocat_labels: list[str]
    adherence: np.ndarray
    truths: list[TrackTruth]


def _rng_for(spec: SynthSpec, flight_index: int, stream: int, attempt: int = 0):
    return np.random.default_rng(
        np.random.SeedSequence([spec.seed, flight_index, stream, attempt])
    )


def _jittered(rng, base: float, jitter: float) -> float:
    return base * rng.uniform(1.0 - jitter, 1.0 + jitter)


def _adjust_level_count(n: int, k: int, target_class: str) -> int:
    """Nudge k so that cdocat((n - k) / n) lands in the intended class."""
    k = int(np.clip(k, 1, n - 1))
    for _ in range(n):
        if cdocat((n - k) / n) == target_class:
            return k
        lo, hi = ADHERENCE_BANDS[target_class]
        k += 1 if (n - k) / n > hi else -1
        if not 1 <= k <= n - 1:
            raise InfeasibleSpec(f"cannot reach class {target_class} with n={n}")
    raise InfeasibleSpec(f"cannot reach class {target_class} with n={n}")


def _draw_gradient(spec: SynthSpec, rng, a: float) -> float:
    return max(
        spec.gradient_intercept,
        _jittered(rng, spec.gradient_intercept + spec.gradient_slope * a, spec.gradient_jitter),
    )


def _draw_mdirection(spec: SynthSpec, rng, a: float) -> float:
    return float(
        np.clip(
            _jittered(rng, spec.mdirection_intercept + spec.mdirection_slope * a, spec.mdirection_jitter),
            0.15,
            3.8,
        )
    )


def _draw_geometric_targets(spec: SynthSpec, rng):
    if spec.fixed_segments is not None or spec.fixed_level_offs is not None:
        n = spec.fixed_segments if spec.fixed_segments is not None else 10
        k = spec.fixed_level_offs if spec.fixed_level_offs is not None else 0
        if not 0 <= k < n:
            raise InfeasibleSpec(f"need 0 <= level-offs < segments, got k={k}, n={n}")
        a = (n - k) / n
        return cdocat(a), None, n, k, _draw_gradient(spec, rng, a), _draw_mdirection(spec, rng, a)
    cls = (LOW, MEDIUM, HIGH)[rng.choice(3, p=np.asarray(spec.class_weights) / sum(spec.class_weights))]
    a_lo, a_hi = ADHERENCE_BANDS[cls]
    a = rng.uniform(a_lo, a_hi)
    n = int(np.clip(round(_jittered(rng, spec.n_base - spec.n_slope * a, spec.n_jitter)), *spec.n_range))
    k = _adjust_level_count(n, int(round((1.0 - a) * n)), cls)
    return cls, None, n, k, _draw_gradient(spec, rng, a), _draw_mdirection(spec, rng, a)


def _draw_rule_targets(spec: SynthSpec, rng):
    table = spec.rule_table
    rule = table.rules[rng.integers(0, len(table.rules))]
    mdr_set, fs_set, md_set = rule.antecedent
    g_lo, g_hi = RULE_MODE_BANDS["mdrate"][mdr_set]
    n_lo, n_hi = RULE_MODE_BANDS["flt_segments"][fs_set]
    m_lo, m_hi = RULE_MODE_BANDS["mdirection"][md_set]
    n = int(rng.integers(n_lo, n_hi + 1))
    k = max(1, int(round(rng.uniform(0.03, 0.25) * n)))
    k = min(k, n - 1)
    gradient = rng.uniform(g_lo, g_hi)
    mdirection = rng.uniform(m_lo, m_hi)
    return None, rule.antecedent, n, k, gradient, mdirection


def _level_layout(rng, n: int, k: int, run_mean: float) -> np.ndarray:
    """Boolean mask of length n marking level segments, grouped into runs."""
    mask = np.zeros(n, dtype=bool)
    if k == 0:
        return mask
    m = n - k
    n_runs = int(min(max(1, round(k / max(run_mean, 1.0))), k, m + 1))
    lengths = np.ones(n_runs, dtype=np.int64)
    extra = rng.multinomial(k - n_runs, np.full(n_runs, 1.0 / n_runs))
    lengths += extra
    gaps = np.sort(rng.choice(m + 1, size=n_runs, replace=False))
    run_at_gap = dict(zip(gaps.tolist(), lengths.tolist()))
    seq = []
    for i in range(m + 1):
        if i in run_at_gap:
            seq.extend([True] * run_at_gap[i])
        if i < m:
            seq.append(False)
    return np.asarray(seq, dtype=bool)


def gen_track(
    spec: SynthSpec, flight_index: int, attempt: int = 0
) -> tuple[ArrivalTrack, TrackTruth]:
    """One deterministic synthetic arrival with its ground truth.

    The track descends at an exact per-flight gradient on descending
    segments and holds altitude exactly on the injected level runs, so the
    compliance flags are unambiguous for any sane level threshold.
    """
    rng = _rng_for(spec, flight_index, 0, attempt)
    if spec.label_mode == "geometric":
        cls, antecedent, n, k, gradient, mdirection = _draw_geometric_targets(spec, rng)
    else:
        cls, antecedent, n, k, gradient, mdirection = _draw_rule_targets(spec, rng)

    level_mask = _level_layout(rng, n, k, spec.level_run_mean)
    m = n - k

    distance = rng.uniform(*spec.distance_range_nm)
    entry_alt = rng.uniform(*spec.entry_alt_range_ft)
    # Fraction of the route length flown descending; clipped so the descent
    # never crosses the altitude floor. Level runs absorb the rest.
    f_max = (entry_alt - spec.tma.altitude_floor_ft - spec.end_margin_ft) / (
        gradient * FEET_PER_NM * distance
    )
    frac = min(rng.uniform(0.35, 0.70), 0.95 * f_max)
    if frac <= 0:
        raise InfeasibleSpec("no feasible descending share for the drawn altitudes")
    d_desc = frac * distance / m
    d_level = (1.0 - frac) * distance / k if k else 0.0
    d = np.where(level_mask, d_level, d_desc)

    # Inbound chord with alternating heading wiggles of controlled size.
    sector_axis = 0.0 if rng.random() < 0.5 else 90.0
    entry_bearing = (sector_axis + rng.uniform(-38.0, 38.0)) % 360.0
    base_heading = (entry_bearing + 180.0) % 360.0
    signs = np.ones(n)
    signs[1::2] = -1.0
    if rng.random() < 0.5:
        signs = -signs
    # Amplitude scaled so the mean over n segments (the last one repeats its
    # heading) lands on the target.
    amp = mdirection * n / max(n - 1, 1) / 2.0
    wiggle = signs * amp * rng.uniform(0.9, 1.1, size=n)
    headings = (base_heading + wiggle) % 360.0

    r0 = 0.90 * spec.tma.radius_nm
    theta = np.radians(entry_bearing)
    x0, y0 = r0 * np.sin(theta), r0 * np.cos(theta)
    rad = np.radians(headings)
    x = x0 + np.concatenate([[0.0], np.cumsum(d * np.sin(rad))])
    y = y0 + np.concatenate([[0.0], np.cumsum(d * np.cos(rad))])
    lat = spec.tma.center_lat + y / 60.0
    lon = spec.tma.center_lon + x / (60.0 * np.cos(np.radians(spec.tma.center_lat)))

    d_alt = np.where(level_mask, 0.0, -gradient * d * FEET_PER_NM)
    alt = entry_alt + np.concatenate([[0.0], np.cumsum(d_alt)])

    speed = rng.uniform(*spec.speed_range_kt)
    dt = np.maximum(1, np.round(d / speed * 3600.0)).astype(np.int64)
    t0 = _EPOCH + flight_index * 7200
    stamps = t0 + np.concatenate([[0], np.cumsum(dt)])
    gspeed = d / (dt / 3600.0)

    point_heading = np.concatenate([headings, headings[-1:]])
    point_speed = np.concatenate([gspeed, gspeed[-1:]])
    flight_id = f"F{flight_index:05d}"
    points = [
        TrackPoint(
            timestamp=int(stamps[i]),
            lat=float(lat[i]),
            lon=float(lon[i]),
            alt=float(alt[i]),
            gspeed=float(point_speed[i]),
            heading=float(point_heading[i]),
        )
        for i in range(n + 1)
    ]
    track = ArrivalTrack(flight_id, points)

    if alt.min() < spec.tma.altitude_floor_ft:
        raise InfeasibleSpec(f"{flight_id}: generated track dips below the floor")
    if np.hypot(x, y).max() > 0.98 * spec.tma.radius_nm:
        raise InfeasibleSpec(f"{flight_id}: generated track leaves the terminal area")

    adherence = (n - k) / n
    truth = TrackTruth(
        flight_id=flight_id,
        n_segments=n,
        level_count=k,
        segment_compliance=~level_mask,
        adherence=adherence,
        cdocat=cdocat(adherence),
        intended_class=cls,
        antecedent=antecedent,
    )
    return track, truth


_WEATHER_KINDS = ["clear", "clouds", "dust", "haze", "mist", "rain", "thunderstorm", "other"]
_WEATHER_WEIGHTS = [0.45, 0.20, 0.12, 0.10, 0.05, 0.05, 0.02, 0.01]


def gen_weather(rng) -> dict[str, WeatherRecord]:
    """Plausible hot-climate start/end records; pure plumbing realism."""
    out = {}
    for point in ("start", "end"):
        temp = rng.uniform(65.0, 108.0)
        out[point] = WeatherRecord(
            temp=temp,
            feels_like=temp + rng.uniform(-2.0, 8.0),
            pressure=rng.uniform(998.0, 1022.0),
            humidity=rng.uniform(20.0, 90.0),
            dew_point=temp - rng.uniform(10.0, 40.0),
            clouds=rng.uniform(0.0, 80.0),
            wind_speed=rng.uniform(0.0, 25.0),
            wind_deg=rng.uniform(0.0, 360.0),
            weather=_WEATHER_KINDS[rng.choice(len(_WEATHER_KINDS), p=_WEATHER_WEIGHTS)],
        )
    return out


_MAX_ATTEMPTS = 25


def gen_fleet(spec: SynthSpec) -> FleetDataset:
    """Generate, ingest, and featurize a whole fleet.

    Every flight's compliance flags are checked against the feature module's
    own segment predicate; in rule mode the realized fuzzified antecedent
    must match the drawn one (rare misses redraw deterministically).
    """
    tracks = []
    weather = {}
    feature_rows = []
    truths = []
    labels = []
    for i in range(spec.n_flights):
        for attempt in range(_MAX_ATTEMPTS):
            track, truth = gen_track(spec, i, attempt)
            clipped = clip_to_tma(track, spec.tma)
            if len(clipped) != len(track):
                raise InfeasibleSpec(f"{track.flight_id}: clipping altered a synthetic track")
            segments = segment_track(clipped)
            flags = np.array(
                [is_cdo_segment(s, spec.level_threshold) for s in segments], dtype=bool
            )
            if not np.array_equal(flags, truth.segment_compliance):
                raise InfeasibleSpec(
                    f"{track.flight_id}: generator and scorer disagree on compliance"
                )
            ff = extract_operational_features(clipped, segments, spec.tma)
            label_flight(ff, segments, spec.level_threshold)
            if spec.label_mode == "rule":
                realized = fuzzify([getattr(ff, f) for f in RULE_FEATURES])
                if realized != truth.antecedent:
                    continue  # redraw; deterministic via the attempt counter
                rule = spec.rule_table.lookup(realized)
                truth.rule_label = rule.consequent
                label = rule.consequent
            else:
                if ff.cdocat != truth.cdocat:
                    raise InfeasibleSpec(
                        f"{track.flight_id}: label disagreement between generator and features"
                    )
                label = ff.cdocat
            break
        else:
            raise InfeasibleSpec(f"flight {i}: no feasible draw in {_MAX_ATTEMPTS} attempts")
        wx = gen_weather(_rng_for(spec, i, 1))
        join_weather(ff, wx["start"], wx["end"])
        tracks.append(track)
        weather[track.flight_id] = wx
        feature_rows.append(ff)
        truths.append(truth)
        labels.append(label)

    if feature_rows:
        matrix, cdocat_labels, adherence = assemble_dataset(feature_rows)
    else:
        matrix = np.zeros((0, 29), dtype=np.float64)
        cdocat_labels = []
        adherence = np.zeros(0, dtype=np.float64)
    return FleetDataset(
        spec=spec,
        tracks=tracks,
        weather=weather,
        features=feature_rows,
        matrix=matrix,
        labels=labels,
        cdocat_labels=cdocat_labels,
        adherence=adherence,
        truths=truths,
    )
