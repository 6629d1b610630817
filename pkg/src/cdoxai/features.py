"""Per-flight feature engineering and adherence labeling.

A flight's arrival is described by 29 numeric features: 11 operational values
derived from the clipped track plus 9 weather values for each of the entry
and exit points. Adherence is the fraction of track segments flown as a
genuine descent, and the categorical label buckets that fraction at 30% and
55%.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, fields

import numpy as np

from .errors import (
    EmptyFile,
    EmptySegments,
    IncompleteRow,
    MalformedRow,
    MissingColumn,
    OutOfRange,
    ZeroLengthSegment,
)
from .geo import FEET_PER_NM, great_circle_nm, heading_change_deg
from .ingest import EAST, NORTH, ArrivalTrack, TmaConfig, TrackPoint, entry_sector

LOW = "Low"
MEDIUM = "Medium"
HIGH = "High"
CDOCAT_CLASSES = (LOW, MEDIUM, HIGH)

# Adherence fraction below which a flight is Low, and from which it is High.
CDOCAT_LOW_THRESHOLD = 0.30
CDOCAT_HIGH_THRESHOLD = 0.55

# Minimum dimensionless descent gradient (ft sunk per ft traveled) for a
# segment to count as descending rather than a level-off.
DEFAULT_LEVEL_THRESHOLD = 0.005

WEATHER_FIELDS = [
    "temp",
    "feels_like",
    "pressure",
    "humidity",
    "dew_point",
    "clouds",
    "wind_speed",
    "wind_deg",
    "weather",
]

# Controlled vocabulary for the categorical weather condition; anything else
# falls back to "other".
WEATHER_CODES = {
    "clear": 0,
    "clouds": 1,
    "rain": 2,
    "mist": 3,
    "haze": 4,
    "dust": 5,
    "thunderstorm": 6,
    "other": 7,
}

OPERATIONAL_FEATURES = [
    "sector",
    "altitude",
    "mspeed",
    "mdrate",
    "flt_segments",
    "distance_nm",
    "mdirection",
    "start_lati",
    "start_long",
    "end_lati",
    "end_long",
]

FEATURE_COLUMNS = (
    OPERATIONAL_FEATURES
    + [f"start_{w}" for w in WEATHER_FIELDS]
    + [f"end_{w}" for w in WEATHER_FIELDS]
)

SECTOR_CODES = {NORTH: 0.0, EAST: 1.0}

WEATHER_CSV_COLUMNS = ["flight_id", "point"] + WEATHER_FIELDS


@dataclass(frozen=True)
class Segment:
    """Interval between two consecutive retained track points."""

    start: TrackPoint
    end: TrackPoint
    dist_nm: float
    d_alt_ft: float  # end.alt - start.alt, negative while descending
    heading_change_deg: float  # min(|dh|, 360 - |dh|), in [0, 180]


@dataclass
class WeatherRecord:
    """Nine weather observations at one end of the arrival route."""

    temp: float  # deg F
    feels_like: float  # deg F
    pressure: float  # hPa
    humidity: float  # percent
    dew_point: float  # deg F
    clouds: float  # percent
    wind_speed: float  # mph
    wind_deg: float  # degrees in [0, 360)
    weather: str  # condition keyword, see WEATHER_CODES


@dataclass
class FlightFeatures:
    """The full 29-feature record for one flight, plus its label."""

    flight_id: str
    sector: str | None = None
    altitude: float | None = None
    mspeed: float | None = None
    mdrate: float | None = None
    flt_segments: int | None = None
    distance_nm: float | None = None
    mdirection: float | None = None
    start_lati: float | None = None
    start_long: float | None = None
    end_lati: float | None = None
    end_long: float | None = None
    weather: dict[str, float] | None = None  # 18 start_*/end_* values, coded
    cdo_adherence: float | None = None
    cdocat: str | None = None

    def row(self) -> np.ndarray:
        """The 29 numeric values in canonical column order."""
        missing = self.missing_fields()
        if missing:
            raise IncompleteRow(self.flight_id, missing)
        values = [
            SECTOR_CODES[self.sector],
            self.altitude,
            self.mspeed,
            self.mdrate,
            float(self.flt_segments),
            self.distance_nm,
            self.mdirection,
            self.start_lati,
            self.start_long,
            self.end_lati,
            self.end_long,
        ]
        values += [self.weather[c] for c in FEATURE_COLUMNS[11:]]
        return np.asarray(values, dtype=np.float64)

    def missing_fields(self) -> list[str]:
        missing = [
            f.name
            for f in fields(self)
            if f.name not in ("weather", "cdo_adherence", "cdocat")
            and getattr(self, f.name) is None
        ]
        if self.weather is None:
            missing.append("weather")
        else:
            missing += [c for c in FEATURE_COLUMNS[11:] if c not in self.weather]
        return missing


def segment_track(track: ArrivalTrack) -> list[Segment]:
    """Split a track of n points into its n-1 consecutive segments."""
    pts = track.points
    if len(pts) < 2:
        raise EmptySegments(f"flight {track.flight_id}: need at least 2 points")
    lat = np.array([p.lat for p in pts])
    lon = np.array([p.lon for p in pts])
    alt = np.array([p.alt for p in pts])
    hdg = np.array([p.heading for p in pts])
    dist = great_circle_nm(lat[:-1], lon[:-1], lat[1:], lon[1:])
    d_alt = alt[1:] - alt[:-1]
    dh = heading_change_deg(hdg[:-1], hdg[1:])
    return [
        Segment(pts[i], pts[i + 1], float(dist[i]), float(d_alt[i]), float(dh[i]))
        for i in range(len(pts) - 1)
    ]


def descent_gradient(seg: Segment) -> float:
    """Dimensionless sink gradient of a segment: feet down per foot forward."""
    if seg.dist_nm == 0.0:
        raise ZeroLengthSegment("segment has zero horizontal length")
    return -seg.d_alt_ft / (seg.dist_nm * FEET_PER_NM)


def is_cdo_segment(seg: Segment, level_threshold: float = DEFAULT_LEVEL_THRESHOLD) -> bool:
    """True when the segment is a genuine descent.

    A segment complies when it descends with gradient at least
    level_threshold; level-offs and climbs never comply.
    """
    return descent_gradient(seg) >= level_threshold


def cdo_adherence(
    segments: list[Segment], level_threshold: float = DEFAULT_LEVEL_THRESHOLD
) -> float:
    """Fraction of segments that are compliant descents."""
    if not segments:
        raise EmptySegments("no segments")
    compliant = sum(1 for s in segments if is_cdo_segment(s, level_threshold))
    return compliant / len(segments)


def cdocat(
    adherence: float,
    low_threshold: float = CDOCAT_LOW_THRESHOLD,
    high_threshold: float = CDOCAT_HIGH_THRESHOLD,
) -> str:
    """Categorical adherence label.

    Below low_threshold is Low, then Medium, then High from high_threshold
    upward; exact boundary values take the upper class.
    """
    if not 0.0 <= adherence <= 1.0:
        raise OutOfRange(f"adherence {adherence} outside [0, 1]")
    if adherence < low_threshold:
        return LOW
    if adherence < high_threshold:
        return MEDIUM
    return HIGH


def extract_operational_features(
    track: ArrivalTrack, segments: list[Segment], cfg: TmaConfig
) -> FlightFeatures:
    """Fill the 11 operational fields from a clipped track and its segments.

    mspeed averages the segment midpoints' ground speed (mean of the two
    endpoint speeds per segment). mdrate averages the sink gradient over
    descending segments only, so level-offs are not double-counted; a track
    with no descending segment gets mdrate 0.
    """
    if not segments:
        raise EmptySegments(f"flight {track.flight_id}: no segments")
    gradients = []
    speeds = []
    for seg in segments:
        speeds.append(0.5 * (seg.start.gspeed + seg.end.gspeed))
        if seg.d_alt_ft < 0:
            gradients.append(descent_gradient(seg))
    first = track.points[0]
    last = track.points[-1]
    return FlightFeatures(
        flight_id=track.flight_id,
        sector=entry_sector(track, cfg),
        altitude=first.alt,
        mspeed=float(np.mean(speeds)),
        mdrate=float(np.mean(gradients)) if gradients else 0.0,
        flt_segments=len(segments),
        distance_nm=float(sum(s.dist_nm for s in segments)),
        mdirection=float(np.mean([s.heading_change_deg for s in segments])),
        start_lati=first.lat,
        start_long=first.lon,
        end_lati=last.lat,
        end_long=last.lon,
    )


def weather_code(condition: str) -> float:
    """Integer code for a weather keyword; unknown strings become "other"."""
    key = condition.strip().lower()
    if key not in WEATHER_CODES:
        warnings.warn(f"unknown weather category {condition!r}, coding as 'other'")
        key = "other"
    return float(WEATHER_CODES[key])


def join_weather(
    features: FlightFeatures, start_wx: WeatherRecord, end_wx: WeatherRecord
) -> FlightFeatures:
    """Attach the 18 prefixed weather values to a feature record."""
    joined = {}
    for prefix, wx in (("start", start_wx), ("end", end_wx)):
        for name in WEATHER_FIELDS:
            value = getattr(wx, name)
            if name == "weather":
                value = weather_code(value)
            joined[f"{prefix}_{name}"] = float(value)
    features.weather = joined
    return features


def label_flight(
    features: FlightFeatures,
    segments: list[Segment],
    level_threshold: float = DEFAULT_LEVEL_THRESHOLD,
    low_threshold: float = CDOCAT_LOW_THRESHOLD,
    high_threshold: float = CDOCAT_HIGH_THRESHOLD,
) -> FlightFeatures:
    """Compute and attach the adherence fraction and categorical label."""
    features.cdo_adherence = cdo_adherence(segments, level_threshold)
    features.cdocat = cdocat(features.cdo_adherence, low_threshold, high_threshold)
    return features


def assemble_dataset(
    rows: list[FlightFeatures],
) -> tuple[np.ndarray, list[str], np.ndarray]:
    """Stack complete feature records into a matrix plus label vector.

    Returns (X, labels, adherence) where X is n x 29 in FEATURE_COLUMNS
    order, labels are the cdocat strings, and adherence the raw fractions.
    """
    matrix = np.zeros((len(rows), len(FEATURE_COLUMNS)), dtype=np.float64)
    labels = []
    adherence = np.zeros(len(rows), dtype=np.float64)
    for i, ff in enumerate(rows):
        matrix[i] = ff.row()
        if ff.cdocat is None or ff.cdo_adherence is None:
            raise IncompleteRow(ff.flight_id, ["cdo_adherence", "cdocat"])
        labels.append(ff.cdocat)
        adherence[i] = ff.cdo_adherence
    return matrix, labels, adherence


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------


def read_weather_csv(path) -> dict[str, dict[str, WeatherRecord]]:
    """Read per-flight start/end weather records.

    Returns {flight_id: {"start": WeatherRecord, "end": WeatherRecord}}.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise EmptyFile(f"{path}: no header line")
    header = next(csv.reader([lines[0]]))
    missing = [c for c in WEATHER_CSV_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing columns {', '.join(missing)}")
    records: dict[str, dict[str, WeatherRecord]] = {}
    for lineno, row in enumerate(csv.DictReader(lines), start=2):
        point = row["point"].strip()
        if point not in ("start", "end"):
            raise MalformedRow(lineno, f"point must be start or end, got {point!r}")
        try:
            rec = WeatherRecord(
                temp=float(row["temp"]),
                feels_like=float(row["feels_like"]),
                pressure=float(row["pressure"]),
                humidity=float(row["humidity"]),
                dew_point=float(row["dew_point"]),
                clouds=float(row["clouds"]),
                wind_speed=float(row["wind_speed"]),
                wind_deg=float(row["wind_deg"]),
                weather=row["weather"].strip(),
            )
        except (TypeError, ValueError) as exc:
            raise MalformedRow(lineno, f"unparseable field ({exc})") from exc
        records.setdefault(row["flight_id"].strip(), {})[point] = rec
    return records


def write_weather_csv(
    records: dict[str, dict[str, WeatherRecord]], path, header_comment: str | None = None
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(WEATHER_CSV_COLUMNS)
        for flight_id, pair in records.items():
            for point in ("start", "end"):
                rec = pair[point]
                writer.writerow(
                    [flight_id, point]
                    + [repr(float(getattr(rec, f))) for f in WEATHER_FIELDS[:-1]]
                    + [rec.weather]
                )


def write_feature_csv(
    rows: list[FlightFeatures], path, header_comment: str | None = None
) -> None:
    """Write the assembled feature matrix with labels as CSV."""
    matrix, labels, adherence = assemble_dataset(rows)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["flight_id"] + FEATURE_COLUMNS + ["cdo_adherence", "cdocat"])
        for i, ff in enumerate(rows):
            writer.writerow(
                [ff.flight_id]
                + [repr(float(v)) for v in matrix[i]]
                + [repr(float(adherence[i])), labels[i]]
            )


def read_feature_csv(path) -> tuple[np.ndarray, list[str], np.ndarray, list[str]]:
    """Read a feature CSV back into (X, labels, adherence, flight_ids)."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise EmptyFile(f"{path}: no header line")
    header = next(csv.reader([lines[0]]))
    expected = ["flight_id"] + FEATURE_COLUMNS + ["cdo_adherence", "cdocat"]
    missing = [c for c in expected if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing columns {', '.join(missing)}")
    ids = []
    values = []
    labels = []
    adherence = []
    for lineno, row in enumerate(csv.DictReader(lines), start=2):
        try:
            ids.append(row["flight_id"])
            values.append([float(row[c]) for c in FEATURE_COLUMNS])
            adherence.append(float(row["cdo_adherence"]))
            labels.append(row["cdocat"])
        except (TypeError, ValueError) as exc:
            raise MalformedRow(lineno, f"unparseable field ({exc})") from exc
    n = len(values)
    matrix = np.asarray(values, dtype=np.float64) if n else np.zeros((0, 29))
    return matrix, labels, np.asarray(adherence, dtype=np.float64), ids
