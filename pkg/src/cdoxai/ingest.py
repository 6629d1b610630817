"""Arrival-track file parsing, terminal-area clipping, and entry-sector assignment.

The track CSV schema is fixed: a header line
``flight_id,timestamp,lat,lon,alt_ft,gspeed_kt,heading_deg`` followed by one
row per sample. Timestamps are integer UTC seconds. Lines starting with ``#``
are treated as comments so emitted files can carry a provenance header.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

from .errors import (
    EmptyFile,
    MalformedRow,
    MissingColumn,
    TooFewPoints,
    UnsupportedSector,
)
from .geo import great_circle_nm, initial_bearing_deg

TRACK_COLUMNS = ["flight_id", "timestamp", "lat", "lon", "alt_ft", "gspeed_kt", "heading_deg"]

NORTH = "North"
EAST = "East"


@dataclass(frozen=True)
class TrackPoint:
    """One timestamped surveillance sample of a flight."""

    timestamp: int  # seconds since epoch
    lat: float  # degrees, WGS-84
    lon: float  # degrees, WGS-84
    alt: float  # feet
    gspeed: float  # knots
    heading: float  # degrees in [0, 360)


@dataclass
class ArrivalTrack:
    """Ordered samples of one flight's arrival phase."""

    flight_id: str
    points: list[TrackPoint] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class TmaConfig:
    """Terminal area modeled as a great-circle disc around the airport."""

    center_lat: float
    center_lon: float
    radius_nm: float
    altitude_floor_ft: float = 3500.0

    def __post_init__(self):
        if self.radius_nm <= 0:
            raise ValueError("radius_nm must be positive")
        if self.altitude_floor_ft < 0:
            raise ValueError("altitude_floor_ft must be non-negative")


def _parse_point(row: dict, line: int) -> tuple[str, TrackPoint]:
    flight_id = row["flight_id"].strip()
    if not flight_id:
        raise MalformedRow(line, "empty flight_id")
    try:
        timestamp = int(row["timestamp"])
        lat = float(row["lat"])
        lon = float(row["lon"])
        alt = float(row["alt_ft"])
        gspeed = float(row["gspeed_kt"])
        heading = float(row["heading_deg"])
    except (TypeError, ValueError) as exc:
        raise MalformedRow(line, f"unparseable field ({exc})") from exc
    if not -90.0 <= lat <= 90.0:
        raise MalformedRow(line, f"lat {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise MalformedRow(line, f"lon {lon} outside [-180, 180]")
    if alt < 0:
        raise MalformedRow(line, f"alt_ft {alt} is negative")
    if gspeed < 0:
        raise MalformedRow(line, f"gspeed_kt {gspeed} is negative")
    if not 0.0 <= heading < 360.0:
        raise MalformedRow(line, f"heading_deg {heading} outside [0, 360)")
    return flight_id, TrackPoint(timestamp, lat, lon, alt, gspeed, heading)


def parse_track_csv(path) -> list[ArrivalTrack]:
    """Parse a track CSV into one ArrivalTrack per distinct flight_id.

    Points are sorted by timestamp within each flight. Duplicate timestamps
    keep the first occurrence; later duplicates are dropped with a warning.
    Tracks are returned in order of first appearance in the file.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = []
        line_numbers = []
        for i, raw in enumerate(fh, start=1):
            if raw.startswith("#") or not raw.strip():
                continue
            lines.append(raw)
            line_numbers.append(i)
    if not lines:
        raise EmptyFile(f"{path}: no header line")
    header = next(csv.reader([lines[0]]))
    missing = [c for c in TRACK_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing columns {', '.join(missing)}")
    if len(lines) == 1:
        raise EmptyFile(f"{path}: no data rows")

    by_flight: dict[str, list[TrackPoint]] = {}
    reader = csv.DictReader(lines)
    for row, line in zip(reader, line_numbers[1:]):
        if None in row or any(v is None for v in row.values()):
            raise MalformedRow(line, "wrong number of fields")
        flight_id, point = _parse_point(row, line)
        by_flight.setdefault(flight_id, []).append(point)

    tracks = []
    for flight_id, points in by_flight.items():
        points.sort(key=lambda p: p.timestamp)  # stable: file order among equal stamps
        deduped = [points[0]]
        for p in points[1:]:
            if p.timestamp == deduped[-1].timestamp:
                warnings.warn(
                    f"flight {flight_id}: duplicate timestamp {p.timestamp}, "
                    "keeping first occurrence"
                )
                continue
            deduped.append(p)
        tracks.append(ArrivalTrack(flight_id, deduped))
    return tracks


def _format_float(x: float) -> str:
    # repr of a float is the shortest string that round-trips bit-exactly
    return repr(float(x))


def write_track_csv(tracks: list[ArrivalTrack], path, header_comment: str | None = None) -> None:
    """Serialize tracks in the canonical CSV form parse_track_csv accepts.

    Floats are written with shortest round-trip repr so parse(write(tracks))
    reproduces every field bit-exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(TRACK_COLUMNS)
        for track in tracks:
            for p in track.points:
                writer.writerow(
                    [
                        track.flight_id,
                        p.timestamp,
                        _format_float(p.lat),
                        _format_float(p.lon),
                        _format_float(p.alt),
                        _format_float(p.gspeed),
                        _format_float(p.heading),
                    ]
                )


def clip_to_tma(track: ArrivalTrack, cfg: TmaConfig) -> ArrivalTrack:
    """Restrict a track to the contiguous arrival run inside the terminal area.

    The run starts at the first point that is within radius_nm of the center
    (boundary inclusive) and at or above the altitude floor, and ends just
    before the first subsequent point violating either predicate: the arrival
    ends at the first sub-floor or out-of-area sample, and everything after
    it is discarded. Idempotent by construction.
    """

    def inside(p: TrackPoint) -> bool:
        d = great_circle_nm(p.lat, p.lon, cfg.center_lat, cfg.center_lon)
        return d <= cfg.radius_nm and p.alt >= cfg.altitude_floor_ft

    start = None
    for i, p in enumerate(track.points):
        if inside(p):
            start = i
            break
    if start is None:
        raise TooFewPoints(f"flight {track.flight_id}: no points inside the terminal area")
    end = start
    while end < len(track.points) and inside(track.points[end]):
        end += 1
    kept = track.points[start:end]
    if len(kept) < 2:
        raise TooFewPoints(
            f"flight {track.flight_id}: only {len(kept)} point(s) survive clipping"
        )
    return ArrivalTrack(track.flight_id, kept)


def entry_sector(track: ArrivalTrack, cfg: TmaConfig) -> str:
    """Sector of the first track point seen from the airport center.

    Bearings in [315, 45) map to North and [45, 135) to East. Southern and
    western entries are not part of the supported traffic picture.
    """
    first = track.points[0]
    bearing = float(
        initial_bearing_deg(cfg.center_lat, cfg.center_lon, first.lat, first.lon)
    )
    if bearing >= 315.0 or bearing < 45.0:
        return NORTH
    if 45.0 <= bearing < 135.0:
        return EAST
    raise UnsupportedSector(
        f"flight {track.flight_id}: entry bearing {bearing:.1f} deg is outside "
        "the North/East sectors"
    )
