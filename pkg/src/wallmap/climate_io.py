"""Hourly climate series: WAC-like text format, CSV import, synthetic climates.

A series holds one station-year of hourly records with nine columns:

    isgh  horizontal global solar radiation  [W/m2]
    isd   diffuse solar radiation            [W/m2]
    ci    cloud cover                        [0-1]
    ta    air temperature                    [degC]
    hrel  relative humidity                  [%]
    ws    wind speed                         [m/s]
    wd    wind direction                     [deg, 0-360)
    rn    rain intensity                     [mm/h]
    ilah  long wave radiation                [W/m2]

Time stamps are implicit: row ``k`` is hour ``k`` of ``start_year`` in local
standard time. Only ``ta`` and ``isgh`` drive the collector model; the other
columns are parsed and carried.

WAC-like layout::

    WACLIKE 1.0
    station,<id>,<name>,<lat>,<lon>,<elev>
    year,<start_year>
    isgh,isd,ci,ta,hrel,ws,wd,rn,ilah
    <one comma separated row per hour>
"""
from __future__ import annotations

import calendar
import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, NamedTuple

import numpy as np

log = logging.getLogger(__name__)

FIELDS = ("isgh", "isd", "ci", "ta", "hrel", "ws", "wd", "rn", "ilah")
MAGIC = "WACLIKE 1.0"
MAX_GAP_HOURS = 3
# isd may exceed isgh by this much before it counts as a violation (rounding in source files)
DIFFUSE_TOLERANCE = 1.0

_COL = {name: i for i, name in enumerate(FIELDS)}


class ClimateError(ValueError):
    """Raised for malformed or out-of-range climate data."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class Station:
    id: str
    name: str
    latitude: float
    longitude: float
    elevation: float = 0.0

    def __post_init__(self):
        if not self.id or not self.id.strip():
            raise ClimateError("station id must be non-empty")
        if any(ch in self.id for ch in ",\n\r\""):
            raise ClimateError(f"station id {self.id!r} contains a reserved character")
        if "\n" in self.name or "\r" in self.name:
            raise ClimateError("station name must be a single line")
        if not -90.0 <= self.latitude <= 90.0:
            raise ClimateError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ClimateError(f"longitude {self.longitude} outside [-180, 180]")
        if not math.isfinite(self.elevation):
            raise ClimateError("elevation must be finite")


class ClimateRecord(NamedTuple):
    isgh: float
    isd: float
    ci: float
    ta: float
    hrel: float
    ws: float
    wd: float
    rn: float
    ilah: float


def hours_in_year(year: int) -> int:
    return 8784 if calendar.isleap(year) else 8760


@dataclass(eq=False)
class ClimateSeries:
    """One station-year of hourly records, stored column-wise as ``data[hour, field]``."""

    station: Station
    start_year: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.data = np.array(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(FIELDS):
            raise ClimateError(f"data must have shape (hours, {len(FIELDS)}), got {self.data.shape}")
        expected = hours_in_year(self.start_year)
        if self.data.shape[0] != expected:
            raise ClimateError(
                f"row count mismatch: {self.data.shape[0]} rows, expected {expected} for {self.start_year}"
            )

    def __len__(self):
        return self.data.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ClimateSeries):
            return NotImplemented
        return (
            self.station == other.station
            and self.start_year == other.start_year
            and np.array_equal(self.data, other.data, equal_nan=True)
        )

    def column(self, name: str) -> np.ndarray:
        return self.data[:, _COL[name]]

    @property
    def isgh(self) -> np.ndarray:
        return self.column("isgh")

    @property
    def ta(self) -> np.ndarray:
        return self.column("ta")

    def record(self, hour: int) -> ClimateRecord:
        return ClimateRecord(*(float(v) for v in self.data[hour]))

    @property
    def records(self) -> list[ClimateRecord]:
        return [ClimateRecord(*row) for row in self.data.tolist()]

    @classmethod
    def from_columns(cls, station: Station, start_year: int, **columns) -> "ClimateSeries":
        """Build a series from named columns; missing columns default to 0."""
        unknown = set(columns) - set(FIELDS)
        if unknown:
            raise ClimateError(f"unknown climate fields: {sorted(unknown)}")
        n = hours_in_year(start_year)
        data = np.zeros((n, len(FIELDS)))
        for name, values in columns.items():
            data[:, _COL[name]] = np.broadcast_to(np.asarray(values, dtype=float), (n,))
        return cls(station, start_year, data)


# ---------------------------------------------------------------------------
# range checks

def _invalid_mask(data: np.ndarray) -> np.ndarray:
    """Boolean mask of values that are missing (NaN) or outside their valid range."""
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(data)
        c = {name: data[:, i] for i, name in enumerate(FIELDS)}
        bad[:, _COL["isgh"]] |= c["isgh"] < 0
        bad[:, _COL["isd"]] |= (c["isd"] < 0) | (c["isd"] > c["isgh"] + DIFFUSE_TOLERANCE)
        bad[:, _COL["ci"]] |= (c["ci"] < 0) | (c["ci"] > 1)
        bad[:, _COL["hrel"]] |= (c["hrel"] < 0) | (c["hrel"] > 100)
        bad[:, _COL["ws"]] |= c["ws"] < 0
        bad[:, _COL["wd"]] |= (c["wd"] < 0) | (c["wd"] >= 360)
        bad[:, _COL["rn"]] |= c["rn"] < 0
    return bad


def _check_rows(data: np.ndarray, first_line: int):
    """Raise for the first row holding an out-of-range value; row k sits on line first_line + k."""
    mask = _invalid_mask(data)
    if not mask.any():
        return
    k = int(np.argmax(mask.any(axis=1)))
    name = FIELDS[int(np.argmax(mask[k]))]
    raise ClimateError(f"value out of range: {name}={data[k, _COL[name]]!r}", first_line + k)


@dataclass(frozen=True)
class Issue:
    field: str
    start: int
    length: int
    action: str  # "filled" or "error"

    def __str__(self):
        return f"{self.field}: {self.length} invalid value(s) from hour {self.start} ({self.action})"


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """(start, length) of every run of True in a 1-D mask."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(s), int(e - s)) for s, e in zip(edges[::2], edges[1::2])]


def validate_series(series: ClimateSeries, gap_fill: bool = False) -> tuple[ClimateSeries, list[Issue]]:
    """Check every record against its valid range.

    Without ``gap_fill`` any violation raises :class:`ClimateError`. With it,
    runs of at most three consecutive invalid values are replaced by linear
    interpolation between the neighbouring valid values (nearest valid value
    at the series ends) and reported; longer runs raise.
    """
    data = series.data.copy()
    issues: list[Issue] = []
    mask = _invalid_mask(data)
    if not mask.any():
        return series, issues

    if not gap_fill:
        runs = [(FIELDS[j], s, n) for j in range(len(FIELDS)) for s, n in _runs(mask[:, j])]
        name, start, n = runs[0]
        raise ClimateError(
            f"{len(runs)} invalid run(s); first: {name} at hour {start} ({n} h)", source=series.station.id
        )

    hours = np.arange(len(data))
    # fill isgh first so the isd <= isgh check sees repaired irradiance
    for name in ("isgh",) + tuple(f for f in FIELDS if f != "isgh"):
        j = _COL[name]
        col_mask = _invalid_mask(data)[:, j]
        if not col_mask.any():
            continue
        for start, n in _runs(col_mask):
            if n > MAX_GAP_HOURS:
                raise ClimateError(
                    f"gap of {n} h in {name} at hour {start} exceeds {MAX_GAP_HOURS} h", source=series.station.id
                )
        good = ~col_mask
        if not good.any():
            raise ClimateError(f"no valid values in {name}", source=series.station.id)
        if name == "wd":
            # interpolate direction along the shorter arc
            unwrapped = np.unwrap(data[good, j], period=360.0)
            filled = np.interp(hours[col_mask], hours[good], unwrapped) % 360.0
            data[col_mask, j] = np.where(filled >= 360.0, 0.0, filled)
        else:
            data[col_mask, j] = np.interp(hours[col_mask], hours[good], data[good, j])
        if name == "isd":
            data[col_mask, j] = np.minimum(data[col_mask, j], data[col_mask, _COL["isgh"]])
        for start, n in _runs(col_mask):
            issues.append(Issue(name, start, n, "filled"))

    remaining = _invalid_mask(data)
    if remaining.any():
        j = int(np.argmax(remaining.any(axis=0)))
        raise ClimateError(f"{FIELDS[j]} still invalid after gap filling", source=series.station.id)
    for issue in issues:
        log.info("%s: %s", series.station.id, issue)
    return ClimateSeries(series.station, series.start_year, data), issues


# ---------------------------------------------------------------------------
# WAC-like text format

def _num(text: str, line: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ClimateError(f"non-numeric {what}: {text.strip()!r}", line) from None
    if not math.isfinite(value):
        raise ClimateError(f"non-finite {what}: {text.strip()!r}", line)
    return value


def parse_wac(text: str, source: str | None = None) -> ClimateSeries:
    """Parse WAC-like text into a validated :class:`ClimateSeries`.

    Errors carry the 1-based line number of the offending line.
    """
    lines = text.splitlines()
    try:
        return _parse_wac_lines(lines)
    except ClimateError as exc:
        if source is not None and exc.source is None:
            raise ClimateError(str(exc), source=source) from None
        raise


def _parse_wac_lines(lines: list[str]) -> ClimateSeries:
    if len(lines) < 4:
        raise ClimateError("malformed header: expected 4 header lines", len(lines) + 1)
    if lines[0].strip() != MAGIC:
        raise ClimateError(f"malformed header: expected {MAGIC!r}", 1)

    meta = next(csv.reader([lines[1]]))
    if len(meta) != 6 or meta[0] != "station":
        raise ClimateError("malformed header: expected station,<id>,<name>,<lat>,<lon>,<elev>", 2)
    try:
        station = Station(
            id=meta[1],
            name=meta[2],
            latitude=_num(meta[3], 2, "latitude"),
            longitude=_num(meta[4], 2, "longitude"),
            elevation=_num(meta[5], 2, "elevation"),
        )
    except ClimateError as exc:
        raise ClimateError(f"malformed header: {exc}", 2) from None

    year_parts = lines[2].split(",")
    if len(year_parts) != 2 or year_parts[0] != "year":
        raise ClimateError("malformed header: expected year,<start_year>", 3)
    try:
        start_year = int(year_parts[1])
    except ValueError:
        raise ClimateError(f"malformed header: bad year {year_parts[1]!r}", 3) from None

    if tuple(p.strip() for p in lines[3].split(",")) != FIELDS:
        raise ClimateError("malformed header: expected column header " + ",".join(FIELDS), 4)

    body = lines[4:]
    while body and not body[-1].strip():
        body.pop()
    expected = hours_in_year(start_year)
    if len(body) != expected:
        raise ClimateError(f"row count mismatch: {len(body)} rows, expected {expected}", 5 + min(len(body), expected))

    data = np.empty((expected, len(FIELDS)))
    for k, row in enumerate(body):
        lineno = k + 5
        parts = row.split(",")
        if len(parts) != len(FIELDS):
            raise ClimateError(f"wrong column count: {len(parts)}, expected {len(FIELDS)}", lineno)
        try:
            data[k] = [float(p) for p in parts]
        except ValueError:
            data[k] = [_num(p, lineno, FIELDS[i]) for i, p in enumerate(parts)]
    bad = ~np.isfinite(data)
    if bad.any():
        k, j = map(int, np.argwhere(bad)[0])
        raise ClimateError(f"non-finite {FIELDS[j]}: {body[k].split(',')[j].strip()!r}", k + 5)
    _check_rows(data, 5)
    return ClimateSeries(station, start_year, data)


def _fmt(value: float) -> str:
    # repr is the shortest string that round-trips to the same double
    return repr(float(value))


def write_wac(series: ClimateSeries) -> str:
    st = series.station
    buf = io.StringIO()
    buf.write(MAGIC + "\n")
    name = st.name
    if name == "":
        name = '""'
    elif any(ch in name for ch in ',"') or name != name.strip():
        name = '"' + name.replace('"', '""') + '"'
    buf.write(f"station,{st.id},{name},{_fmt(st.latitude)},{_fmt(st.longitude)},{_fmt(st.elevation)}\n")
    buf.write(f"year,{series.start_year}\n")
    buf.write(",".join(FIELDS) + "\n")
    for row in series.data.tolist():
        buf.write(",".join(map(repr, row)) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# CSV import

REQUIRED_CSV_FIELDS = ("isgh", "isd", "ta")


def parse_csv(
    text: str,
    column_map: Mapping[str, int],
    station: Station | None = None,
    start_year: int = 2001,
    header_rows: int = 0,
) -> ClimateSeries:
    """Import a plain comma separated export.

    ``column_map`` maps climate field names to 0-based column indices and must
    cover at least isgh, isd and ta; unmapped fields are set to 0.
    """
    missing = [f for f in REQUIRED_CSV_FIELDS if f not in column_map]
    if missing:
        raise ClimateError(f"column map lacks required field(s): {', '.join(missing)}")
    unknown = set(column_map) - set(FIELDS)
    if unknown:
        raise ClimateError(f"column map has unknown field(s): {sorted(unknown)}")
    if station is None:
        station = Station("csv", "", 0.0, 0.0)

    rows = list(csv.reader(io.StringIO(text)))[header_rows:]
    while rows and not any(cell.strip() for cell in rows[-1]):
        rows.pop()
    expected = hours_in_year(start_year)
    if len(rows) != expected:
        raise ClimateError(f"row count mismatch: {len(rows)} rows, expected {expected}")

    data = np.zeros((expected, len(FIELDS)))
    for k, row in enumerate(rows):
        lineno = k + 1 + header_rows
        for name, col in column_map.items():
            if col < 0 or col >= len(row):
                raise ClimateError(f"missing mapped column {col} for {name} (row has {len(row)} columns)", lineno)
            data[k, _COL[name]] = _num(row[col], lineno, f"{name} in column {col}")
    _check_rows(data, 1 + header_rows)
    return ClimateSeries(station, start_year, data)


# ---------------------------------------------------------------------------
# synthetic climates

SUNRISE_HOUR = 6.0
DAY_LENGTH_HOURS = 12.0
TEMPERATURE_PEAK_HOUR = 14.0
COLDEST_DAY = 15.0  # mid-January, days after Jan 1 00:00


@dataclass(frozen=True)
class SyntheticProfile:
    """Parameters of an analytic test climate."""

    mean_ta: float = 10.0
    annual_amplitude: float = 8.0
    diurnal_amplitude: float = 4.0
    peak_irradiance: float = 800.0
    cloud: float = 0.6
    latitude: float = 52.1
    longitude: float = 5.18
    station_id: str = "synthetic"
    station_name: str = ""
    elevation: float = 0.0
    year: int = 2001
    # constant fields
    hrel: float = 80.0
    ws: float = 3.0
    wd: float = 225.0
    rn: float = 0.0
    ilah: float = 300.0

    def __post_init__(self):
        for name in ("annual_amplitude", "diurnal_amplitude", "peak_irradiance"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ClimateError(f"{name} must be finite and >= 0, got {value}")
        if not 0.0 <= self.cloud <= 1.0:
            raise ClimateError(f"cloud must be in [0, 1], got {self.cloud}")
        if not math.isfinite(self.mean_ta):
            raise ClimateError("mean_ta must be finite")


def generate_synthetic(profile: SyntheticProfile) -> ClimateSeries:
    """Deterministic analytic climate.

    Air temperature is the mean plus an annual cosine (coldest mid-January)
    plus a diurnal cosine (warmest 14:00). Global irradiance is a half-sine
    between 06:00 and 18:00, sampled at mid-hour and scaled by
    ``1 - 0.75 * cloud``; diffuse irradiance is a cloud-weighted share of it.
    """
    station = Station(
        profile.station_id, profile.station_name, profile.latitude, profile.longitude, profile.elevation
    )
    n = hours_in_year(profile.year)
    t = np.arange(n, dtype=float)
    hour_of_day = t % 24.0
    days = n / 24.0

    ta = (
        profile.mean_ta
        - profile.annual_amplitude * np.cos(2 * np.pi * (t / 24.0 - COLDEST_DAY) / days)
        + profile.diurnal_amplitude * np.cos(2 * np.pi * (hour_of_day - TEMPERATURE_PEAK_HOUR) / 24.0)
    )
    phase = (hour_of_day + 0.5 - SUNRISE_HOUR) / DAY_LENGTH_HOURS
    shape = np.where((phase > 0) & (phase < 1), np.sin(np.pi * phase), 0.0)
    isgh = np.maximum(0.0, profile.peak_irradiance * (1.0 - 0.75 * profile.cloud) * shape)
    isd = isgh * (0.2 + 0.8 * profile.cloud)

    return ClimateSeries.from_columns(
        station,
        profile.year,
        isgh=isgh,
        isd=isd,
        ci=profile.cloud,
        ta=ta,
        hrel=profile.hrel,
        ws=profile.ws,
        wd=profile.wd,
        rn=profile.rn,
        ilah=profile.ilah,
    )


# ---------------------------------------------------------------------------
# directories of files

def read_wac(path: str | Path) -> ClimateSeries:
    path = Path(path)
    return parse_wac(path.read_text(encoding="utf-8"), source=path.name)


def load_station_set(directory: str | Path, workers: int = 1) -> list[ClimateSeries]:
    """Parse and validate every ``*.wac`` file in ``directory``, sorted by station id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ClimateError(f"not a directory: {directory}")
    paths = sorted(directory.glob("*.wac"))
    if workers > 1 and len(paths) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            series = list(pool.map(read_wac, paths))
    else:
        series = [read_wac(p) for p in paths]
    seen: dict[str, Path] = {}
    for s, p in zip(series, paths):
        if s.station.id in seen:
            raise ClimateError(f"duplicate station id {s.station.id!r} (also in {seen[s.station.id].name})", source=p.name)
        seen[s.station.id] = p
    return sorted(series, key=lambda s: s.station.id)
