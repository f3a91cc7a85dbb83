"""Per-station indicator tables, inverse-distance-weighted grids and map files."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .climate_io import Station
from .indicators import PerformanceResult
from .sweep import Cell

NODATA = -9999.0
EXACT_MATCH_DEG = 1e-9


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class StationIndicator:
    station: Station
    values: dict[str, float]

    def __post_init__(self):
        object.__setattr__(self, "values", {k: float(v) for k, v in self.values.items()})
        for name, value in self.values.items():
            if not name:
                raise MappingError(f"{self.station.id}: empty indicator name")
            if not math.isfinite(value):
                raise MappingError(f"{self.station.id}: indicator {name} is not finite")


def _as_values(item: Any) -> dict[str, float]:
    if isinstance(item, PerformanceResult):
        return {"pf_p": float(item.pf_p), "pf_t": float(item.pf_t)}
    if isinstance(item, Cell):
        return {
            "best_pf_p": float(item.pf_p),
            "best_pf_t": float(item.pf_t),
            "best_d1": float(item.d1),
            "best_mdot": float(item.mdot),
        }
    if isinstance(item, Mapping):
        return {str(k): float(v) for k, v in item.items()}
    raise MappingError(f"cannot collect indicators from {type(item).__name__}")


def collect(results: Iterable[tuple[Station, Any]]) -> list[StationIndicator]:
    """One row per station, sorted by id.

    Accepts performance results, best-configuration cells or plain mappings.
    """
    rows: dict[str, StationIndicator] = {}
    for station, item in results:
        if station.id in rows:
            raise MappingError(f"duplicate station id {station.id!r}")
        rows[station.id] = StationIndicator(station, _as_values(item))
    if not rows:
        raise MappingError("no results to collect")
    return [rows[k] for k in sorted(rows)]


# ---------------------------------------------------------------------------
# interpolation

@dataclass(frozen=True)
class GridSpec:
    lat_min: float = 35.0
    lat_max: float = 71.0
    lon_min: float = -11.0
    lon_max: float = 32.0
    resolution: float = 0.5

    def __post_init__(self):
        if not self.resolution > 0:
            raise MappingError(f"resolution must be > 0, got {self.resolution}")
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise MappingError("grid bounds must be ordered (min < max)")
        if not (-90 <= self.lat_min and self.lat_max <= 90 and -180 <= self.lon_min and self.lon_max <= 180):
            raise MappingError("grid bounds outside valid latitude/longitude")

    @property
    def ncols(self) -> int:
        return round((self.lon_max - self.lon_min) / self.resolution) + 1

    @property
    def nrows(self) -> int:
        return round((self.lat_max - self.lat_min) / self.resolution) + 1

    def lons(self) -> np.ndarray:
        return self.lon_min + self.resolution * np.arange(self.ncols)

    def lats(self) -> np.ndarray:
        """Node latitudes from north to south (row 0 is the northern edge)."""
        return self.lat_max - self.resolution * np.arange(self.nrows)


@dataclass(eq=False)
class RasterGrid:
    spec: GridSpec
    values: np.ndarray  # (nrows, ncols), row 0 north; NaN where no data
    field: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.spec.nrows, self.spec.ncols):
            raise MappingError(f"values shape {self.values.shape} != {(self.spec.nrows, self.spec.ncols)}")


def great_circle_deg(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Central angle in degrees (haversine form, accurate at small separations)."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dlat = p2 - p1
    dlon = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dlat / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlon / 2) ** 2
    return np.degrees(2 * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0))))


def idw_at(
    points: Sequence[StationIndicator],
    field: str,
    lats,
    lons,
    power: float = 2.0,
    cutoff_deg: float = 10.0,
) -> np.ndarray:
    """IDW estimate of ``field`` at arbitrary locations; NaN beyond the cutoff."""
    if not points:
        raise MappingError("need at least one station")
    if not power > 0:
        raise MappingError(f"power must be > 0, got {power}")
    missing = [p.station.id for p in points if field not in p.values]
    if missing:
        available = sorted({k for p in points for k in p.values})
        raise MappingError(f"unknown field {field!r}; available: {', '.join(available)}")
    s_lat = np.array([p.station.latitude for p in points])
    s_lon = np.array([p.station.longitude for p in points])
    s_val = np.array([p.values[field] for p in points])

    lats = np.asarray(lats, dtype=float)
    lons = np.asarray(lons, dtype=float)
    shape = np.broadcast_shapes(lats.shape, lons.shape)
    q_lat = np.broadcast_to(lats, shape).reshape(-1, 1)
    q_lon = np.broadcast_to(lons, shape).reshape(-1, 1)

    dist = great_circle_deg(q_lat, q_lon, s_lat[None, :], s_lon[None, :])
    exact = dist <= EXACT_MATCH_DEG
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(exact, 0.0, dist ** -power)
        est = (w @ s_val) / w.sum(axis=1)
    # coincident stations: the node takes their value (mean if several coincide)
    has_exact = exact.any(axis=1)
    if has_exact.any():
        e = exact[has_exact]
        est[has_exact] = (e @ s_val) / e.sum(axis=1)
    # guard against ulp-level overshoot of the convex combination
    est = np.clip(est, s_val.min(), s_val.max())
    est[dist.min(axis=1) > cutoff_deg] = np.nan
    return est.reshape(shape)


def idw_interpolate(
    points: Sequence[StationIndicator],
    field: str,
    grid: GridSpec | None = None,
    power: float = 2.0,
    cutoff_deg: float = 10.0,
) -> RasterGrid:
    grid = grid or GridSpec()
    lat2d, lon2d = np.meshgrid(grid.lats(), grid.lons(), indexing="ij")
    return RasterGrid(grid, idw_at(points, field, lat2d, lon2d, power, cutoff_deg), field)


# ---------------------------------------------------------------------------
# writers

def _fields(indicators: Sequence[StationIndicator]) -> list[str]:
    names: list[str] = []
    for ind in indicators:
        names += [k for k in ind.values if k not in names]
    return names


def write_station_csv(indicators: Sequence[StationIndicator], fields: Sequence[str] | None = None) -> str:
    fields = list(fields) if fields is not None else _fields(indicators)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "name", "lat", "lon", *fields])
    for ind in indicators:
        st = ind.station
        w.writerow([st.id, st.name, repr(st.latitude), repr(st.longitude),
                    *(repr(ind.values[f]) if f in ind.values else "" for f in fields)])
    return buf.getvalue()


def read_station_csv(text: str) -> list[StationIndicator]:
    """Inverse of :func:`write_station_csv` (elevation is not stored and reads as 0)."""
    reader = csv.DictReader(io.StringIO(text))
    meta = {"id", "name", "lat", "lon"}
    if reader.fieldnames is None or not meta <= set(reader.fieldnames):
        raise MappingError("station CSV needs id,name,lat,lon columns")
    out = []
    for row in reader:
        st = Station(row["id"], row["name"], float(row["lat"]), float(row["lon"]))
        out.append(StationIndicator(st, {k: float(v) for k, v in row.items() if k not in meta and v != ""}))
    return out


def write_geojson(indicators: Sequence[StationIndicator]) -> str:
    features = []
    for ind in indicators:
        st = ind.station
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": [st.longitude, st.latitude]},
            "properties": {"id": st.id, "name": st.name, "elevation": st.elevation, **ind.values},
        })
    return json.dumps({"type": "FeatureCollection", "features": features}, indent=1) + "\n"


def write_ascii_grid(grid: RasterGrid) -> str:
    """ESRI ASCII grid; nodes are cell centres, so the lower-left corner sits half a cell out."""
    spec = grid.spec
    lines = [
        f"ncols {spec.ncols}",
        f"nrows {spec.nrows}",
        f"xllcorner {spec.lon_min - spec.resolution / 2!r}",
        f"yllcorner {spec.lat_min - spec.resolution / 2!r}",
        f"cellsize {spec.resolution!r}",
        f"NODATA_value {NODATA:g}",
    ]
    values = np.where(np.isnan(grid.values), NODATA, grid.values)
    for row in values:
        lines.append(" ".join(f"{v:.6g}" for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Colormap:
    """Piecewise-linear colormap over evenly spaced RGB stops."""

    stops: tuple[tuple[int, int, int], ...] = (
        (49, 54, 149),
        (116, 173, 209),
        (255, 255, 191),
        (244, 109, 67),
        (165, 0, 38),
    )
    nodata: tuple[int, int, int] = (255, 255, 255)

    def __post_init__(self):
        if len(self.stops) < 2:
            raise MappingError("colormap needs at least two stops")

    def __call__(self, values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
        """RGB uint8 array for ``values``; vmin maps to the first stop, vmax to the last."""
        values = np.asarray(values, dtype=float)
        stops = np.array(self.stops, dtype=float)
        span = vmax - vmin
        with np.errstate(invalid="ignore"):
            frac = np.zeros_like(values) if span <= 0 else np.clip((values - vmin) / span, 0.0, 1.0)
        pos = np.where(np.isnan(frac), 0.0, frac) * (len(stops) - 1)
        lo = np.minimum(pos.astype(int), len(stops) - 2)
        t = (pos - lo)[..., None]
        rgb = np.rint(stops[lo] * (1 - t) + stops[lo + 1] * t).astype(np.uint8)
        rgb[np.isnan(values)] = self.nodata
        return rgb


def write_ppm(grid: RasterGrid, colormap: Colormap | None = None,
              vmin: float | None = None, vmax: float | None = None) -> bytes:
    """Binary P6 image, one pixel per grid node; nodata nodes are white."""
    colormap = colormap or Colormap()
    finite = grid.values[~np.isnan(grid.values)]
    if vmin is None:
        vmin = float(finite.min()) if finite.size else 0.0
    if vmax is None:
        vmax = float(finite.max()) if finite.size else 0.0
    rgb = colormap(grid.values, vmin, vmax)
    header = f"P6\n{grid.spec.ncols} {grid.spec.nrows}\n255\n".encode("ascii")
    return header + rgb.tobytes()


def write_raster(grid: RasterGrid, colormap: Colormap | None = None) -> tuple[str, bytes]:
    """ASCII grid text and colored pixel map for one interpolated field."""
    return write_ascii_grid(grid), write_ppm(grid, colormap)
