"""Command line driver: synth, validate, simulate, sweep, map.

Every failure ends with exit status != 0 and one stderr line of the form
``error <CODE>: <message>``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

import jsonschema
import numpy as np

from . import climate_io, mapping
from .climate_io import ClimateError, SyntheticProfile, generate_synthetic, write_wac
from .collector import CollectorParams, ParameterError
from .indicators import DEFAULT_THRESHOLD, evaluate
from .sweep import SweepError, SweepGrid, best_config, format_tables, run_sweep

log = logging.getLogger("wallmap")

_COLLECTOR_FIELDS = [f.name for f in fields(CollectorParams)]
_NUM = {"type": "number"}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "climate_dir": {"type": "string", "minLength": 1},
        "output_dir": {"type": "string", "minLength": 1},
        "collector": {
            "type": "object",
            "additionalProperties": False,
            "properties": {name: {"type": ["number", "null"]} for name in _COLLECTOR_FIELDS},
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d1_mm": {"type": "array", "items": _NUM, "minItems": 1},
                "mdot_kg_per_min": {"type": "array", "items": _NUM, "minItems": 1},
                "rederive_capacities": {"type": "boolean"},
            },
        },
        "threshold": {"type": "number", "minimum": 0},
        "warmup_hours": {"type": "integer", "minimum": 0},
        "map": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lat_min": _NUM, "lat_max": _NUM, "lon_min": _NUM, "lon_max": _NUM,
                "resolution": {"type": "number", "exclusiveMinimum": 0},
                "power": {"type": "number", "exclusiveMinimum": 0},
                "cutoff_deg": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "synth": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lat_min": _NUM, "lat_max": _NUM, "lon_min": _NUM, "lon_max": _NUM,
                "year": {"type": "integer"},
            },
        },
        "workers": {"oneOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}]},
    },
}


class CliError(Exception):
    def __init__(self, code: str, message: str, status: int = 1):
        super().__init__(message)
        self.code = code
        self.status = status

    def __reduce__(self):
        return type(self), (self.code, str(self), self.status)


@dataclass
class RunConfig:
    climate_dir: str = "climate"
    output_dir: str = "out"
    collector: dict[str, float] = field(default_factory=dict)
    sweep: dict[str, Any] = field(default_factory=dict)
    threshold: float = DEFAULT_THRESHOLD
    warmup_hours: int = 0
    map: dict[str, float] = field(default_factory=dict)
    synth: dict[str, float] = field(default_factory=dict)
    workers: int | str = 1

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            jsonschema.validate(data, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise CliError("E_CONFIG", f"{where}: {exc.message}", 2) from None
        config = cls(**data)
        config.params()  # fail early on invalid overrides
        config.grid()
        return config

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError("E_CONFIG", f"cannot read config {path}: {exc.strerror}", 2) from None
        except json.JSONDecodeError as exc:
            raise CliError("E_CONFIG", f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}", 2) from None
        return cls.from_dict(data)

    def params(self) -> CollectorParams:
        try:
            return CollectorParams(**self.collector)
        except ParameterError as exc:
            raise CliError("E_PARAM", str(exc), 2) from None

    def grid(self) -> SweepGrid:
        d1 = [v / 1000 for v in self.sweep.get("d1_mm", [20, 35, 50])]
        mdot = [v / 60 for v in self.sweep.get("mdot_kg_per_min", [0.5, 1, 2])]
        try:
            return SweepGrid(d1, mdot)
        except SweepError as exc:
            raise CliError("E_CONFIG", f"sweep: {exc}", 2) from None

    def grid_spec(self) -> mapping.GridSpec:
        keys = ("lat_min", "lat_max", "lon_min", "lon_max", "resolution")
        try:
            return mapping.GridSpec(**{k: self.map[k] for k in keys if k in self.map})
        except mapping.MappingError as exc:
            raise CliError("E_CONFIG", f"map: {exc}", 2) from None

    def worker_count(self) -> int:
        if self.workers == "auto":
            return os.cpu_count() or 1
        return int(self.workers)


# ---------------------------------------------------------------------------
# helpers

def _fan_out(func: Callable, jobs: Sequence, workers: int) -> list:
    """Map ``func`` over ``jobs`` keeping input order, in worker processes if asked."""
    if workers <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, jobs))


def _station_files(config: RunConfig) -> list[Path]:
    directory = Path(config.climate_dir)
    if not directory.is_dir():
        raise CliError("E_INPUT", f"climate directory not found: {directory}")
    return sorted(directory.glob("*.wac"))


def _write(path: Path, content: str | bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(content, bytes):
        path.write_bytes(content)
    else:
        path.write_text(content, encoding="utf-8", newline="\n")


def _sorted_by_station(rows: list[tuple]) -> list[tuple]:
    ids = [r[0].id for r in rows]
    dup = {i for i in ids if ids.count(i) > 1}
    if dup:
        raise CliError("E_CLIMATE", f"duplicate station id(s): {', '.join(sorted(dup))}")
    return sorted(rows, key=lambda r: r[0].id)


# ---------------------------------------------------------------------------
# synth

def synth_profiles(count: int, seed: int, lat_range=(36.0, 70.0), lon_range=(-10.0, 30.0),
                   year: int = 2001) -> list[SyntheticProfile]:
    """Station profiles scattered over a lat/lon box.

    Irradiance falls and cloudiness rises strictly with latitude; temperatures
    get a small random offset.
    """
    rng = np.random.default_rng(seed)
    lats = rng.uniform(*lat_range, size=count)
    lons = rng.uniform(*lon_range, size=count)
    elev = rng.uniform(0.0, 500.0, size=count)
    offsets = rng.normal(0.0, 1.0, size=count)
    width = max(3, len(str(count)))
    profiles = []
    for i in range(count):
        lat = round(float(lats[i]), 4)
        lon = round(float(lons[i]), 4)
        north = (lat - 35.0) / 35.0  # 0 at 35N, 1 at 70N
        east = (lon + 10.0) / 40.0
        profiles.append(SyntheticProfile(
            mean_ta=round(31.4 - 0.41 * lat + float(offsets[i]), 3),
            annual_amplitude=round(6.0 + 3.0 * north + 3.0 * east, 3),
            diurnal_amplitude=round(8.0 - 4.0 * north, 3),
            peak_irradiance=round(1000.0 - 245.0 * north, 3),
            cloud=round(0.25 + 0.42 * north, 4),
            latitude=lat,
            longitude=lon,
            elevation=round(float(elev[i]), 1),
            station_id=f"S{i + 1:0{width}d}",
            station_name=f"Synthetic {i + 1:0{width}d}",
            year=year,
        ))
    return profiles


def cmd_synth(args, config: RunConfig) -> int:
    out = Path(args.out or config.climate_dir)
    s = config.synth
    profiles = synth_profiles(
        args.count,
        args.seed,
        (s.get("lat_min", 36.0), s.get("lat_max", 70.0)),
        (s.get("lon_min", -10.0), s.get("lon_max", 30.0)),
        int(s.get("year", 2001)),
    )
    out.mkdir(parents=True, exist_ok=True)
    index = io.StringIO()
    w = csv.writer(index, lineterminator="\n")
    w.writerow(["id", "name", "lat", "lon", "elev", "file"])
    for p in profiles:
        name = f"{p.station_id}.wac"
        _write(out / name, write_wac(generate_synthetic(p)))
        w.writerow([p.station_id, p.station_name, repr(p.latitude), repr(p.longitude), repr(p.elevation), name])
    _write(out / "stations.csv", index.getvalue())
    print(f"wrote {len(profiles)} climate files to {out}")
    return 0


# ---------------------------------------------------------------------------
# validate

def _validate_file(job):
    path, gap_fill = job
    try:
        series = climate_io.read_wac(path)
        _, issues = climate_io.validate_series(series, gap_fill)
    except ClimateError as exc:
        return path.name, None, str(exc)
    return path.name, [str(i) for i in issues], None


def cmd_validate(args, config: RunConfig) -> int:
    paths = _station_files(config)
    results = _fan_out(_validate_file, [(p, args.gap_fill) for p in paths], config.worker_count())
    failed = 0
    for name, issues, error in results:
        if error:
            failed += 1
            print(f"FAIL {name}: {error}")
        else:
            print(f"ok   {name}" + (f" ({len(issues)} gap(s) filled)" if issues else ""))
            for issue in issues:
                print(f"     {issue}")
    if failed:
        raise CliError("E_CLIMATE", f"{failed} of {len(paths)} climate file(s) failed validation")
    return 0


# ---------------------------------------------------------------------------
# simulate

def _load(path: Path) -> climate_io.ClimateSeries:
    try:
        return climate_io.read_wac(path)
    except ClimateError as exc:
        raise CliError("E_CLIMATE", str(exc)) from None


def _simulate_station(job):
    path, params, threshold, warmup, out_dir = job
    climate = _load(path)
    result = evaluate(params, climate, threshold, warmup)
    hours = np.arange(warmup, len(climate))
    table = np.column_stack([hours, climate.ta[warmup:], climate.isgh[warmup:], result.pout, result.p50])
    buf = io.StringIO()
    buf.write("hour,ta,isgh,pout,p50\n")
    np.savetxt(buf, table, fmt=["%d", "%.3f", "%.3f", "%.6f", "%.6f"], delimiter=",")
    _write(Path(out_dir) / "stations" / f"{climate.station.id}.csv", buf.getvalue())
    return climate.station, {"pf_p": result.pf_p, "pf_t": result.pf_t}


def cmd_simulate(args, config: RunConfig) -> int:
    out = Path(config.output_dir) / "simulate"
    params = config.params()
    jobs = [(p, params, config.threshold, config.warmup_hours, out) for p in _station_files(config)]
    rows = _sorted_by_station(_fan_out(_simulate_station, jobs, config.worker_count()))
    _write(out / "summary.csv", mapping.write_station_csv(
        [mapping.StationIndicator(st, v) for st, v in rows], ["pf_p", "pf_t"]))
    print(f"simulated {len(rows)} station(s); summary in {out / 'summary.csv'}")
    return 0


# ---------------------------------------------------------------------------
# sweep

def _sweep_station(job):
    path, params, grid, threshold, warmup, rederive, out_dir = job
    climate = _load(path)
    try:
        result = run_sweep(params, grid, climate, threshold, rederive, warmup)
    except SweepError as exc:
        raise CliError("E_SIMULATION", str(exc)) from None
    _write(Path(out_dir) / "tables" / f"{climate.station.id}.txt", format_tables(result))
    return climate.station, result.cells, best_config(result)


def cmd_sweep(args, config: RunConfig) -> int:
    out = Path(config.output_dir) / "sweep"
    params = config.params()
    grid = config.grid()
    rederive = bool(config.sweep.get("rederive_capacities", True))
    jobs = [(p, params, grid, config.threshold, config.warmup_hours, rederive, out)
            for p in _station_files(config)]
    rows = _sorted_by_station(_fan_out(_sweep_station, jobs, config.worker_count()))

    cells = io.StringIO()
    w = csv.writer(cells, lineterminator="\n")
    w.writerow(["id", "mdot_kg_s", "d1_m", "pf_p", "pf_t"])
    for station, station_cells, _ in rows:
        for c in station_cells:
            w.writerow([station.id, repr(c.mdot), repr(c.d1), repr(c.pf_p), repr(c.pf_t)])
    _write(out / "cells.csv", cells.getvalue())
    best = mapping.collect((station, b) for station, _, b in rows) if rows else []
    _write(out / "best.csv", mapping.write_station_csv(best, ["best_pf_p", "best_pf_t", "best_d1", "best_mdot"]))
    print(f"swept {len(rows)} station(s) x {grid.shape[0] * grid.shape[1]} configuration(s); results in {out}")
    return 0


# ---------------------------------------------------------------------------
# map

def _map_inputs(config: RunConfig) -> list[mapping.StationIndicator]:
    merged: dict[str, mapping.StationIndicator] = {}
    sources = [Path(config.output_dir) / "simulate" / "summary.csv", Path(config.output_dir) / "sweep" / "best.csv"]
    for path in sources:
        if not path.exists():
            continue
        for ind in mapping.read_station_csv(path.read_text(encoding="utf-8")):
            prev = merged.get(ind.station.id)
            values = {**prev.values, **ind.values} if prev else ind.values
            merged[ind.station.id] = mapping.StationIndicator(ind.station, values)
    if not merged:
        raise CliError("E_INPUT", f"no simulate or sweep results under {config.output_dir}; run simulate or sweep first")
    return [merged[k] for k in sorted(merged)]


def cmd_map(args, config: RunConfig) -> int:
    indicators = _map_inputs(config)
    field_name = args.field
    if any(field_name not in ind.values for ind in indicators):
        available = sorted({k for ind in indicators for k in ind.values})
        raise CliError("E_FIELD", f"unknown field {field_name!r}; available: {', '.join(available)}", 2)
    m = config.map
    grid = mapping.idw_interpolate(
        indicators, field_name, config.grid_spec(), m.get("power", 2.0), m.get("cutoff_deg", 10.0)
    )
    out = Path(config.output_dir) / "map" / field_name
    asc, ppm = mapping.write_raster(grid)
    _write(out / "stations.csv", mapping.write_station_csv(indicators, [field_name]))
    _write(out / "stations.geojson", mapping.write_geojson(indicators))
    _write(out / "grid.asc", asc)
    _write(out / "map.ppm", ppm)
    print(f"mapped {field_name} from {len(indicators)} station(s) to {out}")
    return 0


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--climate-dir", help="directory of .wac files (overrides config)")
    common.add_argument("--output-dir", help="output directory (overrides config)")
    common.add_argument("--workers", help="worker processes: a number or 'auto'")
    common.add_argument("--threshold", type=float, help="operability threshold [W/m2]")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wallmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write synthetic station climates")
    p.add_argument("count", type=int)
    p.add_argument("--out", help="target directory (default: climate_dir)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", parents=[common], help="check every climate file")
    p.add_argument("--gap-fill", action="store_true", help="repair gaps of up to 3 h")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", parents=[common], help="simulate the base configuration per station")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="run the parameter grid per station")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("map", parents=[common], help="interpolate one indicator and write map files")
    p.add_argument("--field", default="pf_p")
    p.set_defaults(func=cmd_map)
    return parser


def _config_from_args(args) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    if args.climate_dir:
        config.climate_dir = args.climate_dir
    if args.output_dir:
        config.output_dir = args.output_dir
    if args.threshold is not None:
        if not args.threshold >= 0:
            raise CliError("E_CONFIG", f"threshold must be >= 0, got {args.threshold}", 2)
        config.threshold = args.threshold
    if args.workers is not None:
        if args.workers != "auto" and not (args.workers.isdigit() and int(args.workers) >= 1):
            raise CliError("E_CONFIG", f"--workers must be a positive integer or 'auto', got {args.workers!r}", 2)
        config.workers = args.workers if args.workers == "auto" else int(args.workers)
    return config


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if getattr(args, "count", 0) < 0:
            raise CliError("E_CONFIG", "count must be >= 0", 2)
        return args.func(args, _config_from_args(args))
    except CliError as exc:
        return _fail(exc.code, exc, exc.status)
    except ClimateError as exc:
        return _fail("E_CLIMATE", exc)
    except OSError as exc:
        return _fail("E_IO", exc)


def _fail(code: str, exc: Exception, status: int = 1) -> int:
    message = " ".join(str(exc).split())
    print(f"error {code}: {message}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
