import numpy as np
import pytest
from hypothesis import given, strategies as st

from wallmap.climate_io import (
    FIELDS, ClimateError, ClimateSeries, Station, SyntheticProfile, generate_synthetic, load_station_set,
    parse_csv, parse_wac, validate_series, write_wac,
)

from .conftest import constant_climate, random_series


def _header(year=2001):
    return f"WACLIKE 1.0\nstation,X1,Test,52.1,5.18,2.0\nyear,{year}\n" + ",".join(FIELDS) + "\n"


def _zero_rows(n, ta=10):
    return f"0,0,0,{ta},0,0,0,0,0\n" * n


def test_parse_constant_file():
    series = parse_wac(_header() + _zero_rows(8760))
    assert len(series) == 8760
    assert np.all(series.ta == 10.0)
    assert series.station == Station("X1", "Test", 52.1, 5.18, 2.0)
    assert series.record(0).ta == 10.0


def test_row_count_mismatch():
    with pytest.raises(ClimateError, match="row count mismatch"):
        parse_wac(_header() + _zero_rows(8759))


def test_leap_year_needs_8784_rows():
    assert len(parse_wac(_header(2004) + _zero_rows(8784))) == 8784
    with pytest.raises(ClimateError, match="row count mismatch"):
        parse_wac(_header(2004) + _zero_rows(8760))


@pytest.mark.parametrize("lineno, bad_line, message", [
    (5, "0,0,0,10,0,0,0,0", "wrong column count"),
    (7, "0,0,0,warm,0,0,0,0,0", "non-numeric ta"),
    (9, "-1,0,0,10,0,0,0,0,0", "out of range: isgh"),
    (9, "100,200,0,10,0,0,0,0,0", "out of range: isd"),
    (6, "0,0,1.5,10,0,0,0,0,0", "out of range: ci"),
    (6, "0,0,0,10,0,0,360,0,0", "out of range: wd"),
    (6, "0,0,0,nan,0,0,0,0,0", "non-finite ta"),
])
def test_row_errors_carry_line_number(lineno, bad_line, message):
    rows = _zero_rows(8760).splitlines()
    rows[lineno - 5] = bad_line
    with pytest.raises(ClimateError, match=message) as exc:
        parse_wac(_header() + "\n".join(rows) + "\n")
    assert exc.value.line == lineno
    assert f"line {lineno}" in str(exc.value)


@pytest.mark.parametrize("header, line", [
    ("WAC 2\n", 1),
    ("WACLIKE 1.0\nstation,X1,Test,52.1\n", 2),
    ("WACLIKE 1.0\nstation,X1,Test,95,5,0\n", 2),
    ("WACLIKE 1.0\nstation,X1,Test,52,5,0\nyear,abc\n", 3),
    ("WACLIKE 1.0\nstation,X1,Test,52,5,0\nyear,2001\nta,isgh\n", 4),
])
def test_malformed_header(header, line):
    with pytest.raises(ClimateError, match="malformed header") as exc:
        parse_wac(header + _zero_rows(8760))
    assert exc.value.line == line


def test_diffuse_rounding_tolerance():
    rows = _zero_rows(8760).splitlines()
    rows[0] = "100,100.9,0,10,0,0,0,0,0"
    parse_wac(_header() + "\n".join(rows))


def test_write_row_count_matches_series():
    series = generate_synthetic(SyntheticProfile())
    text = write_wac(series)
    assert len(text.splitlines()) == 4 + len(series)


def test_empty_name_written_with_marker():
    series = constant_climate(ta=10)
    text = write_wac(series)
    assert text.splitlines()[1].startswith('station,const,"",')
    assert parse_wac(text).station.name == ""


@given(seed=st.integers(0, 2**32 - 1), leap=st.booleans(),
       name=st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=12),
       lat=st.floats(-90, 90), lon=st.floats(-180, 180), elev=st.floats(-500, 9000))
def test_round_trip_is_field_exact(seed, leap, name, lat, lon, elev):
    series = random_series(seed, 2004 if leap else 2001, Station("S1", name, lat, lon, elev))
    back = parse_wac(write_wac(series))
    assert back == series
    assert np.array_equal(back.data, series.data)


def test_csv_defaults_unmapped_fields():
    n = 8760
    text = "".join(f"{5 + (k % 24) * 0.5},{300 * (k % 2)},{100 * (k % 2)}\n" for k in range(n))
    series = parse_csv(text, {"ta": 0, "isgh": 1, "isd": 2})
    assert series.ta[3] == 6.5
    for name in ("ci", "hrel", "ws", "wd", "rn", "ilah"):
        assert np.all(series.column(name) == 0)


def test_csv_missing_column():
    text = "1,2,3,4,5\n" * 8760
    with pytest.raises(ClimateError, match="missing mapped column 99"):
        parse_csv(text, {"ta": 0, "isgh": 1, "isd": 99})


def test_csv_requires_core_fields():
    with pytest.raises(ClimateError, match="lacks required"):
        parse_csv("", {"ta": 0, "isgh": 1})


def test_csv_from_rearranged_wac_equals_original():
    series = random_series(7)
    order = [3, 0, 8, 1, 5, 2, 7, 4, 6]  # file column k holds FIELDS[order[k]]
    body = write_wac(series).splitlines()[4:]
    rearranged = ["x," + ",".join(row.split(",")[i] for i in order) for row in body]
    column_map = {FIELDS[i]: k + 1 for k, i in enumerate(order)}
    back = parse_csv("header\n" + "\n".join(rearranged), column_map, station=series.station,
                     start_year=series.start_year, header_rows=1)
    assert back == series


def test_synthetic_flat_profile():
    series = generate_synthetic(SyntheticProfile(annual_amplitude=0, diurnal_amplitude=0, cloud=0))
    assert np.all(series.ta == series.ta[0])
    days = series.isgh.reshape(-1, 24)
    assert np.array_equal(days, np.broadcast_to(days[0], days.shape))
    assert days[0].max() > 0 and days[0][:6].max() == 0 and days[0][18:].max() == 0


def test_synthetic_cloud_reduces_sun():
    clear = generate_synthetic(SyntheticProfile(cloud=0))
    cloudy = generate_synthetic(SyntheticProfile(cloud=1))
    assert cloudy.isgh.sum() < clear.isgh.sum()


def test_synthetic_annual_mean():
    series = generate_synthetic(SyntheticProfile(mean_ta=10, annual_amplitude=8))
    assert abs(series.ta.mean() - 10) <= 0.01


def test_synthetic_extremes_timing():
    series = generate_synthetic(SyntheticProfile(diurnal_amplitude=0, cloud=0))
    assert 10 <= np.argmin(series.ta) // 24 <= 20
    day = generate_synthetic(SyntheticProfile(annual_amplitude=0)).ta[:24]
    assert np.argmax(day) == 14


def test_synthetic_is_valid_and_deterministic():
    profile = SyntheticProfile(cloud=0.3)
    a, b = generate_synthetic(profile), generate_synthetic(profile)
    assert a == b
    assert validate_series(a) == (a, [])


@pytest.mark.parametrize("kwargs", [{"annual_amplitude": -1}, {"peak_irradiance": -5}, {"cloud": 1.2}])
def test_synthetic_rejects_bad_profile(kwargs):
    with pytest.raises(ClimateError):
        SyntheticProfile(**kwargs)


def test_validate_clean_series_unchanged():
    series = random_series(3)
    out, issues = validate_series(series, gap_fill=True)
    assert out == series and issues == []


def test_gap_fill_two_hours():
    ta = np.full(8760, 20.0)
    ta[100], ta[101], ta[102], ta[103] = 10, np.nan, np.nan, 13
    series = constant_climate(ta=ta)
    with pytest.raises(ClimateError):
        validate_series(series, gap_fill=False)
    out, issues = validate_series(series, gap_fill=True)
    assert out.ta[101] == pytest.approx(11) and out.ta[102] == pytest.approx(12)
    assert len(issues) == 1 and issues[0].field == "ta" and issues[0].start == 101 and issues[0].length == 2


def test_gap_of_five_hours_is_error():
    ta = np.full(8760, 20.0)
    ta[50:55] = np.nan
    with pytest.raises(ClimateError, match="gap of 5 h"):
        validate_series(constant_climate(ta=ta), gap_fill=True)


def test_out_of_range_counts_as_gap():
    hrel = np.full(8760, 60.0)
    hrel[10] = 140
    out, issues = validate_series(constant_climate(hrel=hrel), gap_fill=True)
    assert out.column("hrel")[10] == 60.0 and len(issues) == 1


@given(seed=st.integers(0, 1000), gaps=st.lists(st.tuples(st.integers(0, 8755), st.integers(1, 3)), max_size=6),
       column=st.sampled_from(FIELDS))
def test_validate_is_idempotent(seed, gaps, column):
    series = random_series(seed)
    data = series.data.copy()
    j = FIELDS.index(column)
    for start, n in gaps:
        data[start:start + n, j] = np.nan
    # separate gaps that merged into longer runs are out of scope here
    mask = np.isnan(data[:, j])
    padded = np.concatenate([[0], mask.astype(int), [0]])
    edges = np.flatnonzero(np.diff(padded))
    if any(e - s > 3 for s, e in zip(edges[::2], edges[1::2])):
        return
    fixed, _ = validate_series(ClimateSeries(series.station, series.start_year, data), gap_fill=True)
    again, issues = validate_series(fixed, gap_fill=True)
    assert issues == [] and again == fixed


def _write_set(tmp_path, ids):
    for i in ids:
        profile = SyntheticProfile(station_id=i, latitude=40 + len(i))
        (tmp_path / f"file_{i}.wac").write_text(write_wac(generate_synthetic(profile)))


def test_load_station_set_sorted(tmp_path):
    _write_set(tmp_path, ["c", "a", "b"])
    series = load_station_set(tmp_path)
    assert [s.station.id for s in series] == ["a", "b", "c"]


def test_load_empty_directory(tmp_path):
    assert load_station_set(tmp_path) == []


def test_load_reports_bad_file(tmp_path):
    _write_set(tmp_path, ["a"])
    (tmp_path / "broken.wac").write_text(_header() + _zero_rows(10))
    with pytest.raises(ClimateError, match="broken.wac: line"):
        load_station_set(tmp_path)


def test_load_130_files(tmp_path):
    for i in range(130):
        profile = SyntheticProfile(station_id=f"S{i:03d}", mean_ta=5 + i * 0.05)
        (tmp_path / f"S{i:03d}.wac").write_text(write_wac(generate_synthetic(profile)))
    series = load_station_set(tmp_path)
    assert len(series) == 130
    assert [s.station.id for s in series] == sorted(s.station.id for s in series)


def test_wind_direction_fills_along_short_arc():
    wd = np.full(8760, 350.0)
    wd[200], wd[201], wd[202] = 350.0, np.nan, 10.0
    out, _ = validate_series(constant_climate(wd=wd), gap_fill=True)
    filled = out.column("wd")[201]
    assert 0 <= filled < 360
    assert min(filled, 360 - filled) < 1e-9
