import numpy as np
import pytest
from hypothesis import settings

from wallmap.climate_io import FIELDS, ClimateSeries, Station, SyntheticProfile, generate_synthetic, hours_in_year

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

ACCEPTANCE_LOG: list[str] = []

NL_PROFILE = SyntheticProfile(mean_ta=10.0, annual_amplitude=8.0, diurnal_amplitude=4.0,
                              peak_irradiance=800.0, cloud=0.6, station_id="NL")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def nl_climate():
    return generate_synthetic(NL_PROFILE)


def constant_climate(year=2001, station_id="const", **columns):
    station = Station(station_id, "", 52.0, 5.0)
    return ClimateSeries.from_columns(station, year, **columns)


def random_series(seed: int, year: int = 2001, station: Station | None = None) -> ClimateSeries:
    """A valid but noisy series: every column drawn inside its legal range."""
    rng = np.random.default_rng(seed)
    n = hours_in_year(year)
    isgh = rng.uniform(0, 1000, n) * (rng.random(n) < 0.6)
    cols = {
        "isgh": isgh,
        "isd": isgh * rng.random(n),
        "ci": rng.random(n),
        "ta": rng.normal(10, 10, n),
        "hrel": rng.uniform(0, 100, n),
        "ws": rng.exponential(3, n),
        "wd": rng.uniform(0, 360, n) % 360,
        "rn": rng.exponential(0.1, n) * (rng.random(n) < 0.1),
        "ilah": rng.uniform(150, 450, n),
    }
    assert set(cols) == set(FIELDS)
    station = station or Station(f"R{seed}", f"random {seed}", 45.0, 10.0, 12.5)
    return ClimateSeries.from_columns(station, year, **cols)
