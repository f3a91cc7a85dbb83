import numpy as np
import pytest
from hypothesis import given, strategies as st

from wallmap.climate_io import Station
from wallmap.collector import default_params
from wallmap.indicators import evaluate
from wallmap.sweep import (
    Cell, SweepError, SweepGrid, SweepResult, best_config, format_tables, parse_tables, run_sweep, select_best,
)

TABLE_II = [[30.6, 24.7, 20.2], [39.0, 30.9, 25.2], [44.3, 34.8, 28.0]]
TABLE_III = [[29.8, 26.5, 23.7], [33.1, 29.5, 26.5], [34.5, 30.9, 27.7]]
DEBILT = Station("debilt", "De Bilt", 52.1, 5.18)


def published_result():
    return SweepResult(SweepGrid(), DEBILT, TABLE_II, TABLE_III)


def test_default_grid():
    grid = SweepGrid()
    assert grid.d1_values == [0.020, 0.035, 0.050]
    assert grid.mdot_values == pytest.approx([0.5 / 60, 1 / 60, 2 / 60])


@pytest.mark.parametrize("d1, mdot", [([], [1.0]), ([0.02, 0.02], [1.0]), ([0.05, 0.02], [1.0]), ([0.02], [0.0])])
def test_grid_validation(d1, mdot):
    with pytest.raises(SweepError):
        SweepGrid(d1, mdot)


def test_default_sweep_has_nine_cells(nl_climate):
    result = run_sweep(default_params(), SweepGrid(), nl_climate)
    assert len(result.cells) == 9
    assert result.station == nl_climate.station


def test_single_cell_equals_evaluate(nl_climate):
    p = default_params()
    result = run_sweep(p, SweepGrid([0.035], [1 / 60]), nl_climate)
    direct = evaluate(p.replace(d1=0.035, mdot=1 / 60), nl_climate)
    assert result.pf_p[0, 0] == direct.pf_p and result.pf_t[0, 0] == direct.pf_t


def test_sweep_reproducible(nl_climate):
    a = run_sweep(default_params(), SweepGrid(), nl_climate)
    b = run_sweep(default_params(), SweepGrid(), nl_climate)
    assert np.array_equal(a.pf_p, b.pf_p) and np.array_equal(a.pf_t, b.pf_t)


def test_sweep_ordering(nl_climate):
    r = run_sweep(default_params(), SweepGrid(), nl_climate)
    for m in (r.pf_p, r.pf_t):
        assert np.all(np.diff(m, axis=0) > 0)  # along mdot
        assert np.all(np.diff(m, axis=1) < 0)  # along d1


def test_fixed_capacities_option(nl_climate):
    grid = SweepGrid([0.02, 0.05], [1 / 60])
    a = run_sweep(default_params(), grid, nl_climate, rederive_capacities=True)
    b = run_sweep(default_params(), grid, nl_climate, rederive_capacities=False)
    assert b.pf_p[0, 0] != a.pf_p[0, 0]
    assert b.pf_p[0, 0] == pytest.approx(a.pf_p[0, 0], abs=2.0)


def test_sweep_error_names_cell(nl_climate):
    with pytest.raises(SweepError, match="d1=0.02"):
        run_sweep(default_params(), SweepGrid([0.02], [1 / 60]), nl_climate, warmup_hours=10**6)


def test_best_on_published_tables():
    assert best_config(published_result()) == Cell(0.020, 2 / 60, 44.3, 34.5)


def test_best_ties_prefer_low_flow():
    grid = SweepGrid()
    best = best_config(SweepResult(grid, DEBILT, np.full((3, 3), 30.0), np.full((3, 3), 20.0)))
    assert best.mdot == grid.mdot_values[0]
    assert best.d1 == grid.d1_values[0]


def test_best_ties_on_pfp_use_pft():
    pf_p = np.full((3, 3), 30.0)
    pf_t = np.zeros((3, 3))
    pf_t[2, 1] = 5.0
    best = best_config(SweepResult(SweepGrid(), DEBILT, pf_p, pf_t))
    assert (best.d1, best.mdot) == (0.035, 2 / 60)


def test_best_single_cell():
    r = SweepResult(SweepGrid([0.03], [0.01]), DEBILT, [[12.0]], [[8.0]])
    assert best_config(r) == Cell(0.03, 0.01, 12.0, 8.0)


cells = st.lists(
    st.builds(Cell, st.sampled_from([0.02, 0.035, 0.05]), st.sampled_from([0.5, 1.0, 2.0]),
              st.sampled_from([20.0, 25.0, 30.0]), st.sampled_from([10.0, 15.0])),
    min_size=1, max_size=9, unique_by=lambda c: (c.d1, c.mdot),
)


@given(cells, st.randoms())
def test_best_is_order_independent(cs, rnd):
    best = select_best(cs)
    assert best in cs
    assert all(best.pf_p >= c.pf_p for c in cs)
    shuffled = list(cs)
    rnd.shuffle(shuffled)
    assert select_best(shuffled) == best


def test_format_published_tables():
    text = format_tables(published_result())
    line = next(ln for ln in text.splitlines() if ln.startswith("MF=0.5 kg/min"))
    assert line.split()[2] == "30.6"
    assert "d=20 mm" in text and "d=50 mm" in text and "MF=2 kg/min" in text


def test_format_single_cell():
    text = format_tables(SweepResult(SweepGrid([0.03], [0.01]), DEBILT, [[12.0]], [[8.0]]))
    grid, pf_p, pf_t = parse_tables(text)
    assert pf_p.shape == (1, 1) and pf_p[0, 0] == 12.0 and pf_t[0, 0] == 8.0


@given(st.integers(0, 2**32 - 1))
def test_table_round_trip(seed):
    rng = np.random.default_rng(seed)
    grid = SweepGrid(sorted(set(np.round(rng.uniform(0.005, 0.1, 3), 3))), sorted(set(np.round(rng.uniform(0.1, 5, 2), 2) / 60)))
    pf_p = rng.uniform(0, 120, grid.shape)
    pf_t = rng.uniform(0, 100, grid.shape)
    back_grid, back_p, back_t = parse_tables(format_tables(SweepResult(grid, DEBILT, pf_p, pf_t)))
    assert np.abs(back_p - pf_p).max() <= 0.05 + 1e-9
    assert np.abs(back_t - pf_t).max() <= 0.05 + 1e-9
    assert np.allclose(back_grid.d1_values, grid.d1_values)
    assert np.allclose(back_grid.mdot_values, grid.mdot_values)
