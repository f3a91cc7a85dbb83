"""Exhaustive parameter study over pipe depth and mass flow.

Results are kept as two matrices indexed ``[mdot index, d1 index]``, the
row/column orientation of the published efficiency and operation-time tables.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .climate_io import ClimateSeries, Station
from .collector import CollectorParams, derive_capacities
from .indicators import DEFAULT_THRESHOLD, evaluate


class SweepError(ValueError):
    pass


def _default_d1():
    return [0.020, 0.035, 0.050]


def _default_mdot():
    return [0.5 / 60, 1.0 / 60, 2.0 / 60]


@dataclass(frozen=True)
class SweepGrid:
    d1_values: list[float] = field(default_factory=_default_d1)  # m
    mdot_values: list[float] = field(default_factory=_default_mdot)  # kg/s

    def __post_init__(self):
        for name in ("d1_values", "mdot_values"):
            values = [float(v) for v in getattr(self, name)]
            if not values:
                raise SweepError(f"{name} must be non-empty")
            if any(not v > 0 for v in values):
                raise SweepError(f"{name} must be strictly positive")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise SweepError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, values)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.mdot_values), len(self.d1_values)


class Cell(NamedTuple):
    d1: float
    mdot: float
    pf_p: float
    pf_t: float


BestConfig = Cell


@dataclass(eq=False)
class SweepResult:
    grid: SweepGrid
    station: Station
    pf_p: np.ndarray  # [mdot, d1]
    pf_t: np.ndarray

    def __post_init__(self):
        self.pf_p = np.asarray(self.pf_p, dtype=float)
        self.pf_t = np.asarray(self.pf_t, dtype=float)
        if self.pf_p.shape != self.grid.shape or self.pf_t.shape != self.grid.shape:
            raise SweepError(f"cell matrices must have shape {self.grid.shape}")

    @property
    def cells(self) -> list[Cell]:
        return [
            Cell(d1, mdot, float(self.pf_p[i, j]), float(self.pf_t[i, j]))
            for i, mdot in enumerate(self.grid.mdot_values)
            for j, d1 in enumerate(self.grid.d1_values)
        ]


def run_sweep(
    base: CollectorParams,
    grid: SweepGrid,
    climate: ClimateSeries,
    threshold: float = DEFAULT_THRESHOLD,
    rederive_capacities: bool = True,
    warmup_hours: int = 0,
) -> SweepResult:
    """Evaluate every (mdot, d1) cell on one climate.

    Unset capacities follow each cell's geometry when ``rederive_capacities``
    is on; otherwise they are fixed from the base geometry first.
    """
    if not rederive_capacities:
        base = derive_capacities(base)
    pf_p = np.empty(grid.shape)
    pf_t = np.empty(grid.shape)
    for i, mdot in enumerate(grid.mdot_values):
        for j, d1 in enumerate(grid.d1_values):
            try:
                result = evaluate(base.replace(mdot=mdot, d1=d1), climate, threshold, warmup_hours)
            except ValueError as exc:
                raise SweepError(
                    f"{climate.station.id}: cell (mdot={mdot:g} kg/s, d1={d1:g} m) failed: {exc}"
                ) from exc
            pf_p[i, j] = result.pf_p
            pf_t[i, j] = result.pf_t
    return SweepResult(grid, climate.station, pf_p, pf_t)


def select_best(cells: Iterable[Cell]) -> Cell:
    """Highest pf_p; ties go to higher pf_t, then lower mdot, then lower d1."""
    cells = list(cells)
    if not cells:
        raise SweepError("no cells to select from")
    return max(cells, key=lambda c: (c.pf_p, c.pf_t, -c.mdot, -c.d1))


def best_config(result: SweepResult) -> BestConfig:
    return select_best(result.cells)


# ---------------------------------------------------------------------------
# table text

PF_P_TITLE = "Simulated yearly mean efficiency PF_p [%]"
PF_T_TITLE = "Simulated operation time PF_t [%]"
_ROW_LABEL = "MF={:g} kg/min"
_COL_LABEL = "d={:g} mm"


def _table(title: str, values: np.ndarray, grid: SweepGrid) -> list[str]:
    rows = [_ROW_LABEL.format(round(m * 60, 6)) for m in grid.mdot_values]
    cols = [_COL_LABEL.format(round(d * 1000, 6)) for d in grid.d1_values]
    w0 = max(len(r) for r in rows)
    w = max(8, max(len(c) for c in cols))
    lines = [title, " " * w0 + "".join(f"  {c:>{w}}" for c in cols)]
    for label, row in zip(rows, values):
        lines.append(f"{label:<{w0}}" + "".join(f"  {v:>{w}.1f}" for v in row))
    return lines


def format_tables(result: SweepResult) -> str:
    lines = [f"station {result.station.id}"]
    lines += _table(PF_P_TITLE, result.pf_p, result.grid)
    lines.append("")
    lines += _table(PF_T_TITLE, result.pf_t, result.grid)
    return "\n".join(lines) + "\n"


_COL_RE = re.compile(r"d=([0-9.eE+-]+) mm")
_ROW_RE = re.compile(r"MF=([0-9.eE+-]+) kg/min")


def parse_tables(text: str) -> tuple[SweepGrid, np.ndarray, np.ndarray]:
    """Read back the output of :func:`format_tables` (values to one decimal)."""
    blocks: dict[str, tuple[list[float], list[float], list[list[float]]]] = {}
    lines = text.splitlines()
    k = 0
    while k < len(lines):
        title = lines[k].strip()
        if title in (PF_P_TITLE, PF_T_TITLE):
            d1 = [float(v) / 1000 for v in _COL_RE.findall(lines[k + 1])]
            mdot, rows = [], []
            k += 2
            while k < len(lines) and (m := _ROW_RE.match(line := lines[k].strip())):
                mdot.append(float(m.group(1)) / 60)
                rows.append([float(v) for v in line[m.end():].split()])
                k += 1
            blocks[title] = (d1, mdot, rows)
        else:
            k += 1
    if set(blocks) != {PF_P_TITLE, PF_T_TITLE}:
        raise SweepError("text does not contain both tables")
    d1, mdot, pf_p = blocks[PF_P_TITLE]
    return SweepGrid(d1, mdot), np.array(pf_p), np.array(blocks[PF_T_TITLE][2])
