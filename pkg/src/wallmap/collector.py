"""Three-node model of a solar collector wall with an embedded water circuit.

Nodes: external surface (T1), water return (T2), internal wall (T3).
Inputs: ambient air temperature, water supply temperature, solar irradiance.

    C1 dT1/dt = h A (Tamb - T1) - (T1 - T2)/R1 + a1 A I
    C2 dT2/dt = mdot c (Tsup - T2) + (T1 - T2)/R1 - (T2 - T3)/R2
    C3 dT3/dt = (T2 - T3)/R2

with R1 = d1/(k A) and R2 = d2/(k A).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .climate_io import ClimateSeries
from .statespace import InputSeries, LtiSystem, Trajectory, simulate

CONCRETE_DENSITY = 2300.0  # kg/m3
CONCRETE_HEAT_CAPACITY = 880.0  # J/(kg K)
WATER_DENSITY = 1000.0  # kg/m3
WATER_HEAT_CAPACITY = 4186.0  # J/(kg K)

HOUR = 3600.0


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class CollectorParams:
    """Physical parameters of the wall collector (SI units).

    Capacities left as ``None`` are derived from geometry by
    :func:`derive_capacities`; explicit values are kept as given.
    """

    mdot: float = 1.0 / 60.0  # kg/s (1 kg/min)
    c: float = WATER_HEAT_CAPACITY
    a1: float = 0.9
    h: float = 25.0  # W/(m2 K), outdoor surface
    area: float = 1.0  # m2
    d1: float = 0.035  # m, pipe to surface
    d2: float = 0.065  # m, pipe to insulation
    k: float = 0.4  # W/(m K), concrete
    c1: float | None = None  # J/K
    c2: float | None = None
    c3: float | None = None
    t_sup: float = 10.0  # degC
    water_volume_per_area: float = 1e-3  # m3 per m2 of collector, used for c2

    def __post_init__(self):
        for name in ("c", "h", "area", "d1", "d2", "k", "water_volume_per_area"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value}")
        # zero flow is allowed: a stagnant circuit still has stable dynamics
        if not (math.isfinite(self.mdot) and self.mdot >= 0):
            raise ParameterError(f"mdot must be finite and >= 0, got {self.mdot}")
        if not (0.0 < self.a1 <= 1.0):
            raise ParameterError(f"a1 must be in (0, 1], got {self.a1}")
        for name in ("c1", "c2", "c3"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {value}")
        if not math.isfinite(self.t_sup):
            raise ParameterError("t_sup must be finite")

    @property
    def r1(self) -> float:
        return self.d1 / (self.k * self.area)

    @property
    def r2(self) -> float:
        return self.d2 / (self.k * self.area)

    @property
    def flow_capacity(self) -> float:
        """mdot * c in W/K."""
        return self.mdot * self.c

    def replace(self, **changes) -> "CollectorParams":
        return dataclasses.replace(self, **changes)


def default_params() -> CollectorParams:
    return CollectorParams()


def derive_capacities(params: CollectorParams) -> CollectorParams:
    """Fill unset capacities: concrete slabs of depth d1 and d2, water content of the circuit."""
    concrete = CONCRETE_DENSITY * CONCRETE_HEAT_CAPACITY * params.area
    return params.replace(
        c1=params.c1 if params.c1 is not None else concrete * params.d1,
        c2=params.c2 if params.c2 is not None
        else params.water_volume_per_area * params.area * WATER_DENSITY * params.c,
        c3=params.c3 if params.c3 is not None else concrete * params.d2,
    )


def build_system(params: CollectorParams) -> LtiSystem:
    """State (T1, T2, T3), input (Tamb, Tsup, I), starting isothermal at the supply temperature."""
    p = derive_capacities(params)
    ha = p.h * p.area
    g1 = 1.0 / p.r1
    g2 = 1.0 / p.r2
    mc = p.flow_capacity
    a = np.array([
        [-(ha + g1) / p.c1, g1 / p.c1, 0.0],
        [g1 / p.c2, -(mc + g1 + g2) / p.c2, g2 / p.c2],
        [0.0, g2 / p.c3, -g2 / p.c3],
    ])
    b = np.array([
        [ha / p.c1, 0.0, p.a1 * p.area / p.c1],
        [0.0, mc / p.c2, 0.0],
        [0.0, 0.0, 0.0],
    ])
    return LtiSystem(a, b, np.full(3, p.t_sup))


class CollectorState(NamedTuple):
    t1: float
    t2: float
    t3: float


def collector_inputs(params: CollectorParams, climate: ClimateSeries) -> InputSeries:
    u = np.column_stack([climate.ta, np.full(len(climate), params.t_sup), climate.isgh])
    return InputSeries(HOUR, u)


def simulate_collector(params: CollectorParams, climate: ClimateSeries) -> Trajectory:
    """Hourly simulation over the whole climate series; T_ret is state column 1."""
    return simulate(build_system(params), collector_inputs(params, climate))
