"""Output flux and annual performance indicators of the collector.

``pout``  harvested flux mdot c (T_ret - T_sup) / A                [W/m2]
``p50``   pout with values below the operability threshold zeroed [W/m2]
``pf_t``  share of all hours (nights included) with p50 > 0        [%]
``pf_p``  100 * sum(p50) / sum(I), the yearly mean efficiency      [%]
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .climate_io import ClimateSeries
from .collector import CollectorParams, simulate_collector
from .statespace import Trajectory

DEFAULT_THRESHOLD = 50.0  # W/m2


class IndicatorError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PerformanceResult:
    pout: np.ndarray
    p50: np.ndarray
    pf_t: float
    pf_p: float
    threshold: float

    def summary(self) -> dict[str, float]:
        return {"pf_p": self.pf_p, "pf_t": self.pf_t}


def compute_pout(trajectory: Trajectory, params: CollectorParams) -> np.ndarray:
    """Flux per hour, using the return temperature at the end of each hour.

    Element ``k`` pairs with the input sample of hour ``k``.
    """
    states = np.asarray(trajectory.states)
    if states.ndim != 2 or states.shape[1] < 2:
        raise IndicatorError(f"trajectory states must be (steps + 1, >=2), got {states.shape}")
    t_ret = states[1:, 1]
    return params.flow_capacity * (t_ret - params.t_sup) / params.area


def apply_threshold(pout, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Keep values at or above ``threshold``; everything else becomes 0."""
    if not threshold >= 0:
        raise IndicatorError(f"threshold must be >= 0, got {threshold}")
    pout = np.asarray(pout, dtype=float)
    return np.where(pout >= threshold, pout, 0.0)


def compute_pft(p50) -> float:
    p50 = np.asarray(p50, dtype=float)
    if p50.size == 0:
        raise IndicatorError("empty series")
    return 100.0 * np.count_nonzero(p50 > 0) / p50.size


def compute_pfp(p50, irradiance) -> float:
    p50 = np.asarray(p50, dtype=float)
    irradiance = np.asarray(irradiance, dtype=float)
    if p50.shape != irradiance.shape:
        raise IndicatorError(f"length mismatch: {p50.shape} vs {irradiance.shape}")
    total = irradiance.sum()
    if not total > 0:
        raise IndicatorError("total irradiance is zero; efficiency undefined")
    return 100.0 * p50.sum() / total


def evaluate(
    params: CollectorParams,
    climate: ClimateSeries,
    threshold: float = DEFAULT_THRESHOLD,
    warmup_hours: int = 0,
) -> PerformanceResult:
    """Simulate one station-year and score it.

    ``warmup_hours`` leading hours are dropped before scoring. Without any
    sun, pf_p is 0 when nothing was harvested and an error otherwise.
    """
    if not 0 <= warmup_hours < len(climate):
        raise IndicatorError(f"warmup_hours must be in [0, {len(climate)}), got {warmup_hours}")
    trajectory = simulate_collector(params, climate)
    pout = compute_pout(trajectory, params)[warmup_hours:]
    p50 = apply_threshold(pout, threshold)
    irradiance = climate.isgh[warmup_hours:]
    pf_p = 0.0 if irradiance.sum() == 0 and not p50.any() else compute_pfp(p50, irradiance)
    return PerformanceResult(pout, p50, compute_pft(p50), pf_p, threshold)
