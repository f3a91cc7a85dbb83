"""Climate-driven simulation and mapping of a solar collector wall."""
from .climate_io import ClimateSeries, Station, SyntheticProfile, generate_synthetic, parse_wac, write_wac
from .collector import CollectorParams, build_system, default_params, simulate_collector
from .indicators import PerformanceResult, evaluate
from .statespace import InputSeries, LtiSystem, Trajectory, discretize, rk4_simulate, simulate, steady_state
from .sweep import SweepGrid, SweepResult, best_config, run_sweep

__all__ = [
    "ClimateSeries", "Station", "SyntheticProfile", "generate_synthetic", "parse_wac", "write_wac",
    "CollectorParams", "build_system", "default_params", "simulate_collector",
    "PerformanceResult", "evaluate",
    "InputSeries", "LtiSystem", "Trajectory", "discretize", "rk4_simulate", "simulate", "steady_state",
    "SweepGrid", "SweepResult", "best_config", "run_sweep",
]
