"""Continuous-time LTI systems ``dx/dt = A x + B u`` with piecewise-constant inputs.

Production stepping uses the exact zero-order-hold discretization
(``Ad = exp(A dt)``, ``Bd = int_0^dt exp(A s) ds B``), which is exact for
inputs held constant over each sample. :func:`rk4_simulate` is an
independent classical Runge-Kutta integrator kept for cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.linalg import expm


class StateSpaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LtiSystem:
    a: np.ndarray
    b: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        x0 = np.array(self.x0, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise StateSpaceError(f"A must be square, got shape {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise StateSpaceError(f"B must have {a.shape[0]} rows, got shape {b.shape}")
        if x0.shape != (a.shape[0],):
            raise StateSpaceError(f"x0 must have length {a.shape[0]}, got shape {x0.shape}")
        for name, arr in (("A", a), ("B", b), ("x0", x0)):
            if not np.all(np.isfinite(arr)):
                raise StateSpaceError(f"{name} has non-finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "x0", x0)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    def with_x0(self, x0) -> "LtiSystem":
        return LtiSystem(self.a, self.b, x0)


@dataclass(frozen=True, eq=False)
class InputSeries:
    dt: float
    samples: np.ndarray  # (steps, m)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if not self.dt > 0:
            raise StateSpaceError(f"dt must be > 0, got {self.dt}")
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise StateSpaceError("input series needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise StateSpaceError("input series has non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class Trajectory:
    dt: float
    states: np.ndarray  # (steps + 1, n); row 0 is x0

    def __len__(self):
        return self.states.shape[0]


def discretize(system: LtiSystem, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold discretization via the exponential of the augmented matrix.

    ``expm([[A, B], [0, 0]] dt) = [[Ad, Bd], [0, I]]``.
    """
    if not dt > 0:
        raise StateSpaceError(f"dt must be > 0, got {dt}")
    n, m = system.n, system.m
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = system.a
    aug[:n, n:] = system.b
    with np.errstate(over="ignore", invalid="ignore"):
        phi = expm(aug * dt)
    if not np.all(np.isfinite(phi)):
        raise StateSpaceError(f"matrix exponential overflowed for dt={dt}")
    return phi[:n, :n], phi[:n, n:]


def step(ad: np.ndarray, bd: np.ndarray, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if ad.shape != (x.size, x.size) or bd.shape != (x.size, u.size):
        raise StateSpaceError(
            f"dimension mismatch: Ad {ad.shape}, Bd {bd.shape}, x {x.shape}, u {u.shape}"
        )
    return ad @ x + bd @ u


@numba.njit(cache=True)
def _recurse(ad, forced, x0):
    steps, n = forced.shape
    out = np.empty((steps + 1, n))
    out[0] = x0
    for k in range(steps):
        for i in range(n):
            acc = forced[k, i]
            for j in range(n):
                acc += ad[i, j] * out[k, j]
            out[k + 1, i] = acc
    return out


def _check_width(system: LtiSystem, inputs: InputSeries):
    if inputs.samples.shape[1] != system.m:
        raise StateSpaceError(f"input width {inputs.samples.shape[1]} != system inputs {system.m}")


def simulate(system: LtiSystem, inputs: InputSeries) -> Trajectory:
    """March ``x[k+1] = Ad x[k] + Bd u[k]`` from ``x0`` over every input sample."""
    _check_width(system, inputs)
    ad, bd = discretize(system, inputs.dt)
    forced = np.ascontiguousarray(inputs.samples @ bd.T)
    states = _recurse(np.ascontiguousarray(ad), forced, system.x0)
    if not np.all(np.isfinite(states)):
        raise StateSpaceError("simulation produced non-finite states")
    return Trajectory(inputs.dt, states)


def steady_state(system: LtiSystem, u_const) -> np.ndarray:
    """Equilibrium ``x`` solving ``A x + B u = 0``."""
    u = np.asarray(u_const, dtype=float).reshape(system.m)
    if np.linalg.cond(system.a) > 1e14:
        raise StateSpaceError("A is singular; no unique steady state")
    return np.linalg.solve(system.a, -(system.b @ u))


def rk4_simulate(system: LtiSystem, inputs: InputSeries, substeps: int) -> Trajectory:
    """Classical fourth-order Runge-Kutta, ``substeps`` per input sample, input held constant."""
    if substeps < 1:
        raise StateSpaceError(f"substeps must be >= 1, got {substeps}")
    _check_width(system, inputs)
    a = system.a
    h = inputs.dt / substeps
    states = np.empty((len(inputs) + 1, system.n))
    states[0] = x = system.x0.copy()
    for k, u in enumerate(inputs.samples):
        bu = system.b @ u
        for _ in range(substeps):
            k1 = a @ x + bu
            k2 = a @ (x + 0.5 * h * k1) + bu
            k3 = a @ (x + 0.5 * h * k2) + bu
            k4 = a @ (x + h * k3) + bu
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = x
    return Trajectory(inputs.dt, states)


def is_hurwitz(a: np.ndarray) -> bool:
    return bool(np.all(np.linalg.eigvals(a).real < 0))
