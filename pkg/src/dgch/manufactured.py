"""Temporal convergence against the travelling wave u*(x, t) = A cos(j k0 (x - c t)).

u* is not a solution of the unforced equation, so the study integrates
u_t = rhs(u) + F with F = u*_t - rhs(u*) evaluated spectrally at every stage
time. Then u* is the exact semi-discrete solution and every remaining error is
temporal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .operators import FieldState, ModelParams, rhs_u_direct
from .spectral import Grid, sobolev_norm
from .stepping import MonitorConfig, StepperConfig, StopReason, integrate


@dataclass(frozen=True)
class TravellingWave:
    amplitude: float = 0.5
    speed: float = 1.0
    wavenumber: int = 1

    def check(self, grid: Grid) -> None:
        """The quadratic terms put energy at 2j; it must survive dealiasing."""
        if int(self.wavenumber) != self.wavenumber or self.wavenumber < 0:
            raise ConfigurationError(
                "wavenumber must be a non-negative integer (periodicity)",
                "manufactured.wavenumber",
            )
        if 3 * 2 * self.wavenumber > grid.n:
            raise ConfigurationError(
                f"aliasing: the products of mode {self.wavenumber} reach mode "
                f"{2 * self.wavenumber}, above the n/3 cutoff for n={grid.n}",
                "manufactured.wavenumber",
            )

    def _phase(self, grid: Grid, x, t):
        return self.wavenumber * grid.k0 * (x - self.speed * t)

    def value(self, grid: Grid, t: float) -> np.ndarray:
        return self.amplitude * np.cos(self._phase(grid, grid.nodes, t))

    def time_derivative(self, grid: Grid, t: float) -> np.ndarray:
        w = self.wavenumber * grid.k0 * self.speed
        return self.amplitude * w * np.sin(self._phase(grid, grid.nodes, t))

    def forcing(self, grid: Grid, params: ModelParams):
        def F(x, t):
            return self.time_derivative(grid, t) - rhs_u_direct(grid, self.value(grid, t), params)

        return F


@dataclass
class ConvergenceResult:
    dts: List[float]
    errors: List[float]
    order: Optional[float]
    pairwise: List[Optional[float]] = field(default_factory=list)
    order_range: tuple = (3.5, 4.5)
    error_floor: float = 1e-8

    @property
    def trivial(self) -> bool:
        return max(self.errors, default=0.0) == 0.0

    @property
    def order_ok(self) -> bool:
        if self.trivial:
            return True
        lo, hi = self.order_range
        return self.order is not None and lo <= self.order <= hi

    @property
    def floor_ok(self) -> bool:
        return min(self.errors, default=0.0) <= self.error_floor

    @property
    def passed(self) -> bool:
        return self.order_ok and self.floor_ok


def observed_order(dts: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log(error) against log(dt); None if any error is 0."""
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0):
        return None
    slope, _ = np.polyfit(np.log(np.asarray(dts, dtype=float)), np.log(e), 1)
    return float(slope)


def convergence_study(
    grid: Grid,
    params: ModelParams,
    wave: TravellingWave,
    dt_sweep: Sequence[float],
    t_end: float,
    order_range: tuple = (3.5, 4.5),
    error_floor: float = 1e-8,
) -> ConvergenceResult:
    if len(dt_sweep) < 3:
        raise ConfigurationError("need at least 3 dt values", "manufactured.dt_sweep")
    wave.check(grid)
    params.L.validate(grid)
    F = wave.forcing(grid, params)
    exact = wave.value(grid, t_end)
    dts = sorted((float(d) for d in dt_sweep), reverse=True)
    errors = []
    for dt in dts:
        stepper = StepperConfig(dt=dt, t_end=t_end)
        # monitors off: the forced run is smooth by construction
        monitor = MonitorConfig(math.inf, math.inf, 1 << 30)
        res = integrate(FieldState(grid, wave.value(grid, 0.0), 0.0), params, stepper, monitor, F)
        if res.stop_reason is not StopReason.REACHED_T_END:
            raise ConfigurationError(
                f"forced run stopped early ({res.stop_reason.value}) at dt={dt:g}",
                "manufactured",
            )
        errors.append(sobolev_norm(grid, res.final.u - exact, 0.0))
    pairwise = []
    for i in range(1, len(dts)):
        e0, e1 = errors[i - 1], errors[i]
        pairwise.append(math.log(e0 / e1) / math.log(dts[i - 1] / dts[i]) if e0 > 0 and e1 > 0 else None)
    return ConvergenceResult(dts, errors, observed_order(dts, errors), pairwise,
                             tuple(order_range), error_floor)
