"""Explicit RK4 time stepping with step-doubling control and breaking monitors."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .diagnostics import DiagnosticsRecord, conserved_quantities
from .errors import ConfigurationError, NonFiniteError
from .operators import FieldState, ModelParams, inverse_helmholtz, momentum, rhs_m, rhs_u_direct
from .spectral import NormFamily, derivative, sobolev_norm

log = logging.getLogger(__name__)

Forcing = Callable[[np.ndarray, float], np.ndarray]


class Method(str, enum.Enum):
    RK4_FIXED = "rk4-fixed"
    RK4_DOUBLING = "rk4-doubling"


class Form(str, enum.Enum):
    U = "u-form"
    M = "m-form"


class StopReason(str, enum.Enum):
    REACHED_T_END = "reached_t_end"
    WAVE_BREAKING = "wave_breaking_detected"
    NORM_CAP = "norm_cap_exceeded"
    NON_FINITE = "non_finite"


@dataclass(frozen=True)
class StepperConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    method: Method = Method.RK4_FIXED
    tolerance: float = 1e-10
    form: Form = Form.U
    min_dt: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "form", Form(self.form))
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigurationError("t_end must be positive", "time.t_end")
        if not (math.isfinite(self.dt) and 0 < self.dt <= self.t_end):
            raise ConfigurationError("dt must satisfy 0 < dt <= t_end", "time.dt")
        if not self.tolerance > 0:
            raise ConfigurationError("tolerance must be positive", "time.tolerance")


@dataclass(frozen=True)
class MonitorConfig:
    slope_threshold: float = 1e3
    norm_cap: float = 1e8
    check_stride: int = 10

    def __post_init__(self):
        if not self.slope_threshold > 0:
            raise ConfigurationError("must be positive", "monitor.slope_threshold")
        if not self.norm_cap > 0:
            raise ConfigurationError("must be positive", "monitor.norm_cap")
        if int(self.check_stride) != self.check_stride or self.check_stride < 1:
            raise ConfigurationError("must be a positive integer", "monitor.check_stride")


@dataclass
class RunResult:
    final: FieldState
    stop_reason: StopReason
    stop_time: float
    trail: List[DiagnosticsRecord] = field(default_factory=list)
    steps: int = 0


def rk4_step(
    state: FieldState,
    dt: float,
    rhs: Callable[[np.ndarray], np.ndarray],
    forcing: Optional[Forcing] = None,
) -> FieldState:
    """One classical RK4 step of u_t = rhs(u) + forcing(x, t)."""
    x, t, u = state.grid.nodes, state.time, state.u

    def f(v, tt):
        out = rhs(v)
        if forcing is not None:
            out = out + forcing(x, tt)
        if not np.all(np.isfinite(out)):
            raise NonFiniteError(f"non-finite stage value at t={tt:g}")
        return out

    k1 = f(u, t)
    k2 = f(u + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(u + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(u + dt * k3, t + dt)
    new = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise NonFiniteError(f"non-finite state at t={t + dt:g}")
    return FieldState(state.grid, new, t + dt)


def wave_breaking_monitor(state: FieldState, cfg: MonitorConfig, L) -> Optional[StopReason]:
    """Return the triggered stop condition, if any.

    Slope: min_x u_x < -slope_threshold. Norm: GammaWeighted s=1 norm > norm_cap.
    """
    if not np.all(np.isfinite(state.u)):
        return StopReason.NON_FINITE
    slope = float(np.min(derivative(state.grid, state.u, 1)))
    if slope < -cfg.slope_threshold:
        return StopReason.WAVE_BREAKING
    if sobolev_norm(state.grid, state.u, 1.0, NormFamily.gamma(L)) > cfg.norm_cap:
        return StopReason.NORM_CAP
    return None


def integrate(
    initial: FieldState,
    params: ModelParams,
    stepper: StepperConfig = StepperConfig(),
    monitor: MonitorConfig = MonitorConfig(),
    forcing: Optional[Forcing] = None,
    callback: Optional[Callable[[FieldState, int], None]] = None,
) -> RunResult:
    """Advance ``initial`` to ``stepper.t_end`` or until a monitor fires.

    ``forcing`` always enters the u-equation; in m-form it is mapped through
    (1 - L d_xx). ``callback(state, step)`` sees every accepted u-state.
    """
    grid, L = initial.grid, params.L
    L.validate(grid)
    if not np.all(np.isfinite(initial.u)):
        raise NonFiniteError("initial field is not finite")

    if stepper.form is Form.M:
        rhs = lambda v: rhs_m(grid, v, params)  # noqa: E731
        to_var = lambda u: momentum(grid, u, L)  # noqa: E731
        to_u = lambda v: inverse_helmholtz(grid, v, L)  # noqa: E731
        var_forcing = None
        if forcing is not None:
            var_forcing = lambda x, t: momentum(grid, forcing(x, t), L)  # noqa: E731
    else:
        rhs = lambda v: rhs_u_direct(grid, v, params)  # noqa: E731
        to_var = to_u = lambda v: v  # noqa: E731
        var_forcing = forcing

    t0 = float(initial.time)
    t_end = t0 + stepper.t_end
    u_state = FieldState(grid, initial.u.copy(), t0)
    state = FieldState(grid, to_var(u_state.u), t0)
    trail = [conserved_quantities(u_state, params)]
    if callback:
        callback(u_state, 0)

    def stop(reason, steps):
        if trail[-1].time < u_state.time:
            trail.append(conserved_quantities(u_state, params))
        return RunResult(u_state, reason, u_state.time, trail, steps)

    reason = wave_breaking_monitor(u_state, monitor, L)
    if reason is not None:
        return stop(reason, 0)

    dt = stepper.dt
    steps = 0
    fixed_count = _fixed_step_count(stepper.t_end, dt)
    while True:
        if stepper.method is Method.RK4_FIXED:
            if steps >= fixed_count:
                break
            h = min(dt, t_end - (t0 + steps * dt))
        else:
            remaining = t_end - state.time
            if remaining <= 1e-12 * max(1.0, abs(t_end)):
                break
            h = min(dt, remaining)
        try:
            if stepper.method is Method.RK4_FIXED:
                new = rk4_step(state, h, rhs, var_forcing)
                new.time = t0 + steps * dt + h
            else:
                new, dt = _doubling_step(state, h, dt, rhs, var_forcing, stepper)
        except NonFiniteError as exc:
            log.info("stopping: %s", exc)
            return stop(StopReason.NON_FINITE, steps)
        state = new
        steps += 1
        u_state = FieldState(grid, to_u(state.u), state.time)
        if callback:
            callback(u_state, steps)
        if steps % monitor.check_stride == 0:
            trail.append(conserved_quantities(u_state, params))
            reason = wave_breaking_monitor(u_state, monitor, L)
            if reason is not None:
                return stop(reason, steps)

    return stop(StopReason.REACHED_T_END, steps)


def _fixed_step_count(t_end: float, dt: float) -> int:
    ratio = t_end / dt
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio):
        return int(nearest)
    return int(math.ceil(ratio))


def _doubling_step(state, h, dt, rhs, forcing, cfg: StepperConfig):
    """Accept one step by comparing a full step against two half steps.

    Returns the accepted state (two half steps) and the next trial dt.
    """
    while True:
        full = rk4_step(state, h, rhs, forcing)
        mid = rk4_step(state, 0.5 * h, rhs, forcing)
        half = rk4_step(mid, 0.5 * h, rhs, forcing)
        scale = max(1.0, float(np.max(np.abs(half.u))))
        err = float(np.max(np.abs(half.u - full.u))) / scale
        if err <= cfg.tolerance:
            next_dt = dt
            if err < cfg.tolerance / 64.0:
                next_dt = 2.0 * dt
            return half, min(next_dt, cfg.t_end)
        h *= 0.5
        dt = h
        if h < cfg.min_dt:
            raise NonFiniteError(f"step size underflow at t={state.time:g}")
