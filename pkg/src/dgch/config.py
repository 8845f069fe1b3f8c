"""JSON run configuration.

Every section is optional; the defaults reproduce the classical Camassa-Holm
setup (a=2, b=1, L=identity, u0 = cos x). Unknown keys are rejected.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigurationError
from .operators import NAMED_PRESETS, FieldState, ModelParams, OperatorL, operator_from_name
from .spectral import Grid, make_grid
from .stepping import MonitorConfig, StepperConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridConfig(_Strict):
    n: int = 128
    period: float = Field(2 * math.pi, gt=0)

    @field_validator("n")
    @classmethod
    def _even(cls, v):
        if v < 8 or v % 2:
            raise ValueError(f"n must be even and >= 8, got {v}")
        return v


class ParamsConfig(_Strict):
    a: float = Field(2.0, gt=0)
    b: float = Field(1.0, gt=0)


class CosineInitial(_Strict):
    kind: Literal["cosine"] = "cosine"
    amplitude: float = 1.0
    wavenumber: int = Field(1, ge=0)
    phase: float = 0.0
    offset: float = 0.0


class FourierModesInitial(_Strict):
    kind: Literal["fourier-modes"]
    # rows of [j, cosine amplitude, sine amplitude]
    modes: List[Tuple[int, float, float]] = Field(default_factory=list)
    offset: float = 0.0

    @field_validator("modes")
    @classmethod
    def _nonneg(cls, v):
        if any(j < 0 for j, _, _ in v):
            raise ValueError("mode indices must be >= 0")
        return v


class GaussianInitial(_Strict):
    kind: Literal["gaussian-bump"]
    amplitude: float = 1.0
    center: Optional[float] = None
    width: float = Field(1.0, gt=0)


InitialConfig = Union[CosineInitial, FourierModesInitial, GaussianInitial]


class TimeConfig(_Strict):
    method: Literal["rk4-fixed", "rk4-doubling"] = "rk4-fixed"
    dt: float = Field(1e-3, gt=0)
    t_end: float = Field(1.0, gt=0)
    tolerance: float = Field(1e-10, gt=0)
    form: Literal["u-form", "m-form"] = "u-form"


class MonitorSection(_Strict):
    slope_threshold: float = Field(1e3, gt=0)
    norm_cap: float = Field(1e8, gt=0)
    check_stride: int = Field(10, ge=1)


class OutputConfig(_Strict):
    directory: str = "dgch-out"
    stride: int = Field(100, ge=1)


class ManufacturedConfig(_Strict):
    amplitude: float = 0.5
    speed: float = 1.0
    wavenumber: int = Field(1, ge=0)
    t_end: float = Field(0.5, gt=0)
    dt_sweep: List[float] = Field(default_factory=lambda: [4e-3, 2e-3, 1e-3])
    order_min: float = 3.5
    order_max: float = 4.5
    error_floor: float = Field(1e-8, gt=0)

    @field_validator("dt_sweep")
    @classmethod
    def _enough(cls, v):
        if len(v) < 3:
            raise ValueError("the dt sweep needs at least 3 values to estimate an order")
        if any(not (x > 0) for x in v):
            raise ValueError("dt values must be positive")
        return v


class CommutatorArgs(_Strict):
    n: float = 1.0
    s: float = 1.0
    sigma: float = 2.0


class VerifyConfig(_Strict):
    count: int = Field(100, ge=0)
    band: int = Field(16, ge=1)
    decay: float = Field(2.0, ge=2)
    n: int = 128
    s: Optional[float] = None
    frozen_count: int = Field(20, ge=0)
    frozen_t: float = Field(0.1, gt=0, le=1)
    commutator: CommutatorArgs = Field(default_factory=CommutatorArgs)


class CompareConfig(_Strict):
    count: int = Field(10, ge=0)
    band: int = Field(16, ge=1)
    decay: float = Field(2.0, ge=2)
    presets: List[str] = Field(default_factory=lambda: list(NAMED_PRESETS))
    probes: List[Literal["constant", "cosine"]] = Field(
        default_factory=lambda: ["constant", "cosine"]
    )


class RunConfig(_Strict):
    grid: GridConfig = Field(default_factory=GridConfig)
    operator: str = "identity"
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    initial: InitialConfig = Field(default_factory=CosineInitial, discriminator="kind")
    time: TimeConfig = Field(default_factory=TimeConfig)
    monitor: MonitorSection = Field(default_factory=MonitorSection)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = 0
    manufactured: ManufacturedConfig = Field(default_factory=ManufacturedConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    compare: CompareConfig = Field(default_factory=CompareConfig)

    # --- builders; each re-validates against downstream preconditions ---

    def build_grid(self) -> Grid:
        return make_grid(self.grid.n, self.grid.period)

    def build_operator(self, grid: Optional[Grid] = None) -> OperatorL:
        L = operator_from_name(self.operator)
        return L.validate(grid or self.build_grid())

    def build_params(self, grid: Optional[Grid] = None) -> ModelParams:
        return ModelParams(self.params.a, self.params.b, self.build_operator(grid))

    def build_stepper(self) -> StepperConfig:
        t = self.time
        return StepperConfig(t.dt, t.t_end, t.method, t.tolerance, t.form)

    def build_monitor(self) -> MonitorConfig:
        m = self.monitor
        return MonitorConfig(m.slope_threshold, m.norm_cap, m.check_stride)

    def build_initial(self, grid: Optional[Grid] = None) -> FieldState:
        grid = grid or self.build_grid()
        x, k0 = grid.nodes, grid.k0
        init = self.initial
        if init.kind == "cosine":
            _check_mode(init.wavenumber, grid, "initial.wavenumber")
            u = init.offset + init.amplitude * np.cos(init.wavenumber * k0 * x + init.phase)
        elif init.kind == "fourier-modes":
            u = np.full(grid.n, init.offset)
            for j, ca, sa in init.modes:
                _check_mode(j, grid, "initial.modes")
                u = u + ca * np.cos(j * k0 * x) + sa * np.sin(j * k0 * x)
        else:
            center = grid.period / 2 if init.center is None else init.center
            d = (x - center + grid.period / 2) % grid.period - grid.period / 2
            u = init.amplitude * np.exp(-((d / init.width) ** 2))
        return FieldState(grid, u, 0.0)

    def validate_all(self) -> None:
        """Screen every downstream precondition before any computation."""
        grid = self.build_grid()
        self.build_params(grid)
        self.build_stepper()
        self.build_monitor()
        self.build_initial(grid)


def _check_mode(j: int, grid: Grid, where: str) -> None:
    if 3 * j > grid.n:
        raise ConfigurationError(f"mode {j} is above the dealiasing cutoff n/3", where)


def _format_validation(exc: ValidationError) -> str:
    # "params.a: Input should be greater than 0"; pydantic already puts the
    # discriminator tag into the location of tagged-union members
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        lines.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(lines)


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded JSON object; every failure is a ConfigurationError."""
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationError(_format_validation(exc)) from None
    cfg.validate_all()
    return cfg


def load_config(path: Optional[str]) -> RunConfig:
    if path is None:
        return parse_config({})
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {p}: {exc.strerror or exc}", "config") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{p} is not valid JSON: {exc}", "config") from None
    if not isinstance(data, dict):
        raise ConfigurationError("top level must be a JSON object", "config")
    return parse_config(data)
