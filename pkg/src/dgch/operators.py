"""Model operators for m_t + b u m_x + a m u_x = 0, m = (1 - L d_xx) u.

``L`` is a constant-coefficient, even, strictly positive Fourier multiplier
with symbol l(k). Everything here acts on real arrays sampled on a ``Grid``;
pointwise products are truncated with the two-thirds rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NonFiniteError
from .spectral import (
    Grid,
    apply_symbol,
    dealiased_product,
    derivative,
    integrate_periodic,
)

__all__ = [
    "OperatorL",
    "ModelParams",
    "FieldState",
    "PRESETS",
    "NAMED_PRESETS",
    "operator_from_name",
    "l_symbol",
    "momentum",
    "inverse_helmholtz",
    "commutator_L",
    "rhs_u_direct",
    "rhs_m",
    "rhs_ch_reference",
    "apply_A_paper",
    "quasilinear_residual",
]


@dataclass(frozen=True)
class OperatorL:
    """Dispersion operator given by its Fourier symbol.

    ``kind == "poly"``: l(k) = sum_j coeffs[j] k^(2j), order 2J.
    ``kind == "bessel"``: l(k) = alpha2 (1 + k^2)^(p/2), order p.
    """

    kind: str
    coeffs: tuple = ()
    alpha2: float = 1.0
    p: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.kind == "poly":
            c = tuple(float(x) for x in self.coeffs)
            if not c:
                raise ConfigurationError("polynomial symbol needs coefficients", "operator")
            if not all(math.isfinite(x) for x in c):
                raise ConfigurationError("non-finite polynomial coefficient", "operator")
            if c[-1] <= 0:
                raise ConfigurationError(
                    "leading polynomial coefficient must be positive", "operator"
                )
            object.__setattr__(self, "coeffs", c)
        elif self.kind == "bessel":
            if not (math.isfinite(self.alpha2) and self.alpha2 > 0):
                raise ConfigurationError("bessel amplitude must be positive", "operator")
            if not (math.isfinite(self.p) and self.p >= 0):
                raise ConfigurationError("bessel order p must be >= 0", "operator")
        else:
            raise ConfigurationError(f"unknown operator kind {self.kind!r}", "operator")
        if not self.name:
            object.__setattr__(self, "name", self.describe())

    @property
    def order(self) -> float:
        if self.kind == "poly":
            return 2.0 * (len(self.coeffs) - 1)
        return float(self.p)

    def symbol(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.kind == "poly":
            k2 = k * k
            out = np.zeros_like(k2)
            for c in reversed(self.coeffs):
                out = out * k2 + c
            return out
        return self.alpha2 * (1.0 + k * k) ** (self.p / 2.0)

    def momentum_symbol(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return 1.0 + k * k * self.symbol(k)

    def validate(self, grid: Grid) -> "OperatorL":
        vals = self.symbol(grid.rk)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ConfigurationError(
                "symbol l(k) must be finite and positive at every grid wavenumber",
                "operator",
            )
        return self

    def describe(self) -> str:
        if self.kind == "poly":
            return "poly:" + ",".join(f"{c:g}" for c in self.coeffs)
        return f"bessel:{self.p:g},{self.alpha2:g}"


PRESETS = {
    "identity": "L = 1 (classical Camassa-Holm for a=2, b=1)",
    "alpha2": "L = alpha^2 Id, alpha^2 = 0.5 unless given as 'alpha2:X'",
    "helmholtz": "L = 1 - d_xx, so m = u - u_xx + u_xxxx",
    "example-vi": "L = 2 - d_xx, so m = (1 - d_xx)^2 u",
    "bessel:p,a2": "l(k) = a2 (1 + k^2)^(p/2), any real p >= 0",
    "poly:c0,c1,...": "l(k) = c0 + c1 k^2 + c2 k^4 + ...",
}

# the four named presets, used wherever "every preset" is swept
NAMED_PRESETS = ("identity", "alpha2", "helmholtz", "example-vi")

DEFAULT_ALPHA2 = 0.5


def _parse_floats(text: str, what: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot parse {what} arguments {text!r}", "operator") from None


def operator_from_name(name: str) -> OperatorL:
    """Resolve a preset name or an explicit ``bessel:``/``poly:`` spec."""
    name = name.strip()
    head, _, args = name.partition(":")
    if head == "identity" and not args:
        return OperatorL("poly", (1.0,), name=name)
    if head == "helmholtz" and not args:
        return OperatorL("poly", (1.0, 1.0), name=name)
    if head == "example-vi" and not args:
        return OperatorL("poly", (2.0, 1.0), name=name)
    if head == "alpha2":
        vals = _parse_floats(args, "alpha2") if args else [DEFAULT_ALPHA2]
        if len(vals) != 1 or vals[0] <= 0:
            raise ConfigurationError("alpha2 takes one positive value", "operator")
        return OperatorL("poly", (vals[0],), name=name)
    if head == "bessel":
        vals = _parse_floats(args, "bessel")
        if len(vals) != 2:
            raise ConfigurationError("bessel spec is 'bessel:p,alpha2'", "operator")
        return OperatorL("bessel", p=vals[0], alpha2=vals[1], name=name)
    if head == "poly":
        return OperatorL("poly", tuple(_parse_floats(args, "poly")), name=name)
    raise ConfigurationError(f"unknown operator preset {name!r}", "operator")


@dataclass(frozen=True)
class ModelParams:
    a: float = 2.0
    b: float = 1.0
    L: OperatorL = field(default_factory=lambda: operator_from_name("identity"))

    def __post_init__(self):
        for label in ("a", "b"):
            v = getattr(self, label)
            if not (math.isfinite(v) and v > 0):
                raise ConfigurationError(f"must be positive, got {v}", f"params.{label}")


@dataclass
class FieldState:
    """Real field u on ``grid`` at ``time``. The momentum m is derived on demand."""

    grid: Grid
    u: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.u = self.grid.check(self.u)
        if not np.all(np.isfinite(self.u)):
            raise NonFiniteError("field has non-finite entries")

    @classmethod
    def from_function(cls, grid: Grid, func, time: float = 0.0) -> "FieldState":
        return cls(grid, np.asarray(func(grid.nodes), dtype=float) * np.ones(grid.n), time)


def l_symbol(L: OperatorL, k) -> np.ndarray:
    vals = L.symbol(k)
    if np.any(np.asarray(vals) <= 0):
        raise ConfigurationError("l(k) is not positive", "operator")
    return vals


def _L_dxx_symbol(grid: Grid, L: OperatorL) -> np.ndarray:
    k = grid.rk
    return -(k * k) * L.symbol(k)


def momentum(grid: Grid, u, L: OperatorL) -> np.ndarray:
    return apply_symbol(grid, u, L.momentum_symbol(grid.rk))


def inverse_helmholtz(grid: Grid, v, L: OperatorL) -> np.ndarray:
    """Solve (1 - L d_xx) u = v."""
    return apply_symbol(grid, v, 1.0 / L.momentum_symbol(grid.rk))


def L_dxx(grid: Grid, u, L: OperatorL) -> np.ndarray:
    return apply_symbol(grid, u, _L_dxx_symbol(grid, L))


def commutator_L(grid: Grid, u, v, L: OperatorL) -> np.ndarray:
    """[L d_xx, u] v = L d_xx (u v) - u L d_xx v."""
    uv = dealiased_product(grid, u, v)
    return L_dxx(grid, uv, L) - dealiased_product(grid, u, L_dxx(grid, v, L))


def _finite(out: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("non-finite right-hand side (solution blowing up)")
    return out


def _spectral_parts(grid: Grid, u):
    """rfft of u with the odd-derivative symbol (Nyquist zeroed)."""
    uh = np.fft.rfft(grid.check(u))
    ik = 1j * grid.rk
    ik[-1] = 0.0
    return uh, ik


def rhs_u_direct(grid: Grid, u, params: ModelParams) -> np.ndarray:
    """u_t from (1 - L d_xx) u_t = -(a+b) u u_x + a u_x L u_xx + b u L u_xxx."""
    a, b, L = params.a, params.b, params.L
    n = grid.n
    uh, ik = _spectral_parts(grid, u)
    ldxx = _L_dxx_symbol(grid, L)
    u = np.fft.irfft(uh, n=n)
    ux = np.fft.irfft(ik * uh, n=n)
    Luxx = np.fft.irfft(ldxx * uh, n=n)
    Luxxx = np.fft.irfft(ldxx * ik * uh, n=n)
    # truncation is linear, so the three products share one projection
    bracket = -(a + b) * u * ux + a * ux * Luxx + b * u * Luxxx
    bh = np.fft.rfft(bracket) * grid.dealias_mask / L.momentum_symbol(grid.rk)
    return _finite(np.fft.irfft(bh, n=n))


def rhs_m(grid: Grid, m, params: ModelParams) -> np.ndarray:
    """m_t = -b u m_x - a m u_x with u recovered from m."""
    n = grid.n
    mh, ik = _spectral_parts(grid, m)
    uh = mh / params.L.momentum_symbol(grid.rk)
    m = np.fft.irfft(mh, n=n)
    u = np.fft.irfft(uh, n=n)
    mx = np.fft.irfft(ik * mh, n=n)
    ux = np.fft.irfft(ik * uh, n=n)
    prod = -params.b * u * mx - params.a * m * ux
    return _finite(np.fft.irfft(np.fft.rfft(prod) * grid.dealias_mask, n=n))


def rhs_ch_reference(grid: Grid, u) -> np.ndarray:
    """Classical CH in nonlocal form: u_t = -u u_x - d_x (1 - d_xx)^(-1) (u^2 + u_x^2/2).

    Written independently of the general operators; only valid for a=2, b=1, L=1.
    """
    u = grid.check(u)
    k = grid.rk
    uh = np.fft.rfft(u)
    ikx = 1j * k
    ikx[-1] = 0.0
    ux = np.fft.irfft(ikx * uh, n=grid.n)
    mask = grid.dealias_mask
    adv = np.fft.irfft(np.fft.rfft(u * ux) * mask, n=grid.n)
    pressure_hat = np.fft.rfft(u * u + 0.5 * ux * ux) * mask
    nonlocal_term = np.fft.irfft(ikx * pressure_hat / (1.0 + k * k), n=grid.n)
    return _finite(-adv - nonlocal_term)


def apply_A_paper(grid: Grid, u, w, params: ModelParams) -> np.ndarray:
    """A(u) w = (a+b) u w_x + b (1 - L d_xx)^(-1) [L d_xx, u] w_x, as printed.

    This quasi-linear operator does not reproduce ``rhs_u_direct``; see
    ``quasilinear_residual``.
    """
    wx = derivative(grid, w, 1)
    transport = (params.a + params.b) * dealiased_product(grid, u, wx)
    comm = inverse_helmholtz(grid, commutator_L(grid, u, wx, params.L), params.L)
    return transport + params.b * comm


def quasilinear_residual(grid: Grid, u, params: ModelParams) -> float:
    """Relative L2 gap between rhs_u_direct(u) and -A(u)u.

    Normalized by ||rhs_u_direct(u)|| when that is nonzero, absolute otherwise.
    """
    direct = rhs_u_direct(grid, u, params)
    gap = direct + apply_A_paper(grid, u, u, params)
    num = math.sqrt(integrate_periodic(grid, gap * gap))
    den = math.sqrt(integrate_periodic(grid, direct * direct))
    # rounding-level rhs counts as zero
    scale = max(1.0, float(np.max(np.abs(u)))) ** 2
    if den <= 1e-14 * scale:
        return num
    return num / den
