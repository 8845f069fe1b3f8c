"""Periodic Fourier discretization.

Fields are real numpy arrays sampled at ``Grid.nodes``. Spectra are stored in
the real-FFT layout (non-negative wavenumbers only); the negative half is
implied by Hermitian symmetry, which keeps every transformed field real.

Coefficients are normalized as ``u_hat[k] = (1/period) * integral u e^{-ikx}``,
so that the zero mode is the mean and the s = 0 norms equal the continuum L2
norm.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Grid",
    "Spectrum",
    "NormKind",
    "NormFamily",
    "BESSEL",
    "make_grid",
    "to_spectrum",
    "to_field",
    "apply_symbol",
    "derivative",
    "dealias",
    "dealiased_product",
    "sobolev_norm",
    "sobolev_inner",
    "gamma_power",
    "integrate_periodic",
]

MAX_DERIVATIVE_ORDER = 6


@dataclass(frozen=True)
class Grid:
    """Equispaced periodic grid on ``[0, period)`` with ``n`` nodes."""

    n: int
    period: float = 2 * math.pi

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ConfigurationError(f"n must be an integer, got {self.n!r}", "grid.n")
        if self.n < 8 or self.n % 2:
            raise ConfigurationError(f"n must be even and >= 8, got {self.n}", "grid.n")
        if not (math.isfinite(self.period) and self.period > 0):
            raise ConfigurationError(
                f"period must be positive, got {self.period}", "grid.period"
            )

    @property
    def dx(self) -> float:
        return self.period / self.n

    @property
    def k0(self) -> float:
        """Fundamental wavenumber 2*pi/period."""
        return 2 * math.pi / self.period

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Full table k_j for j = -n/2+1, ..., n/2 (ascending)."""
        j = np.arange(-self.n // 2 + 1, self.n // 2 + 1)
        return self.k0 * j

    @cached_property
    def rk(self) -> np.ndarray:
        """Non-negative wavenumbers matching the real-FFT layout."""
        return self.k0 * np.arange(self.n // 2 + 1)

    @cached_property
    def multiplicity(self) -> np.ndarray:
        # each interior real-FFT mode stands for the pair +-k
        m = np.full(self.n // 2 + 1, 2.0)
        m[0] = 1.0
        m[-1] = 1.0
        return m

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True for retained modes, |j| <= n/3 (two-thirds rule)."""
        j = np.arange(self.n // 2 + 1)
        return 3 * j <= self.n

    def check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise ValueError(f"field has shape {u.shape}, grid expects ({self.n},)")
        return u


def make_grid(n: int, period: float = 2 * math.pi) -> Grid:
    return Grid(n, float(period))


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a real field, non-negative wavenumbers only."""

    coefficients: np.ndarray
    grid: Grid

    def full(self) -> np.ndarray:
        """Coefficients ordered like ``grid.wavenumbers`` (-n/2+1 ... n/2)."""
        c = self.coefficients
        neg = np.conj(c[1:-1])[::-1]
        return np.concatenate([neg, c])

    def at(self, j: int) -> complex:
        """Coefficient of the mode with integer index ``j`` (k = j * k0)."""
        half = self.grid.n // 2
        if not -half < j <= half:
            raise IndexError(j)
        c = self.coefficients[abs(j)]
        return complex(np.conj(c)) if j < 0 else complex(c)


def to_spectrum(grid: Grid, u) -> Spectrum:
    u = grid.check(u)
    return Spectrum(np.fft.rfft(u) / grid.n, grid)


def to_field(spectrum: Spectrum) -> np.ndarray:
    return np.fft.irfft(spectrum.coefficients * spectrum.grid.n, n=spectrum.grid.n)


def _symbol_values(grid: Grid, symbol) -> np.ndarray:
    if callable(symbol):
        values = np.asarray(symbol(grid.rk))
    else:
        values = np.asarray(symbol)
    values = np.broadcast_to(values, grid.rk.shape)
    if not np.all(np.isfinite(values)):
        raise ConfigurationError("symbol is not finite at every grid wavenumber")
    return values


def apply_symbol(grid: Grid, u, symbol: Callable[[np.ndarray], np.ndarray] | np.ndarray):
    """Multiply the spectrum of ``u`` by ``symbol(k)`` and return the real field.

    ``symbol`` is evaluated on the non-negative wavenumbers; the negative half
    is taken as its Hermitian mirror, so the result is always real.
    """
    u = grid.check(u)
    values = _symbol_values(grid, symbol)
    return np.fft.irfft(np.fft.rfft(u) * values, n=grid.n)


def derivative(grid: Grid, u, order: int = 1) -> np.ndarray:
    if not 0 <= order <= MAX_DERIVATIVE_ORDER or int(order) != order:
        raise ValueError(f"derivative order must be an integer in [0, 6], got {order}")
    if order == 0:
        return grid.check(u).copy()
    sym = (1j * grid.rk) ** order
    if order % 2:
        # odd derivatives of the Nyquist mode are not representable as real
        sym[-1] = 0.0
    return apply_symbol(grid, u, sym)


def dealias(spectrum: Spectrum) -> Spectrum:
    mask = spectrum.grid.dealias_mask
    return Spectrum(np.where(mask, spectrum.coefficients, 0.0), spectrum.grid)


def dealiased_product(grid: Grid, *factors) -> np.ndarray:
    """Pointwise product of the factors, truncated by the two-thirds rule."""
    out = grid.check(factors[0]).copy()
    for f in factors[1:]:
        out = out * grid.check(f)
    return np.fft.irfft(np.fft.rfft(out) * grid.dealias_mask, n=grid.n)


def integrate_periodic(grid: Grid, f) -> float:
    """Trapezoid rule over one period (spectrally exact for periodic fields)."""
    return float(grid.dx * np.sum(grid.check(f)))


class NormKind(enum.Enum):
    BESSEL = "bessel"
    GAMMA = "gamma"


@dataclass(frozen=True)
class NormFamily:
    """Sobolev weight family.

    Bessel: w(k, s) = (1 + k^2)^s.
    GammaWeighted: w(k, s) = (1 + k^2 l(k))^(2s/(p+2)), with l the symbol of
    the dispersion operator ``L`` and p its order. Under this family the map
    ``gamma_power(., 1, L)`` is an isometry from H^s onto H^(s-1).
    """

    kind: NormKind = NormKind.BESSEL
    L: Optional[object] = None

    def __post_init__(self):
        if self.kind is NormKind.GAMMA and self.L is None:
            raise ConfigurationError("GammaWeighted norms need an operator L")

    @classmethod
    def gamma(cls, L) -> "NormFamily":
        return cls(NormKind.GAMMA, L)

    @property
    def label(self) -> str:
        if self.kind is NormKind.BESSEL:
            return "bessel"
        return f"gamma[{getattr(self.L, 'name', 'L')}]"

    def weights(self, grid: Grid, s: float) -> np.ndarray:
        return self.weights_at(grid.rk, s)

    def weights_at(self, k, s: float) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if s == 0:
            return np.ones_like(k)
        if self.kind is NormKind.BESSEL:
            return (1.0 + k**2) ** s
        base = 1.0 + k**2 * self.L.symbol(k)
        return base ** (2.0 * s / (self.L.order + 2.0))


BESSEL = NormFamily()


def sobolev_inner(grid: Grid, u, v, s: float, family: NormFamily = BESSEL) -> float:
    """Real inner product (u, v)_s = period * sum_k w(k, s) Re(u_hat conj(v_hat))."""
    uh = np.fft.rfft(grid.check(u)) / grid.n
    vh = np.fft.rfft(grid.check(v)) / grid.n
    w = family.weights(grid, s) * grid.multiplicity
    return float(grid.period * np.sum(w * (uh * np.conj(vh)).real))


def sobolev_norm(grid: Grid, u, s: float, family: NormFamily = BESSEL) -> float:
    uh = np.fft.rfft(grid.check(u)) / grid.n
    w = family.weights(grid, s) * grid.multiplicity
    return float(math.sqrt(grid.period * np.sum(w * np.abs(uh) ** 2)))


def gamma_symbol(grid: Grid, sigma: float, L) -> np.ndarray:
    k = grid.rk
    base = 1.0 + k**2 * L.symbol(k)
    return base ** (sigma / (L.order + 2.0))


def gamma_power(grid: Grid, u, sigma: float, L) -> np.ndarray:
    """Apply (1 - L d_xx)^(sigma/(p+2)); sigma = p+2 gives the momentum map."""
    if sigma == 0:
        return grid.check(u).copy()
    return apply_symbol(grid, u, gamma_symbol(grid, sigma, L))
