"""Sampled numerical checks of the quasi-linear (Kato) estimates.

Each check evaluates a ratio of norms on random band-limited fields and
records its maximum at two resolutions. Nothing here proves an inequality;
a bounded, resolution-independent maximum is the observable signature of a
bound holding with a resolution-independent constant.

Norm families: the commutator estimate uses Bessel weights, everything built
on A(u) uses GammaWeighted weights (see ``spectral.NormFamily``).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InconclusiveError, UndefinedRatioError
from .operators import (
    FieldState,
    ModelParams,
    apply_A_paper,
    operator_from_name,
    NAMED_PRESETS,
)
from .spectral import (
    BESSEL,
    Grid,
    NormFamily,
    apply_symbol,
    dealiased_product,
    gamma_power,
    make_grid,
    sobolev_norm,
)
from .stepping import MonitorConfig, StepperConfig, StopReason, integrate

SUITES = (
    "commutator",
    "accretivity",
    "lipschitz",
    "bbound",
    "frozen-growth",
    "continuous-dependence",
    "isometry",
    "a4-forcing",
)

DEGENERATE_TOL = 1e-13
STABILITY_FACTOR = 2.0


@dataclass(frozen=True)
class SampleSpec:
    """Random band-limited fields: mode j has magnitude (1+j)^-decay and a
    random phase (random sign for j = 0)."""

    count: int = 100
    band: int = 16
    decay: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 0:
            raise ConfigurationError("count must be a non-negative integer", "verify.count")
        if int(self.band) != self.band or self.band < 1:
            raise ConfigurationError("band must be a positive integer", "verify.band")
        if not self.decay >= 2:
            raise ConfigurationError("decay must be >= 2", "verify.decay")

    def check(self, grid: Grid) -> None:
        if 3 * self.band > grid.n:
            raise ConfigurationError(
                f"band {self.band} exceeds two thirds of k_max for n={grid.n}", "verify.band"
            )

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


def random_coefficients(spec: SampleSpec, rng: np.random.Generator) -> np.ndarray:
    j = np.arange(spec.band + 1)
    mag = (1.0 + j) ** (-spec.decay)
    phase = np.exp(2j * np.pi * rng.random(spec.band + 1))
    coef = mag * phase
    coef[0] = mag[0] * (1.0 if rng.random() < 0.5 else -1.0)
    return coef


def synthesize(grid: Grid, coef: np.ndarray) -> np.ndarray:
    """Real field with Fourier coefficients ``coef`` at j = 0..len-1."""
    if 2 * (len(coef) - 1) >= grid.n:
        raise ConfigurationError("coefficients exceed grid resolution")
    full = np.zeros(grid.n // 2 + 1, dtype=complex)
    full[: len(coef)] = coef
    return np.fft.irfft(full * grid.n, n=grid.n)


class ModeSpace:
    """Exact Galerkin representation on the retained modes |j| <= n/3.

    Vectors hold complex coefficients for j = -K..K (Hermitian for real
    fields). Multiplication by a band-limited field is the Toeplitz matrix of
    its coefficients with products truncated to the retained band, which is
    what the two-thirds rule computes on the grid for such inputs, but
    without transform round trips: coefficients that are zero stay exactly
    zero and commutators with constants cancel exactly. Every operator below
    is therefore an explicit matrix.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        self.K = grid.n // 3
        self.j = np.arange(-self.K, self.K + 1)
        self.k = grid.k0 * self.j
        self.period = grid.period
        d = self.j[:, None] - self.j[None, :]
        self._diff = d
        self._inband = np.abs(d) <= self.K

    def coefficients(self, u) -> np.ndarray:
        """Coefficients of a grid field, truncated to the retained band."""
        full = np.fft.fft(self.grid.check(u)) / self.grid.n
        c = full[self.j % self.grid.n]
        return c

    def from_band(self, coef: np.ndarray) -> np.ndarray:
        band = len(coef) - 1
        if band > self.K:
            raise ConfigurationError("sample band exceeds the retained modes", "verify.band")
        c = np.zeros(2 * self.K + 1, dtype=complex)
        c[self.K: self.K + band + 1] = coef
        c[self.K - band: self.K][::-1] = np.conj(coef[1:])
        return c

    def field(self, c: np.ndarray) -> np.ndarray:
        half = np.zeros(self.grid.n // 2 + 1, dtype=complex)
        half[: self.K + 1] = c[self.K:]
        return np.fft.irfft(half * self.grid.n, n=self.grid.n)

    def toeplitz(self, c: np.ndarray) -> np.ndarray:
        idx = np.clip(self._diff + self.K, 0, 2 * self.K)
        return np.where(self._inband, c[idx], 0.0)

    def weights(self, s: float, family: NormFamily) -> np.ndarray:
        return family.weights_at(np.abs(self.k), s)

    def norm(self, c, s: float, family: NormFamily = BESSEL) -> float:
        return float(math.sqrt(self.period * np.sum(self.weights(s, family) * np.abs(c) ** 2)))

    def inner(self, c, d, s: float, family: NormFamily = BESSEL) -> float:
        return float(self.period * np.sum(self.weights(s, family) * (c * np.conj(d)).real))

    def A_matrix(self, cu: np.ndarray, params: ModelParams) -> np.ndarray:
        """A(u) = (a+b) u d_x + b (1 - L d_xx)^(-1) [L d_xx, u] d_x."""
        k, L = self.k, params.L
        T = self.toeplitz(cu)
        ik = 1j * k
        ldxx = -(k * k) * L.symbol(k)
        comm = (ldxx[:, None] - ldxx[None, :]) * T
        mom = L.momentum_symbol(k)
        return ((params.a + params.b) * T + params.b * comm / mom[:, None]) * ik[None, :]

    def gamma_diag(self, sigma: float, L) -> np.ndarray:
        return L.momentum_symbol(self.k) ** (sigma / (L.order + 2.0))

    def B_matrix(self, cu: np.ndarray, params: ModelParams) -> np.ndarray:
        """Gamma A(u) Gamma^-1 - A(u)."""
        A = self.A_matrix(cu, params)
        g = self.gamma_diag(1.0, params.L)
        return g[:, None] * A / g[None, :] - A

    def lambda_commutator_matrix(self, cf: np.ndarray, n_order: float) -> np.ndarray:
        sym = (1.0 + self.k**2) ** (n_order / 2.0)
        return (sym[:, None] - sym[None, :]) * self.toeplitz(cf)

    def worst_pairing_rate(self, A: np.ndarray, s: float, family: NormFamily) -> float:
        """sup_w -(A w, w)_s / ||w||_s^2 over the retained modes (>= 0)."""
        sq = np.sqrt(self.weights(s, family))
        M = sq[:, None] * A / sq[None, :]
        herm = -0.5 * (M + M.conj().T)
        return max(0.0, float(np.linalg.eigvalsh(herm)[-1]))


@dataclass
class InequalityReport:
    name: str
    family: str
    parameters: Dict[str, float]
    ratios: List[float]
    max_ratio: float
    resolution_max: Dict[int, float]
    degenerate: Optional[float] = None
    constants: Dict[str, float] = field(default_factory=dict)
    passed: bool = True
    notes: str = ""

    @property
    def stability(self) -> float:
        """max/min of the per-resolution maxima (1.0 when both vanish)."""
        vals = list(self.resolution_max.values())
        hi, lo = max(vals, default=0.0), min(vals, default=0.0)
        if hi == 0:
            return 1.0
        return math.inf if lo == 0 else hi / lo

    def to_json(self) -> dict:
        out = asdict(self)
        out["resolution_max"] = {str(k): v for k, v in self.resolution_max.items()}
        out["stability"] = self.stability
        return out


def _finalize(report: InequalityReport, extra_ok: bool = True) -> InequalityReport:
    finite = all(math.isfinite(r) and r >= 0 for r in report.ratios)
    stable = report.stability <= STABILITY_FACTOR
    degenerate_ok = report.degenerate is None or report.degenerate <= DEGENERATE_TOL
    report.passed = bool(finite and stable and degenerate_ok and extra_ok)
    return report


def default_s(params: ModelParams) -> float:
    return 4.0 + params.L.order


def _grids(n: int, period: float) -> List[Grid]:
    return [make_grid(n, period), make_grid(2 * n, period)]


# --- commutator estimate ----------------------------------------------------


def check_commutator_hypotheses(n: float, s: float, sigma: float) -> None:
    if not (n > 0 and s >= 0 and 1.5 < s + n <= sigma):
        raise ConfigurationError(
            f"need n > 0, s >= 0 and 3/2 < s+n <= sigma; got n={n}, s={s}, sigma={sigma}",
            "verify.commutator",
        )


def lambda_commutator(grid: Grid, f, g, n: float) -> np.ndarray:
    """[Lambda^n, f] g = Lambda^n (f g) - f Lambda^n g on the grid, Lambda = (1 - d_xx)^(1/2)."""
    sym = (1.0 + grid.rk**2) ** (n / 2.0)
    return apply_symbol(grid, dealiased_product(grid, f, g), sym) - dealiased_product(
        grid, f, apply_symbol(grid, g, sym)
    )


def _commutator_ratio(ms: ModeSpace, cf, cg, n, s, sigma) -> float:
    den = ms.norm(cf, sigma) * ms.norm(cg, s + n - 1)
    if den == 0:
        return 0.0
    return ms.norm(ms.lambda_commutator_matrix(cf, n) @ cg, s) / den


def commutator_estimate_ratio(grid: Grid, f, g, n: float, s: float, sigma: float) -> float:
    """||[Lambda^n, f] g||_s / (||f||_sigma ||g||_{s+n-1}), Bessel norms.

    f and g enter through their modes |j| <= n/3.
    """
    check_commutator_hypotheses(n, s, sigma)
    ms = ModeSpace(grid)
    return _commutator_ratio(ms, ms.coefficients(f), ms.coefficients(g), n, s, sigma)


def commutator_suite(
    spec: SampleSpec,
    n_order: float = 1.0,
    s: float = 1.0,
    sigma: float = 2.0,
    n: int = 128,
    period: float = 2 * math.pi,
) -> InequalityReport:
    check_commutator_hypotheses(n_order, s, sigma)
    spaces = _spaces(spec, n, period)
    rng = spec.rng(1)
    pairs = [(random_coefficients(spec, rng), random_coefficients(spec, rng)) for _ in range(spec.count)]
    per_res = {}
    for ms in spaces:
        per_res[ms.grid.n] = [
            _commutator_ratio(ms, ms.from_band(cf), ms.from_band(cg), n_order, s, sigma)
            for cf, cg in pairs
        ]
    ms = spaces[0]
    const = ms.from_band(np.array([1.3]))
    degenerate = max(
        [_commutator_ratio(ms, const, ms.from_band(cg), n_order, s, sigma) for _, cg in pairs[:10]],
        default=0.0,
    )
    report = InequalityReport(
        name="commutator",
        family="bessel",
        parameters={"n_order": n_order, "s": s, "sigma": sigma, "n": n, "count": spec.count,
                    "band": spec.band, "decay": spec.decay, "seed": spec.seed},
        ratios=per_res[n],
        max_ratio=max(per_res[n], default=0.0),
        resolution_max={k: max(v, default=0.0) for k, v in per_res.items()},
        degenerate=degenerate,
        constants={"c_estimate": max(per_res[n], default=0.0)},
    )
    return _finalize(report)


def _spaces(spec: SampleSpec, n: int, period: float, L=None) -> List[ModeSpace]:
    spaces = []
    for gr in _grids(n, period):
        spec.check(gr)
        if L is not None:
            L.validate(gr)
        spaces.append(ModeSpace(gr))
    return spaces


# --- accretivity ------------------------------------------------------------


def accretivity_pairing(grid: Grid, u, w, params: ModelParams) -> float:
    """(A(u) w, w)_0 by quadrature."""
    return float(grid.dx * np.dot(apply_A_paper(grid, u, w, params), w))


def accretivity_ratio(grid: Grid, u, w, params: ModelParams, s: float) -> float:
    """max(0, -(A(u)w, w)_{s-1}) / ||w||_{s-1}^2 in GammaWeighted norms."""
    ms = ModeSpace(grid)
    cu, cw = ms.coefficients(u), ms.coefficients(w)
    return _accretivity_ratio(ms, ms.A_matrix(cu, params), cw, s, NormFamily.gamma(params.L))


def _accretivity_ratio(ms: ModeSpace, A, cw, s, fam) -> float:
    den = ms.norm(cw, s - 1, fam) ** 2
    if den == 0:
        return 0.0
    return max(0.0, -ms.inner(A @ cw, cw, s - 1, fam)) / den


def accretivity_suite(
    spec: SampleSpec,
    params: ModelParams,
    s: Optional[float] = None,
    n: int = 128,
    period: float = 2 * math.pi,
) -> InequalityReport:
    """Non-accretive part of A(u) in H^(s-1).

    Sampled ratios use the random w of each pair. ``kappa`` uses the worst w
    for each sampled u (top eigenvalue of the Hermitian part of -A(u) in the
    H^(s-1) inner product) divided by ||u||_s, so kappa ||u||_s bounds every
    sampled ratio.
    """
    s = default_s(params) if s is None else s
    spaces = _spaces(spec, n, period, params.L)
    rng = spec.rng(2)
    pairs = [(random_coefficients(spec, rng), random_coefficients(spec, rng)) for _ in range(spec.count)]
    fam = NormFamily.gamma(params.L)
    per_res, worst_res = {}, {}
    kappa = kappa_sampled = 0.0
    for ms in spaces:
        ratios, worst = [], []
        for cu, cw in pairs:
            u = ms.from_band(cu)
            A = ms.A_matrix(u, params)
            r = _accretivity_ratio(ms, A, ms.from_band(cw), s, fam)
            beta = ms.worst_pairing_rate(A, s - 1, fam)
            un = ms.norm(u, s, fam)
            if un > 0:
                kappa = max(kappa, beta / un)
                kappa_sampled = max(kappa_sampled, r / un)
            ratios.append(r)
            worst.append(beta)
        per_res[ms.grid.n] = ratios
        worst_res[ms.grid.n] = max(worst, default=0.0)
    ms = spaces[0]
    degenerate = 0.0
    const = ms.from_band(np.array([0.7]))
    for _, cw in pairs[:10]:
        w = ms.from_band(cw)
        pairing = ms.inner(ms.A_matrix(const, params) @ w, w, s - 1, fam)
        degenerate = max(degenerate, abs(pairing) / ms.norm(w, s - 1, fam) ** 2)
    hi, lo = max(worst_res.values()), min(worst_res.values())
    worst_stable = hi == 0 or (lo > 0 and hi / lo <= STABILITY_FACTOR)
    report = InequalityReport(
        name="accretivity",
        family=fam.label,
        parameters=_model_params(params, s=s, n=n, spec=spec),
        ratios=per_res[n],
        max_ratio=max(per_res[n], default=0.0),
        resolution_max={k: max(v, default=0.0) for k, v in per_res.items()},
        degenerate=degenerate,
        constants={"kappa": kappa, "kappa_sampled": kappa_sampled,
                   **{f"beta_max_n{k}": v for k, v in worst_res.items()}},
        notes="ratio = max(0, -(A(u)w,w)_{s-1}) / ||w||_{s-1}^2; "
              "kappa = max over u of sup_w ratio / ||u||_s",
    )
    return _finalize(report, extra_ok=worst_stable)


# --- Lipschitz bound --------------------------------------------------------


def lipschitz_A_ratio(grid: Grid, u, v, w, params: ModelParams, s: float) -> float:
    """||(A(u) - A(v)) w||_{s-1} / (||u - v||_{s-1} ||w||_s), GammaWeighted."""
    ms = ModeSpace(grid)
    return _lipschitz_ratio(ms, ms.coefficients(u), ms.coefficients(v), ms.coefficients(w),
                            params, s)


def _lipschitz_numerator(ms: ModeSpace, cu, cv, cw, params, s) -> float:
    diff = ms.A_matrix(cu, params) @ cw - ms.A_matrix(cv, params) @ cw
    return ms.norm(diff, s - 1, NormFamily.gamma(params.L))


def _lipschitz_ratio(ms: ModeSpace, cu, cv, cw, params, s) -> float:
    fam = NormFamily.gamma(params.L)
    den = ms.norm(cu - cv, s - 1, fam) * ms.norm(cw, s, fam)
    if den == 0:
        raise UndefinedRatioError("||u - v|| ||w|| vanishes")
    return _lipschitz_numerator(ms, cu, cv, cw, params, s) / den


def lipschitz_suite(
    spec: SampleSpec,
    params: ModelParams,
    s: Optional[float] = None,
    n: int = 128,
    period: float = 2 * math.pi,
) -> InequalityReport:
    s = default_s(params) if s is None else s
    spaces = _spaces(spec, n, period, params.L)
    rng = spec.rng(3)
    triples = [tuple(random_coefficients(spec, rng) for _ in range(3)) for _ in range(spec.count)]
    fam = NormFamily.gamma(params.L)
    per_res = {}
    for ms in spaces:
        per_res[ms.grid.n] = [
            _lipschitz_ratio(ms, ms.from_band(cu), ms.from_band(cv), ms.from_band(cw), params, s)
            for cu, cv, cw in triples
        ]
    ms = spaces[0]
    degenerate = 0.0
    for cu, _, cw in triples[:10]:
        u, w = ms.from_band(cu), ms.from_band(cw)
        num = _lipschitz_numerator(ms, u, u, w, params, s)
        degenerate = max(degenerate, num / ms.norm(w, s, fam))
    report = InequalityReport(
        name="lipschitz",
        family=fam.label,
        parameters=_model_params(params, s=s, n=n, spec=spec),
        ratios=per_res[n],
        max_ratio=max(per_res[n], default=0.0),
        resolution_max={k: max(v, default=0.0) for k, v in per_res.items()},
        degenerate=degenerate,
        constants={"lambda1_estimate": max(per_res[n], default=0.0)},
    )
    return _finalize(report)


# --- B(u) = Gamma A(u) Gamma^-1 - A(u) ---------------------------------------


def b_operator_apply(grid: Grid, u, w, params: ModelParams) -> np.ndarray:
    L = params.L
    inner = apply_A_paper(grid, u, gamma_power(grid, w, -1.0, L), params)
    return gamma_power(grid, inner, 1.0, L) - apply_A_paper(grid, u, w, params)


def b_bound_suite(
    spec: SampleSpec,
    params: ModelParams,
    s: Optional[float] = None,
    n: int = 128,
    period: float = 2 * math.pi,
) -> InequalityReport:
    s = default_s(params) if s is None else s
    spaces = _spaces(spec, n, period, params.L)
    rng = spec.rng(4)
    pairs = [(random_coefficients(spec, rng), random_coefficients(spec, rng)) for _ in range(spec.count)]
    fam = NormFamily.gamma(params.L)
    per_res = {}
    for ms in spaces:
        ratios = []
        for cu, cw in pairs:
            w = ms.from_band(cw)
            bw = ms.B_matrix(ms.from_band(cu), params) @ w
            ratios.append(ms.norm(bw, s - 1, fam) / ms.norm(w, s - 1, fam))
        per_res[ms.grid.n] = ratios
    ms = spaces[0]
    degenerate = 0.0
    B0 = ms.B_matrix(ms.from_band(np.array([0.7])), params)
    for _, cw in pairs[:10]:
        w = ms.from_band(cw)
        degenerate = max(degenerate, ms.norm(B0 @ w, s - 1, fam) / ms.norm(w, s - 1, fam))
    report = InequalityReport(
        name="bbound",
        family=fam.label,
        parameters=_model_params(params, s=s, n=n, spec=spec),
        ratios=per_res[n],
        max_ratio=max(per_res[n], default=0.0),
        resolution_max={k: max(v, default=0.0) for k, v in per_res.items()},
        degenerate=degenerate,
        constants={"lambda2_estimate": max(per_res[n], default=0.0)},
    )
    return _finalize(report)


# --- frozen-coefficient growth ------------------------------------------------


def _frozen_evolve(ms: ModeSpace, cu, cw, params, t: float, dt: float) -> float:
    n0 = ms.norm(cw, 0.0)
    if n0 == 0:
        return 1.0
    M = -ms.A_matrix(cu, params)
    steps = max(1, int(math.ceil(t / dt - 1e-9)))
    h = t / steps
    w = cw.astype(complex)
    for _ in range(steps):
        k1 = M @ w
        k2 = M @ (w + 0.5 * h * k1)
        k3 = M @ (w + 0.5 * h * k2)
        k4 = M @ (w + h * k3)
        w = w + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(w)):
        raise InconclusiveError("frozen evolution became non-finite")
    return ms.norm(w, 0.0) / n0


def frozen_growth(
    grid: Grid, u, w0, params: ModelParams, t: float, dt: float = 2.5e-4
) -> float:
    """||w(t)||_0 / ||w(0)||_0 for w_t + A(u) w = 0 with u frozen.

    RK4 on the Galerkin system over the retained modes; returns 1 for w0 = 0.
    """
    if not 0 < t <= 1:
        raise ConfigurationError("t must lie in (0, 1]", "verify.t")
    ms = ModeSpace(grid)
    return _frozen_evolve(ms, ms.coefficients(u), ms.coefficients(w0), params, t, dt)


def frozen_growth_suite(
    spec: SampleSpec,
    params: ModelParams,
    kappa: Optional[float] = None,
    t: float = 0.1,
    n: int = 128,
    period: float = 2 * math.pi,
    margin: float = 2.0,
    dt: float = 2.5e-4,
) -> InequalityReport:
    """L2 log-growth against margin * kappa * ||u||_1 * t.

    ``kappa`` defaults to the L2 accretivity constant (accretivity suite with
    s = 1) on the same spec, so the bound and the growth share one norm.
    """
    if kappa is None:
        kappa = accretivity_suite(spec, params, 1.0, n, period).constants["kappa"]
    spaces = _spaces(spec, n, period, params.L)
    rng = spec.rng(5)
    pairs = [(random_coefficients(spec, rng), random_coefficients(spec, rng)) for _ in range(spec.count)]
    fam = NormFamily.gamma(params.L)
    per_res, within, slack = {}, True, 0.0
    for ms in spaces:
        rates = []
        for cu, cw in pairs:
            u = ms.from_band(cu)
            growth = math.log(_frozen_evolve(ms, u, ms.from_band(cw), params, t, dt))
            bound = margin * kappa * ms.norm(u, 1.0, fam) * t
            within = within and growth <= bound
            if bound > 0:
                slack = max(slack, growth / bound)
            rates.append(max(growth, 0.0) / t)
        per_res[ms.grid.n] = rates
    ms = spaces[0]
    cw = pairs[0][1] if pairs else random_coefficients(spec, rng)
    deviation = abs(_frozen_evolve(ms, ms.from_band(np.array([0.7])), ms.from_band(cw), params, t, dt) - 1.0)
    report = InequalityReport(
        name="frozen-growth",
        family="L2",
        parameters=_model_params(params, n=n, spec=spec, t=t, margin=margin, dt=dt),
        ratios=per_res[n],
        max_ratio=max(per_res[n], default=0.0),
        resolution_max={k: max(v, default=0.0) for k, v in per_res.items()},
        constants={"kappa": kappa, "omega_estimate": max(per_res[n], default=0.0),
                   "max_growth_over_bound": slack, "constant_u_deviation": deviation},
        notes="ratio = max(0, log(||w(t)||/||w0||)) / t; bound = margin * kappa * ||u||_1 * t",
    )
    return _finalize(report, extra_ok=within and deviation <= 1e-10)


# --- continuous dependence ----------------------------------------------------

EPSILONS = (1e-3, 5e-4, 2.5e-4)


def continuous_dependence(
    grid: Grid,
    u0,
    delta,
    params: ModelParams,
    t: float,
    dt: float = 1e-3,
    s: Optional[float] = None,
    epsilons: Sequence[float] = EPSILONS,
) -> np.ndarray:
    """||u(t; u0 + eps delta) - u(t; u0)||_s / eps for each eps."""
    s = default_s(params) if s is None else s
    fam = NormFamily.gamma(params.L)
    u0, delta = np.asarray(u0, float), np.asarray(delta, float)

    def flow(v):
        if t == 0:
            return v
        res = integrate(FieldState(grid, v), params, StepperConfig(min(dt, t), t),
                        MonitorConfig(check_stride=10**9))
        if res.stop_reason is not StopReason.REACHED_T_END:
            raise InconclusiveError(f"trajectory stopped early: {res.stop_reason.value}")
        return res.final.u

    base = flow(u0)
    return np.array([sobolev_norm(grid, flow(u0 + e * delta) - base, s, fam) / e for e in epsilons])


def ratio_variation(ratios) -> float:
    ratios = np.asarray(ratios, float)
    lo = float(np.min(ratios))
    if lo == 0:
        return 0.0 if float(np.max(ratios)) == 0 else math.inf
    return (float(np.max(ratios)) - lo) / lo


def continuous_dependence_suite(
    spec: SampleSpec,
    params: ModelParams,
    t: float = 0.25,
    dt: float = 1e-3,
    s: Optional[float] = None,
    n: int = 128,
    period: float = 2 * math.pi,
    tolerance: float = 0.1,
) -> InequalityReport:
    """u0 = cos x perturbed along one random band-limited direction."""
    s = default_s(params) if s is None else s
    grids = _grids(n, period)
    for gr in grids:
        spec.check(gr)
    direction = random_coefficients(spec, spec.rng(6))
    per_res, variations = {}, {}
    for gr in grids:
        u0 = np.cos(gr.nodes * gr.k0)
        ratios = continuous_dependence(gr, u0, synthesize(gr, direction), params, t, dt, s)
        per_res[gr.n] = ratios.tolist()
        variations[gr.n] = ratio_variation(ratios)
    worst = max(variations.values())
    report = InequalityReport(
        name="continuous-dependence",
        family=NormFamily.gamma(params.L).label,
        parameters=_model_params(params, s=s, n=n, spec=spec, t=t, dt=dt,
                                 epsilons=list(EPSILONS)),
        ratios=per_res[n],
        max_ratio=max(per_res[n]),
        resolution_max={k: max(v) for k, v in per_res.items()},
        constants={"variation": worst, "tolerance": tolerance},
        notes="ratio = ||u_eps(t) - u(t)||_s / eps; must vary < 10% across eps",
    )
    return _finalize(report, extra_ok=worst < tolerance)


# --- isometry and A4 ----------------------------------------------------------


def isometry_defect(grid: Grid, u, s: float, L) -> float:
    fam = NormFamily.gamma(L)
    ref = sobolev_norm(grid, u, s, fam)
    lhs = sobolev_norm(grid, gamma_power(grid, u, 1.0, L), s - 1, fam)
    return abs(lhs - ref) / ref if ref else abs(lhs)


def isometry_suite(
    spec: SampleSpec,
    operators: Sequence = (),
    n: int = 128,
    period: float = 2 * math.pi,
    tolerance: float = 1e-12,
) -> InequalityReport:
    """||Gamma u||_{s-1} = ||u||_s with s = 4 + p, for each operator."""
    ops = list(operators) or [operator_from_name(name) for name in NAMED_PRESETS]
    grids = _grids(n, period)
    for gr in grids:
        spec.check(gr)
    rng = spec.rng(7)
    coefs = [random_coefficients(spec, rng) for _ in range(spec.count)]
    per_res = {}
    for gr in grids:
        per_res[gr.n] = [
            isometry_defect(gr, synthesize(gr, c), 4.0 + L.order, L) for L in ops for c in coefs
        ]
    worst = max((max(v, default=0.0) for v in per_res.values()), default=0.0)
    report = InequalityReport(
        name="isometry",
        family="gamma",
        parameters={"operators": [L.name for L in ops], "n": n, "count": spec.count,
                    "band": spec.band, "decay": spec.decay, "seed": spec.seed},
        ratios=per_res[n],
        max_ratio=max(per_res[n], default=0.0),
        resolution_max={k: max(v, default=0.0) for k, v in per_res.items()},
        constants={"tolerance": tolerance},
        notes="ratio = relative defect of the isometry",
    )
    report.passed = bool(worst <= tolerance)
    return report


def a4_report(params: ModelParams) -> InequalityReport:
    return InequalityReport(
        name="a4-forcing",
        family="none",
        parameters=_model_params(params),
        ratios=[],
        max_ratio=0.0,
        resolution_max={},
        passed=True,
        notes="f(u) = 0 identically: boundedness and Lipschitz conditions on f hold trivially",
    )


def _model_params(params: ModelParams, spec: Optional[SampleSpec] = None, **extra) -> dict:
    out = {"a": params.a, "b": params.b, "operator": params.L.name, "p": params.L.order}
    if spec is not None:
        out.update(count=spec.count, band=spec.band, decay=spec.decay, seed=spec.seed)
    out.update(extra)
    return out


def run_suite(name: str, spec: SampleSpec, params: ModelParams, n: int = 128,
              s: Optional[float] = None, commutator_args: Optional[dict] = None,
              kappa: Optional[float] = None, period: float = 2 * math.pi) -> InequalityReport:
    """Dispatch one named suite."""
    if name == "commutator":
        return commutator_suite(spec, n=n, period=period, **(commutator_args or {}))
    if name == "accretivity":
        return accretivity_suite(spec, params, s, n, period)
    if name == "lipschitz":
        return lipschitz_suite(spec, params, s, n, period)
    if name == "bbound":
        return b_bound_suite(spec, params, s, n, period)
    if name == "frozen-growth":
        return frozen_growth_suite(spec, params, kappa=kappa, n=n, period=period)
    if name == "continuous-dependence":
        return continuous_dependence_suite(spec, params, s=s, n=n, period=period)
    if name == "isometry":
        ops = [operator_from_name(p) for p in NAMED_PRESETS]
        if params.L.name not in NAMED_PRESETS:
            ops.append(params.L)
        return isometry_suite(spec, ops, n=n, period=period)
    if name == "a4-forcing":
        return a4_report(params)
    raise ConfigurationError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all",
                             "suite")
