"""Acceptance criteria, one test each.

Every test prints a single line "AC-NN PASS|FAIL <title>: <measured> (<limit>)"
and the lines are repeated in a summary section at the end of the run.
Tolerances are pinned here and nowhere else.
"""
import json

import numpy as np
import pytest

from dgch.cli import main
from dgch.diagnostics import conserved_quantities, energy_rate, relative_drift
from dgch.kato import (
    SampleSpec,
    accretivity_suite,
    b_bound_suite,
    commutator_suite,
    continuous_dependence_suite,
    frozen_growth_suite,
    isometry_suite,
    lipschitz_suite,
    random_coefficients,
    synthesize,
)
from dgch.operators import (
    FieldState,
    apply_A_paper,
    commutator_L,
    momentum,
    operator_from_name,
    rhs_ch_reference,
    rhs_m,
    rhs_u_direct,
)
from dgch.spectral import integrate_periodic, make_grid, sobolev_norm
from dgch.stepping import StepperConfig, StopReason, integrate, rk4_step

from conftest import ACCEPTANCE, params_for

PRESETS = ["identity", "alpha2", "helmholtz", "example-vi"]

TOL_CH_EQUIV = 1e-10
TOL_FORMS = 1e-10
TOL_POINTWISE = 1e-10
TOL_DRIFT_LINEAR = 1e-10
TOL_DRIFT_ENERGY = 1e-8
TOL_ENERGY_RATE = 1e-6
ORDER_RANGE = (3.5, 4.5)
TOL_ERROR_FLOOR = 1e-8
STABILITY_FACTOR = 2.0
TOL_DEGENERATE = 1e-13
TOL_ISOMETRY = 1e-12
TOL_CD_VARIATION = 0.10
TOL_FROZEN_CONSTANT = 1e-10
FROZEN_MARGIN = 2.0
TOL_RESIDUAL_CONSTANT = 1e-13
TOL_RESIDUAL_COSINE = 1e-8


def verdict(num, title, ok, detail):
    line = f"AC-{num:02d} {'PASS' if ok else 'FAIL'} {title}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def _fields(grid, count, band, seed):
    spec = SampleSpec(count=count, band=band, seed=seed)
    rng = spec.rng(0)
    return [synthesize(grid, random_coefficients(spec, rng)) for _ in range(count)]


def _rel(grid, a, b):
    return sobolev_norm(grid, a - b, 0) / sobolev_norm(grid, b, 0)


def test_ac01_ch_reduction():
    g = make_grid(256)
    p = params_for("identity")
    worst = max(_rel(g, rhs_u_direct(g, u, p), rhs_ch_reference(g, u)) for u in _fields(g, 50, 64, 11))
    verdict(1, "CH reduction equivalence", worst <= TOL_CH_EQUIV,
            f"max relative L2 difference {worst:.3e} over 50 fields (limit {TOL_CH_EQUIV:g})")


def test_ac02_form_consistency():
    g = make_grid(128)
    fields = _fields(g, 20, 32, 12)
    worst = 0.0
    for name in PRESETS:
        p = params_for(name)
        for u in fields:
            lhs = momentum(g, rhs_u_direct(g, u, p), p.L)
            worst = max(worst, _rel(g, lhs, rhs_m(g, momentum(g, u, p.L), p)))
    verdict(2, "form consistency", worst <= TOL_FORMS,
            f"max relative L2 difference {worst:.3e} over 4 presets x 20 fields (limit {TOL_FORMS:g})")


def test_ac03_pointwise_values():
    g = make_grid(128)
    x = g.nodes
    p = params_for("identity")
    errs = [
        np.max(np.abs(rhs_u_direct(g, np.cos(x), p) - 0.6 * np.sin(2 * x))),
        np.max(np.abs(commutator_L(g, np.cos(x), -np.sin(x), p.L) - 1.5 * np.sin(2 * x))),
        np.max(np.abs(apply_A_paper(g, np.cos(x), np.cos(x), p) + 1.2 * np.sin(2 * x))),
    ]
    verdict(3, "worked pointwise values", max(errs) <= TOL_POINTWISE,
            "max-norm errors " + ", ".join(f"{e:.2e}" for e in errs) + f" (limit {TOL_POINTWISE:g})")


def _drifts(name, a, b):
    g = make_grid(128)
    p = params_for(name, a, b)
    u0 = np.cos(g.nodes)
    res = integrate(FieldState(g, u0), p, StepperConfig(dt=1e-3, t_end=1.0))
    assert res.stop_reason is StopReason.REACHED_T_END
    m0 = momentum(g, u0, p.L)
    # integral u and integral m start at 0 for cos x; scale by the L1 norms
    du = relative_drift([r.mean_u for r in res.trail], integrate_periodic(g, np.abs(u0)))
    dm = relative_drift([r.mean_m for r in res.trail], integrate_periodic(g, np.abs(m0)))
    de = relative_drift([r.energy for r in res.trail])
    return du, dm, de


def _measured_energy_rate(g, u0, p, h=1e-3):
    """Fourth-order central difference of E from RK4 steps of +-h, +-2h."""
    rhs = lambda v: rhs_u_direct(g, v, p)  # noqa: E731

    def energy(step, count):
        s = FieldState(g, u0.copy())
        for _ in range(count):
            s = rk4_step(s, step, rhs)
        return conserved_quantities(s, p).energy

    return (-energy(h, 2) + 8 * energy(h, 1) - 8 * energy(-h, 1) + energy(-h, 2)) / (12 * h)


def test_ac04_conservation():
    du, dm, de = _drifts("identity", 2.0, 1.0)
    _, _, de_h = _drifts("helmholtz", 2.0, 1.0)
    _, _, de_h2 = _drifts("helmholtz", 4.0, 2.0)
    g = make_grid(128)
    p = params_for("identity", 3.0, 1.0)
    x = g.nodes
    u0 = np.cos(x) + 0.5 * np.sin(2 * x)  # cos x alone has zero energy rate
    predicted = energy_rate(g, u0, p)
    rate_err = abs(_measured_energy_rate(g, u0, p) - predicted) / abs(predicted)
    ok = (du <= TOL_DRIFT_LINEAR and dm <= TOL_DRIFT_LINEAR and de <= TOL_DRIFT_ENERGY
          and de_h <= TOL_DRIFT_ENERGY and de_h2 <= TOL_DRIFT_ENERGY and rate_err <= TOL_ENERGY_RATE)
    verdict(4, "conservation", ok,
            f"CH drift int u {du:.1e}, int m {dm:.1e} (limit {TOL_DRIFT_LINEAR:g}), "
            f"E {de:.1e}; helmholtz a=2b E {de_h:.1e}, {de_h2:.1e} (limit {TOL_DRIFT_ENERGY:g}); "
            f"a=3 b=1 dE/dt relative error {rate_err:.1e} (limit {TOL_ENERGY_RATE:g})")


def test_ac05_temporal_order(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "grid": {"n": 128},
        "manufactured": {"amplitude": 0.5, "speed": 1.0, "t_end": 0.5,
                         "dt_sweep": [4e-3, 2e-3, 1e-3],
                         "order_min": ORDER_RANGE[0], "order_max": ORDER_RANGE[1],
                         "error_floor": TOL_ERROR_FLOOR},
    }))
    code = main(["converge", "--config", str(cfg), "--out", str(tmp_path / "c"), "--quiet"])
    rep = json.loads((tmp_path / "c" / "convergence.json").read_text())
    order, floor = rep["order"], min(rep["errors"])
    ok = code == 0 and ORDER_RANGE[0] <= order <= ORDER_RANGE[1] and floor <= TOL_ERROR_FLOOR
    verdict(5, "temporal order", ok,
            f"observed order {order:.3f} (range {ORDER_RANGE[0]}..{ORDER_RANGE[1]}), "
            f"error floor {floor:.1e} (limit {TOL_ERROR_FLOOR:g})")


def test_ac06_kato_suites():
    spec = SampleSpec(count=100, band=16, seed=0)
    reports = [commutator_suite(spec)]
    for name in PRESETS:
        p = params_for(name)
        reports += [accretivity_suite(spec, p), lipschitz_suite(spec, p), b_bound_suite(spec, p)]
    stab = max(r.stability for r in reports)
    degen = max(r.degenerate for r in reports)
    worst_beta = max(
        max(r.constants["beta_max_n128"], r.constants["beta_max_n256"])
        / min(r.constants["beta_max_n128"], r.constants["beta_max_n256"])
        for r in reports if r.name == "accretivity"
    )
    ok = stab <= STABILITY_FACTOR and worst_beta <= STABILITY_FACTOR and degen <= TOL_DEGENERATE
    verdict(6, "Kato inequality suites", ok,
            f"{len(reports)} reports, worst n=128/256 max-ratio factor {stab:.4f}, worst-case "
            f"pairing factor {worst_beta:.4f} (limit {STABILITY_FACTOR:g}), "
            f"degenerate max {degen:.1e} (limit {TOL_DEGENERATE:g})")


def test_ac07_isometry():
    rep = isometry_suite(SampleSpec(count=100, band=16), [operator_from_name(n) for n in PRESETS])
    worst = max(rep.resolution_max.values())  # both n=128 and n=256
    verdict(7, "isometry", worst <= TOL_ISOMETRY,
            f"max relative defect {worst:.2e} over 4 presets x 100 fields (limit {TOL_ISOMETRY:g})")


def test_ac08_continuous_dependence():
    rep = continuous_dependence_suite(SampleSpec(), params_for("identity"), t=0.25,
                                      tolerance=TOL_CD_VARIATION)
    var = rep.constants["variation"]
    verdict(8, "continuous dependence", var < TOL_CD_VARIATION,
            f"ratio variation {var:.2e} across eps 1e-3, 5e-4, 2.5e-4 (limit {TOL_CD_VARIATION:g})")


def test_ac09_frozen_growth():
    rep = frozen_growth_suite(SampleSpec(count=20), params_for("identity"), t=0.1,
                              margin=FROZEN_MARGIN)
    dev = rep.constants["constant_u_deviation"]
    slack = rep.constants["max_growth_over_bound"]
    ok = dev <= TOL_FROZEN_CONSTANT and slack <= 1.0
    verdict(9, "frozen-coefficient growth", ok,
            f"constant-u deviation {dev:.1e} (limit {TOL_FROZEN_CONSTANT:g}); max log-growth / "
            f"({FROZEN_MARGIN:g} kappa t) = {slack:.3f} (limit 1) over 20 fields")


def test_ac10_quasilinear_residual(tmp_path):
    code = main(["compare-forms", "--out", str(tmp_path / "cf"), "--quiet"])
    rep = json.loads((tmp_path / "cf" / "compare_forms.json").read_text())
    const = max(e["constant"] for e in rep["presets"].values())
    cos = rep["presets"]["identity"]["cosine"]
    ok = code == 0 and const <= TOL_RESIDUAL_CONSTANT and abs(cos - 1.0) <= TOL_RESIDUAL_COSINE
    verdict(10, "quasi-linear residual report", ok,
            f"constant-field residual {const:.1e} (limit {TOL_RESIDUAL_CONSTANT:g}); "
            f"CH cos x residual {cos:.12f} (1.0 +- {TOL_RESIDUAL_COSINE:g})")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
