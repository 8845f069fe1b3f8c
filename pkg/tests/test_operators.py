
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgch.errors import ConfigurationError, NonFiniteError
from dgch.operators import (
    NAMED_PRESETS,
    PRESETS,
    FieldState,
    ModelParams,
    apply_A_paper,
    commutator_L,
    inverse_helmholtz,
    l_symbol,
    momentum,
    operator_from_name,
    quasilinear_residual,
    rhs_ch_reference,
    rhs_m,
    rhs_u_direct,
)
from dgch.spectral import derivative, make_grid, sobolev_norm

from conftest import band_limited, maxabs, params_for

PRESET_NAMES = list(NAMED_PRESETS)


# --- operator presets ---------------------------------------------------------


def test_identity_symbol():
    assert l_symbol(operator_from_name("identity"), 3.0) == 1.0


def test_helmholtz_symbol_and_momentum():
    L = operator_from_name("helmholtz")
    assert l_symbol(L, 1.0) == 2.0
    k = np.linspace(0, 10, 11)
    np.testing.assert_allclose(L.momentum_symbol(k), 1 + k**2 + k**4)


def test_example_vi_symbol():
    L = operator_from_name("example-vi")
    assert l_symbol(L, 0.0) == 2.0
    k = np.arange(6.0)
    # (1 - d_xx)^2 has symbol (1 + k^2)^2
    np.testing.assert_allclose(L.momentum_symbol(k), (1 + k**2) ** 2)


def test_preset_orders():
    assert [operator_from_name(n).order for n in PRESET_NAMES] == [0, 0, 2, 2]
    assert operator_from_name("bessel:1.5,2").order == 1.5
    assert operator_from_name("poly:1,0,3").order == 4


def test_alpha2_default_and_explicit():
    assert l_symbol(operator_from_name("alpha2"), 5.0) == 0.5
    assert l_symbol(operator_from_name("alpha2:0.25"), 5.0) == 0.25


def test_bessel_symbol():
    L = operator_from_name("bessel:2,0.5")
    assert l_symbol(L, 2.0) == pytest.approx(0.5 * 5)


@pytest.mark.parametrize("name", ["nope", "alpha2:-1", "alpha2:1,2", "bessel:1", "poly:x"])
def test_bad_operator_names(name):
    with pytest.raises(ConfigurationError, match="operator"):
        operator_from_name(name)


def test_nonpositive_symbol_rejected_on_grid():
    g = make_grid(16)
    with pytest.raises(ConfigurationError, match="operator"):
        operator_from_name("poly:1,-1,0.1").validate(g)
    with pytest.raises(ConfigurationError, match="operator"):
        operator_from_name("poly:1,-1")
    with pytest.raises(ConfigurationError):
        operator_from_name("bessel:1,-2").validate(g)


def test_presets_listed():
    for name in PRESET_NAMES:
        assert name in PRESETS


@pytest.mark.parametrize("a,b,field", [(-1, 1, "params.a"), (0, 1, "params.a"), (1, 0, "params.b")])
def test_model_params_positive(a, b, field):
    with pytest.raises(ConfigurationError, match=field):
        ModelParams(a, b, operator_from_name("identity"))


def test_field_state_rejects_nonfinite(g64):
    u = np.zeros(64)
    u[3] = np.nan
    with pytest.raises(NonFiniteError):
        FieldState(g64, u)


# --- momentum and its inverse -------------------------------------------------


def test_momentum_examples(g64):
    x = g64.nodes
    assert maxabs(momentum(g64, np.cos(x), operator_from_name("identity")) - 2 * np.cos(x)) <= 1e-12
    # grid round-off is amplified by the symbol, up to 1 + 32^2 + 32^4 ~ 1e6 at n = 64
    assert maxabs(momentum(g64, np.cos(x), operator_from_name("helmholtz")) - 3 * np.cos(x)) <= 1e-9
    for name in PRESET_NAMES:
        assert maxabs(momentum(g64, np.full(64, 1.7), operator_from_name(name)) - 1.7) <= 1e-14


def test_helmholtz_momentum_matches_derivatives(g64):
    u = band_limited(g64, seed=1, band=8)
    expected = u - derivative(g64, u, 2) + derivative(g64, u, 4)
    assert maxabs(momentum(g64, u, operator_from_name("helmholtz")) - expected) <= 1e-10


def test_inverse_examples(g64):
    x = g64.nodes
    L = operator_from_name("identity")
    assert maxabs(inverse_helmholtz(g64, np.sin(2 * x), L) - np.sin(2 * x) / 5) <= 1e-13
    assert maxabs(inverse_helmholtz(g64, 2 * np.cos(x), L) - np.cos(x)) <= 1e-13
    for name in PRESET_NAMES:
        assert maxabs(inverse_helmholtz(g64, np.full(64, -0.4), operator_from_name(name)) + 0.4) <= 1e-14


@given(st.sampled_from(PRESET_NAMES), st.integers(0, 10_000))
def test_inverse_undoes_momentum(name, seed):
    g = make_grid(64)
    L = operator_from_name(name)
    u = band_limited(g, seed=seed, band=20)
    assert maxabs(inverse_helmholtz(g, momentum(g, u, L), L) - u) <= 1e-12 * max(1, maxabs(u))


# --- commutator [L d_xx, u] ---------------------------------------------------


def test_commutator_examples(g64):
    x = g64.nodes
    L = operator_from_name("identity")
    v = band_limited(g64, seed=2)
    assert maxabs(commutator_L(g64, np.full(64, 2.0), v, L)) <= 1e-12
    assert maxabs(commutator_L(g64, np.cos(x), -np.sin(x), L) - 1.5 * np.sin(2 * x)) <= 1e-12
    assert maxabs(commutator_L(g64, np.cos(x), np.zeros(64), L)) == 0


# --- right-hand sides ---------------------------------------------------------


def test_rhs_u_zero_and_constant(g64, ch):
    assert maxabs(rhs_u_direct(g64, np.zeros(64), ch)) == 0
    for name in PRESET_NAMES:
        assert maxabs(rhs_u_direct(g64, np.full(64, 0.9), params_for(name))) <= 1e-13


def test_rhs_u_cosine(g64, ch):
    x = g64.nodes
    assert maxabs(rhs_u_direct(g64, np.cos(x), ch) - 0.6 * np.sin(2 * x)) <= 1e-12


def test_rhs_m_examples(g64, ch):
    x = g64.nodes
    assert maxabs(rhs_m(g64, np.zeros(64), ch)) == 0
    assert maxabs(rhs_m(g64, 2 * np.cos(x), ch) - 3 * np.sin(2 * x)) <= 1e-12
    assert maxabs(rhs_m(g64, np.full(64, 1.1), ch)) <= 1e-13


def test_ch_reference_examples(g64):
    x = g64.nodes
    assert maxabs(rhs_ch_reference(g64, np.zeros(64))) == 0
    assert maxabs(rhs_ch_reference(g64, np.full(64, 3.0))) <= 1e-13
    assert maxabs(rhs_ch_reference(g64, np.cos(x)) - 0.6 * np.sin(2 * x)) <= 1e-12


@given(st.integers(0, 10_000), st.integers(1, 40))
def test_ch_equivalence(seed, band):
    g = make_grid(128)
    p = params_for("identity")
    u = band_limited(g, seed=seed, band=band)
    ref = rhs_ch_reference(g, u)
    num = sobolev_norm(g, rhs_u_direct(g, u, p) - ref, 0)
    assert num <= 1e-10 * sobolev_norm(g, ref, 0)


@given(st.sampled_from(PRESET_NAMES), st.integers(0, 10_000), st.floats(0.5, 4), st.floats(0.5, 4))
def test_form_consistency(name, seed, a, b):
    g = make_grid(128)
    p = params_for(name, a, b)
    u = band_limited(g, seed=seed, band=30)
    lhs = momentum(g, rhs_u_direct(g, u, p), p.L)
    rhs = rhs_m(g, momentum(g, u, p.L), p)
    assert sobolev_norm(g, lhs - rhs, 0) <= 1e-10 * sobolev_norm(g, rhs, 0)


def test_rhs_u_rejects_nonfinite(g64, ch):
    u = np.cos(g64.nodes)
    u[0] = np.inf
    with np.errstate(invalid="ignore"), pytest.raises((NonFiniteError, ValueError)):
        rhs_u_direct(g64, u, ch)


# --- A(u) as written in the quasi-linear form ---------------------------------


def test_apply_A_examples(g64, ch):
    x = g64.nodes
    w = band_limited(g64, seed=3)
    c = 0.7
    expected = (ch.a + ch.b) * c * derivative(g64, w, 1)
    assert maxabs(apply_A_paper(g64, np.full(64, c), w, ch) - expected) <= 1e-12
    assert maxabs(apply_A_paper(g64, np.cos(x), np.zeros(64), ch)) == 0
    assert maxabs(apply_A_paper(g64, np.cos(x), np.cos(x), ch) + 1.2 * np.sin(2 * x)) <= 1e-12


@given(st.sampled_from(PRESET_NAMES), st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3))
def test_A_is_linear_in_both_arguments(name, seed, alpha, beta):
    g = make_grid(64)
    p = params_for(name)
    u, v, w, z = (band_limited(g, seed=seed + i, band=10) for i in range(4))
    A = lambda a_, b_: apply_A_paper(g, a_, b_, p)  # noqa: E731
    scale = 1 + abs(alpha) + abs(beta)
    lhs = A(alpha * u + beta * v, w)
    assert maxabs(lhs - alpha * A(u, w) - beta * A(v, w)) <= 1e-10 * scale * max(1, maxabs(lhs))
    lhs = A(u, alpha * w + beta * z)
    assert maxabs(lhs - alpha * A(u, w) - beta * A(u, z)) <= 1e-10 * scale * max(1, maxabs(lhs))


# --- residual between the two forms -------------------------------------------


def test_residual_examples(g64, ch):
    x = g64.nodes
    assert quasilinear_residual(g64, np.zeros(64), ch) == 0
    assert quasilinear_residual(g64, np.full(64, 2.5), ch) <= 1e-13
    assert quasilinear_residual(g64, np.cos(x), ch) == pytest.approx(1.0, abs=1e-10)


def test_residual_gap_formula(g64):
    # -(rhs + A(u)u) = a (1 - L d_xx)^-1 (L d_xx(u u_x) - u_x L d_xx u);
    # for cos x on CH the right side is 2 * (2 - 1/2) sin 2x / 5 = 0.6 sin 2x
    from dgch.operators import L_dxx

    p = params_for("helmholtz")
    u = band_limited(g64, seed=8, band=8)
    ux = derivative(g64, u, 1)
    gap = p.a * inverse_helmholtz(g64, L_dxx(g64, u * ux, p.L) - ux * L_dxx(g64, u, p.L), p.L)
    total = rhs_u_direct(g64, u, p) + apply_A_paper(g64, u, u, p)
    assert maxabs(total + gap) <= 1e-9 * maxabs(gap)
