"""Worked input/output examples for each public operation."""
import math

import numpy as np
import pytest

from fnls_decay.diagnostics import decay_slope, invariants, limit_constants, profile_residual
from fnls_decay.kernels import eval_kernels, kernel_constants, kernel_tail_report
from fnls_decay.model import (
    AdmissibilityError,
    ModelParams,
    group_action,
    inverse_symbol_at,
    inverse_symbol_matrix,
    nonlinearity,
    speed_bound,
    symbol_at,
    symbol_matrix,
    validate,
)
from fnls_decay.solver import (
    SolverConfig,
    extrapolate,
    initial_guess,
    petviashvili_step,
    solve_profile,
)
from fnls_decay.spectral import (
    ProfilePair,
    apply_multiplier,
    apply_q,
    fractional_laplacian,
    inner_g,
    inner_q,
    make_grid,
)

P075 = ModelParams(s=0.75, lambda1=1.0, lambda2=0.25)
CLASSICAL = validate(ModelParams(s=1.0, classical=True))


# -- model -----------------------------------------------------------------

def test_speed_bound_examples():
    assert speed_bound(0.75, 1.0) == pytest.approx(1.889882, abs=1e-6)
    assert speed_bound(0.6, 1.0) == pytest.approx(1.2 * 5 ** (1 / 6), rel=1e-14)
    assert speed_bound(0.6, 1.0) == pytest.approx(1.5692, abs=1e-4)
    assert speed_bound(1.0, 1.0) == 2.0


def test_speed_bound_is_loss_of_positivity():
    # the largest l2 with min_xi lambda_-(xi) >= 0
    s, c = 0.75, speed_bound(0.75, 1.0)
    xi = np.linspace(0, 10, 200001)
    for l2, sign in ((0.999 * c, 1), (1.001 * c, -1)):
        lm = 1 + xi ** (2 * s) - l2 * xi
        assert sign * lm.min() > 0


def test_validate_examples():
    assert validate(ModelParams(s=0.6, lambda2=0.25)).admissible
    with pytest.raises(AdmissibilityError, match="speed bound") as ei:
        validate(ModelParams(s=0.6, lambda2=1.6))
    assert "1.5691" in ei.value.failures[0]
    with pytest.raises(AdmissibilityError, match="s-range"):
        validate(ModelParams(s=0.4))


def test_symbol_examples():
    sv = symbol_at(ModelParams(s=0.6), 0.0)
    assert (sv.q11, sv.q12, sv.lambda_plus, sv.lambda_minus, sv.det) == (1, 0, 1, 1, 1)
    sv = symbol_at(P075, 1.0)
    assert (sv.q11, sv.lambda_plus, sv.lambda_minus, sv.det) == (2.0, 2.25, 1.75, 3.9375)
    sv = symbol_at(P075, -1.0)
    assert (sv.lambda_plus, sv.lambda_minus) == (1.75, 2.25)


def test_inverse_symbol_examples():
    assert np.array_equal(inverse_symbol_at(ModelParams(s=0.7), 0.0), np.eye(2))
    K = inverse_symbol_at(P075, 1.0)
    assert K[0, 0] == pytest.approx(0.507937, abs=1e-6)
    assert K[0, 1] == pytest.approx(0.063492j, abs=1e-6)


def test_nonlinearity_examples():
    p = ModelParams(s=0.75)
    assert nonlinearity(p, 1.0, 0.0) == (1.0, 0.0)
    assert nonlinearity(p, 3.0, 4.0) == (75.0, 100.0)
    rng = np.random.default_rng(3)
    for sigma in (0.5, 1.0, 2.3):
        v, w = rng.standard_normal(50), rng.standard_normal(50)
        g1, g2 = nonlinearity(ModelParams(s=0.75, sigma=sigma), v, w)
        assert np.allclose(np.hypot(g1, g2), np.hypot(v, w) ** (2 * sigma + 1), rtol=1e-13)


def test_group_action_examples():
    g = make_grid(20.0, 256)
    z = ProfilePair(np.exp(-g.x ** 2), g.x * np.exp(-g.x ** 2))
    same = group_action(0.0, 0.0, z, g)
    assert np.array_equal(same.v, z.v) and np.array_equal(same.w, z.w)
    q = group_action(math.pi / 2, 0.0, z, g)
    assert np.allclose(q.v, -z.w, atol=1e-15) and np.allclose(q.w, z.v, atol=1e-15)
    sh = group_action(0.0, g.h, z, g)
    assert np.max(np.abs(sh.v - np.roll(z.v, 1))) < 1e-12


# -- spectral --------------------------------------------------------------

def test_grid_examples():
    g = make_grid(256.0, 4096)
    assert g.h == 0.125 and g.nyquist == pytest.approx(8 * math.pi)
    assert g.xi.max() - g.xi.min() == pytest.approx(16 * math.pi, rel=1e-3)
    g = make_grid(math.pi, 16)
    assert np.allclose(g.x, -math.pi + np.arange(16) * math.pi / 8, atol=1e-15)
    assert make_grid(512.0, 8192).h == 0.125


def test_multiplier_examples():
    g = make_grid(10.0, 128)
    rng = np.random.default_rng(5)
    u = ProfilePair(np.exp(-g.x ** 2), rng.standard_normal(g.N))
    ident = lambda xi: np.array([[np.ones_like(xi), 0 * xi], [0 * xi, np.ones_like(xi)]])
    out = apply_multiplier(g, ident, u)
    assert np.allclose(out.v, u.v, atol=1e-14) and np.allclose(out.w, u.w, atol=1e-14)
    xi0 = math.pi / g.L
    p = ModelParams(s=1.0, lambda1=1.3, classical=True)
    out = apply_q(p, g, ProfilePair(np.sin(xi0 * g.x), np.zeros(g.N)))
    assert np.allclose(out.v, (1.3 + xi0 ** 2) * np.sin(xi0 * g.x), atol=1e-13)
    assert np.allclose(out.w, 0.0, atol=1e-13)
    q = validate(P075)
    smooth = ProfilePair(np.exp(-g.x ** 2), g.x * np.exp(-g.x ** 2))
    back = apply_multiplier(g, lambda xi: symbol_matrix(q, xi),
                            apply_multiplier(g, lambda xi: inverse_symbol_matrix(q, xi), smooth))
    assert (back - smooth).sup() < 1e-11


def test_solver_operators_are_inverse_on_every_mode():
    from fnls_decay.solver import _Operators

    g = make_grid(10.0, 128)
    ops = _Operators(validate(P075), g, 1)
    I = np.einsum("ijn,jkn->ikn", ops.K, ops.Q)
    assert np.max(np.abs(I - np.eye(2)[:, :, None])) < 1e-13


def test_fractional_laplacian_examples():
    g = make_grid(8.0, 128)
    assert np.allclose(fractional_laplacian(g, 0.75, np.full(g.N, 3.0)), 0.0, atol=1e-14)
    xi0 = math.pi / g.L
    f = np.cos(xi0 * g.x)
    assert np.allclose(fractional_laplacian(g, 0.75, f), xi0 ** 1.5 * f, atol=1e-14)


def test_s_one_matches_finite_differences():
    errs = []
    for N in (256, 512):
        g = make_grid(10.0, N)
        f = np.exp(-g.x ** 2)
        fd = -(np.roll(f, -1) - 2 * f + np.roll(f, 1)) / g.h ** 2
        errs.append(np.max(np.abs(fractional_laplacian(g, 1.0, f) - fd)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_inner_q_examples():
    g = make_grid(10.0, 128)
    p = validate(ModelParams(s=0.75, lambda1=1.2))
    assert inner_q(p, g, ProfilePair(np.zeros(g.N), np.zeros(g.N))) == 0.0
    xi0 = math.pi / g.L
    z = ProfilePair(np.cos(xi0 * g.x), np.zeros(g.N))
    assert inner_q(p, g, z) == pytest.approx((1.2 + xi0 ** 1.5) * g.L, rel=1e-13)


def test_inner_g_examples():
    p = ModelParams(s=0.75)
    g = make_grid(40.0, 1024)
    assert inner_g(p, g, ProfilePair(np.zeros(g.N), np.zeros(g.N))) == 0.0
    z = ProfilePair(math.sqrt(2) / np.cosh(g.x), np.zeros(g.N))
    assert inner_g(p, g, z) == pytest.approx(16 / 3, abs=1e-8)
    c = ProfilePair(np.full(g.N, 0.7), np.zeros(g.N))
    assert inner_g(p, g, c) == pytest.approx(0.7 ** 4 * 2 * g.L, rel=1e-13)


# -- kernels ---------------------------------------------------------------

def test_kernel_constant_examples():
    K1, K2 = kernel_constants(validate(ModelParams(s=0.6, lambda2=0.25)))
    assert K1 == pytest.approx(0.333551, abs=5e-6)
    assert K2 == pytest.approx(-0.366889, rel=1e-4)
    K1, K2 = kernel_constants(validate(P075))
    assert K1 == pytest.approx(0.299197, rel=1e-4)
    assert K2 == pytest.approx(-0.374047, rel=2e-4)
    assert kernel_constants(validate(ModelParams(s=0.8)))[1] == 0.0


def test_kernel_window_examples():
    p = validate(P075)
    S = eval_kernels(p, L_eval=512, oversample=8)
    sel = (S.x >= 40) & (S.x <= 80)
    dev = np.abs(S.x[sel] ** 2.5 * S.k11[sel] / S.K1 - 1)
    # the exact kernel is still 2.5% off at x = 40; the window median is not
    assert np.median(dev) < 0.02 and dev[-1] < 0.01
    p6 = validate(ModelParams(s=0.6, lambda2=0.25))
    rep = kernel_tail_report(eval_kernels(p6, L_eval=512, oversample=8), p6, window=(40, 120))
    assert rep.median_dev_k11 < 0.02


def test_tail_report_exact_input():
    p = validate(P075)
    S = eval_kernels(p, L_eval=128, oversample=2)
    exact = S.__class__(x=S.x, k11=S.K1 / S.x ** 2.5, k12=S.K2 / S.x ** 3.5, K1=S.K1, K2=S.K2,
                        oversample_factor=2, L_eval=128.0)
    rep = kernel_tail_report(exact, p)
    assert np.max(rep.dev_k11) < 1e-14 and np.max(rep.dev_k12) < 1e-14


def test_oversample_convergence():
    # doubling the oversampling moves the tail medians by less than their size
    p = validate(ModelParams(s=0.6, lambda2=0.25))
    a = kernel_tail_report(eval_kernels(p, L_eval=256, oversample=4), p)
    b = kernel_tail_report(eval_kernels(p, L_eval=256, oversample=8), p)
    assert abs(np.median(a.scaled_k11) - np.median(b.scaled_k11)) < b.median_dev_k11 * b.K1
    assert abs(np.median(a.scaled_k12) - np.median(b.scaled_k12)) < b.median_dev_k12 * abs(b.K2)


# -- solver ----------------------------------------------------------------

def test_initial_guess_examples():
    g = make_grid(40.0, 1024)
    z = initial_guess(g, "gaussian", 1.0, 1.0, "linear", 0.0)
    assert np.all(z.w == 0) and np.allclose(z.v, np.exp(-g.x ** 2), rtol=1e-15)
    z = initial_guess(g, "sech", math.sqrt(2), 1.0, "linear", 0.0)
    z1, m = petviashvili_step(CLASSICAL, g, z, 1.5)
    assert m == pytest.approx(1.0, abs=1e-12) and (z1 - z).sup() < 1e-12
    z = initial_guess(g, "gaussian", 1.0, 2.0, "quadratic")
    assert (z.v[g.centre], z.w[g.centre]) == (1.0, 0.0)


def test_step_scaling_and_contraction():
    g = make_grid(40.0, 1024)
    exact = ProfilePair(math.sqrt(2) / np.cosh(g.x), np.zeros(g.N))
    z = exact * 0.8 + ProfilePair(0.05 * np.exp(-g.x ** 2), np.zeros(g.N))
    _, m1 = petviashvili_step(CLASSICAL, g, z, 1.5)
    _, m3 = petviashvili_step(CLASSICAL, g, z * 3.0, 1.5)
    assert m3 == pytest.approx(m1 / 9, rel=1e-12)
    near = exact + ProfilePair(1e-4 * np.exp(-g.x ** 2), np.zeros(g.N))
    nxt, _ = petviashvili_step(CLASSICAL, g, near, 1.5)
    nxt2, _ = petviashvili_step(CLASSICAL, g, nxt, 1.5)
    assert (nxt2 - exact).sup() < (near - exact).sup()


def test_extrapolation_examples():
    rng = np.random.default_rng(11)
    zs, d = rng.standard_normal(40), rng.standard_normal(40)
    single = [zs + 0.7 ** k * d for k in range(3)]
    assert np.max(np.abs(extrapolate(single, "mpe") - zs)) < 1e-10
    const = [zs.copy() for _ in range(4)]
    assert np.array_equal(extrapolate(const, "rre"), zs)
    d2 = rng.standard_normal(40)

    def two_mode(width):
        return [zs + 0.9 ** k * d + 0.5 ** k * d2 for k in range(width + 1)]

    for method in ("mpe", "rre"):
        assert np.max(np.abs(extrapolate(two_mode(3), method) - zs)) < 1e-8
        assert np.max(np.abs(extrapolate(two_mode(2), method) - zs)) > 1e-3


def test_solver_examples():
    g = make_grid(40.0, 1024)
    z, _ = solve_profile(CLASSICAL, g, SolverConfig(), initial_guess(g, "sech"))
    assert np.max(np.abs(z.v - math.sqrt(2) / np.cosh(g.x))) < 1e-8
    assert np.max(np.abs(z.w)) < 1e-8
    p = validate(ModelParams(s=0.6, lambda2=0.25))
    g = make_grid(256.0, 4096)
    cfg = SolverConfig()
    z, trace = solve_profile(p, g, cfg)
    assert abs(trace.last.m_nu - 1) <= 1e-10
    assert profile_residual(p, g, z, pad=cfg.pad_for(1.0))[0] <= cfg.tol_res
    slope, _ = decay_slope(g, z, (0.1 * g.L, 0.4 * g.L))
    assert abs(slope + 2.2) <= 0.1


# -- diagnostics -----------------------------------------------------------

def test_invariant_examples():
    g = make_grid(40.0, 1024)
    z = ProfilePair(math.sqrt(2) / np.cosh(g.x), np.zeros(g.N))
    I1, I2, H = invariants(g, 1.0, 1.0, z)
    assert I1 == pytest.approx(2, abs=1e-8) and H == pytest.approx(-2 / 3, abs=1e-8)
    assert I2 == 0.0
    assert profile_residual(CLASSICAL, g, z)[0] < 1e-8
    zero = ProfilePair(np.zeros(g.N), np.zeros(g.N))
    assert profile_residual(validate(P075), g, zero) == (0.0, 0.0)


def test_slope_examples():
    g = make_grid(2048.0, 32768)
    ax = np.maximum(np.abs(g.x), 1.0)
    slope, stderr = decay_slope(g, ProfilePair(ax ** -2.2, np.zeros(g.N)), (20, 200))
    assert slope == pytest.approx(-2.2, abs=1e-12) and stderr < 1e-12
    z = ProfilePair(ax ** -2.2 * (1 + 1 / ax), np.zeros(g.N))
    errs = [abs(decay_slope(g, z, w)[0] + 2.2) for w in ((10, 40), (40, 160), (160, 640))]
    assert errs[0] > errs[1] > errs[2]


def test_limit_examples():
    g = make_grid(512.0, 8192)
    p = validate(ModelParams(s=0.6, lambda2=0.25))
    ax = np.maximum(np.abs(g.x), 1.0)
    rep = limit_constants(p, g, ProfilePair(0.83 / ax ** 2.2, np.zeros(g.N)))
    assert rep.limit_v == pytest.approx(0.83, rel=1e-13)
    # real ground state with no speed: g2 = 0 on both sides
    p0 = validate(ModelParams(s=0.75))
    gg = make_grid(256.0, 4096)
    z, _ = solve_profile(p0, gg, SolverConfig())
    assert np.max(np.abs(z.w)) == 0.0
    rep = limit_constants(p0, gg, z)
    assert rep.predicted_w == 0.0 and rep.limit_w == 0.0
