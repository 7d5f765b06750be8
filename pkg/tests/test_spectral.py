import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from fnls_decay.model import ModelParams, group_action, symbol_matrix, validate
from fnls_decay.spectral import (
    ProfilePair,
    SymbolStructureError,
    apply_multiplier,
    apply_q,
    dealias_factor,
    derivative,
    forward,
    fractional_laplacian,
    inner,
    inner_g,
    inner_q,
    inverse,
    make_grid,
    nonlinear_term,
    spectral_shift,
    trapezoid,
)
from fnls_decay.diagnostics import invariants


@pytest.fixture
def grid():
    return make_grid(20.0, 512)


def gaussian_pair(g, phase=0.7):
    r = np.exp(-g.x ** 2)
    return ProfilePair(r * np.cos(phase * g.x + 0.3 * g.x ** 2), r * np.sin(phase * g.x + 0.3 * g.x ** 2))


def test_make_grid_layout():
    g = make_grid(10.0, 64)
    assert g.x[0] == -10.0 and g.h == pytest.approx(20 / 64)
    assert g.x[g.centre] == pytest.approx(0.0, abs=1e-15)
    assert g.nyquist == pytest.approx(math.pi / g.h)
    for bad in ((10.0, 63), (10.0, 8), (0.0, 64)):
        with pytest.raises(ValueError):
            make_grid(*bad)


def test_profile_pair_rejects_bad_input():
    with pytest.raises(ValueError):
        ProfilePair(np.ones(4), np.ones(5))
    with pytest.raises(ValueError):
        ProfilePair(np.array([1.0, np.nan]), np.zeros(2))
    z = ProfilePair(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    assert np.isnan(z.theta[0]) and z.theta[1] == pytest.approx(math.pi / 4)


def test_forward_matches_gaussian_transform(grid):
    fh = forward(grid, np.exp(-grid.x ** 2))
    exact = math.sqrt(math.pi) * np.exp(-grid.xi ** 2 / 4)
    assert np.max(np.abs(fh - exact)) < 1e-13
    back = inverse(grid, fh)
    assert np.max(np.abs(back - np.exp(-grid.x ** 2))) < 1e-13


@pytest.mark.parametrize("s", [0.55, 0.75, 0.95])
def test_fractional_laplacian_of_gaussian_at_origin(s):
    # (-d_xx)^s exp(-x^2) decays like |x|^-(2s+1), so periodic images leave an
    # error of that order in L
    exact = 4 ** s * special.gamma(s + 0.5) / math.sqrt(math.pi)
    errs = []
    for L in (40.0, 80.0):
        g = make_grid(L, int(25.6 * L))
        errs.append(abs(fractional_laplacian(g, s, np.exp(-g.x ** 2))[g.centre] / exact - 1))
    assert errs[1] < 2e-4
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2 * s + 1, abs=0.05)


def test_s_one_is_minus_second_derivative(grid):
    f = np.exp(-grid.x ** 2)
    assert np.allclose(fractional_laplacian(grid, 1.0, f), (2 - 4 * grid.x ** 2) * f, atol=1e-12)
    assert np.allclose(derivative(grid, f), -2 * grid.x * f, atol=1e-12)


def test_parseval(grid, rng):
    p = validate(ModelParams(s=0.75, lambda2=0.4))
    z = gaussian_pair(grid)
    direct = inner(grid, apply_q(p, grid, z), z)
    assert inner_q(p, grid, z) == pytest.approx(direct, rel=1e-10)
    u = rng.standard_normal(grid.N)
    assert trapezoid(grid, u * u) == pytest.approx(
        grid.h / grid.N * np.sum(np.abs(np.fft.fft(u)) ** 2), rel=1e-12)


def test_non_hermitian_symbol_rejected(grid):
    z = gaussian_pair(grid)
    bad = lambda xi: np.array([[1j * np.abs(xi), 0 * xi], [0 * xi, 1 + 0 * xi]])
    with pytest.raises(SymbolStructureError):
        apply_multiplier(grid, bad, z)


def test_q_on_random_data_is_real(grid, rng):
    # white noise excites the Nyquist mode; the odd symbol part must not leak
    p = validate(ModelParams(s=0.6, lambda2=0.3))
    z = ProfilePair(rng.standard_normal(grid.N), rng.standard_normal(grid.N))
    out = apply_multiplier(grid, lambda xi: symbol_matrix(p, xi), z)
    assert np.all(np.isfinite(out.v))


def test_dealiased_product_is_exact_for_bandlimited_data():
    g = make_grid(math.pi, 32)
    p = ModelParams(s=0.75, sigma=1.0)
    v = np.cos(5 * g.x) + 0.5 * np.sin(3 * g.x)
    w = 0.25 * np.cos(7 * g.x)
    G = nonlinear_term(p, g, ProfilePair(v, w), pad=dealias_factor(1.0))
    # exact cubic, then drop modes |k| >= N/2
    fine = np.linspace(-math.pi, math.pi, 256, endpoint=False)
    vf = np.cos(5 * fine) + 0.5 * np.sin(3 * fine)
    wf = 0.25 * np.cos(7 * fine)
    F = np.fft.fft((vf ** 2 + wf ** 2) * vf)
    k = np.fft.fftfreq(256, 1 / 256)
    F[np.abs(k) >= 16] = 0
    ref = np.fft.ifft(F).real[::8]
    assert np.max(np.abs(G.v - ref)) < 1e-13


def test_inner_g_matches_padded_pairing(grid):
    p = ModelParams(s=0.75, sigma=1.0)
    z = gaussian_pair(grid)
    for pad in (1, 2, 3):
        G = nonlinear_term(p, grid, z, pad=pad)
        assert inner_g(p, grid, z, pad=pad) == pytest.approx(inner(grid, G, z), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(-2.0, 2.0), st.floats(0.55, 0.99))
def test_invariants_rotation_invariant(alpha, beta, s):
    g = make_grid(20.0, 512)
    z = gaussian_pair(g)
    base = invariants(g, s, 1.0, z)
    rot = invariants(g, s, 1.0, group_action(alpha, 0.0, z, g))
    assert np.allclose(rot, base, rtol=1e-10, atol=1e-12)
    # non-integer translation of a resolved profile: spectral accuracy
    tr = invariants(g, s, 1.0, group_action(alpha, beta, z, g))
    assert np.allclose(tr, base, rtol=1e-9, atol=1e-11)


def test_spectral_shift_of_gaussian(grid):
    f = np.exp(-grid.x ** 2)
    assert np.allclose(spectral_shift(grid, f, 0.37), np.exp(-(grid.x - 0.37) ** 2), atol=1e-13)
