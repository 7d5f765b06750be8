"""Periodic Fourier collocation on (-L, L).

Frequencies are stored in FFT order (``numpy.fft.fftfreq``), so ``xi[N//2]``
is the Nyquist frequency ``-pi N / (2L)``. Multipliers act mode by mode; at
the Nyquist mode only the even part of a symbol is kept so that real input
stays real.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .model import ModelParams, nonlinearity, symbol_matrix

RHO_FLOOR = 1e-14
REALITY_TOL = 1e-10


class SymbolStructureError(ValueError):
    """A multiplier produced a non-real field from real input."""


@dataclass(frozen=True)
class Grid:
    L: float
    N: int
    x: np.ndarray = field(repr=False, compare=False)
    xi: np.ndarray = field(repr=False, compare=False)

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return math.pi / self.L

    @property
    def nyquist(self) -> float:
        return math.pi * self.N / (2.0 * self.L)

    @property
    def centre(self) -> int:
        """Index of the node x = 0."""
        return self.N // 2

    def xi_sorted(self) -> np.ndarray:
        return np.fft.fftshift(self.xi)


def make_grid(L: float, N: int) -> Grid:
    """Uniform periodic grid ``x_j = -L + 2Lj/N`` with frequencies ``pi k / L``."""
    if not L > 0:
        raise ValueError(f"L must be positive, got {L!r}")
    if int(N) != N or N % 2 or N < 16:
        raise ValueError(f"N must be an even integer >= 16, got {N!r}")
    N = int(N)
    L = float(L)
    x = -L + (2.0 * L / N) * np.arange(N)
    xi = 2.0 * np.pi * np.fft.fftfreq(N, d=2.0 * L / N)
    x.setflags(write=False)
    xi.setflags(write=False)
    return Grid(L=L, N=N, x=x, xi=xi)


@dataclass(frozen=True)
class ProfilePair:
    """Real field pair sampled on a grid; ``u = v + i w = rho exp(i theta)``."""

    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if v.shape != w.shape or v.ndim != 1:
            raise ValueError("v and w must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise ValueError("profile contains non-finite samples")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @property
    def rho(self) -> np.ndarray:
        return np.hypot(self.v, self.w)

    @property
    def theta(self) -> np.ndarray:
        """Phase, NaN where ``rho <= RHO_FLOOR``."""
        th = np.arctan2(self.w, self.v)
        th[self.rho <= RHO_FLOOR] = np.nan
        return th

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.v, self.w])

    @classmethod
    def from_stacked(cls, vec) -> "ProfilePair":
        n = len(vec) // 2
        return cls(vec[:n], vec[n:])

    def __add__(self, other):
        return ProfilePair(self.v + other.v, self.w + other.w)

    def __sub__(self, other):
        return ProfilePair(self.v - other.v, self.w - other.w)

    def __mul__(self, c):
        return ProfilePair(c * self.v, c * self.w)

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(max(np.max(np.abs(self.v)), np.max(np.abs(self.w))))

    def roll(self, k: int) -> "ProfilePair":
        return ProfilePair(np.roll(self.v, k), np.roll(self.w, k))


# -- transforms -------------------------------------------------------------

def forward(grid: Grid, f) -> np.ndarray:
    """Discrete approximation of ``f^(xi_k)`` (FFT order)."""
    phase = np.exp(1j * grid.xi * grid.L)
    return grid.h * phase * np.fft.fft(f)


def inverse(grid: Grid, fhat) -> np.ndarray:
    """Inverse of :func:`forward`; returns complex samples."""
    phase = np.exp(-1j * grid.xi * grid.L)
    return np.fft.ifft(phase * fhat) / grid.h


def trapezoid(grid: Grid, f) -> float:
    """Trapezoid rule on the periodic grid."""
    return float(grid.h * np.sum(f))


def _nyquist_even(grid: Grid, sym: np.ndarray, symbol_fn=None) -> np.ndarray:
    """Replace the Nyquist entry by the even part of the symbol there."""
    k = grid.N // 2
    sym = np.array(sym, dtype=complex, copy=True)
    if symbol_fn is not None:
        reflected = np.asarray(symbol_fn(np.array([-grid.xi[k]])))[..., 0]
        sym[..., k] = 0.5 * (sym[..., k] + reflected)
    else:
        # Hermitian-structured symbols: the odd part is the imaginary part
        sym[..., k] = sym[..., k].real
    return sym


SymbolLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def _symbol_on_grid(grid: Grid, symbol: SymbolLike) -> np.ndarray:
    if callable(symbol):
        return _nyquist_even(grid, symbol(grid.xi), symbol)
    return _nyquist_even(grid, symbol)


def _to_real(grid: Grid, out: np.ndarray, scale: float) -> np.ndarray:
    imag = np.max(np.abs(out.imag)) if out.size else 0.0
    if imag > REALITY_TOL * max(scale, 1e-300) and imag > 1e-300:
        raise SymbolStructureError(
            f"multiplier output has imaginary residue {imag:.3e} (relative to {scale:.3e})"
        )
    return out.real


def apply_multiplier(grid: Grid, symbol: SymbolLike, u: ProfilePair) -> ProfilePair:
    """Apply a 2x2 Fourier multiplier to ``u`` mode by mode.

    ``symbol`` is either a callable ``xi -> array (2, 2, len(xi))`` or such an
    array already sampled on ``grid.xi``.
    """
    S = _symbol_on_grid(grid, symbol)
    V = np.fft.fft(u.v)
    W = np.fft.fft(u.w)
    a = np.fft.ifft(S[0, 0] * V + S[0, 1] * W)
    b = np.fft.ifft(S[1, 0] * V + S[1, 1] * W)
    scale = max(np.max(np.abs(a.real)), np.max(np.abs(b.real)), 1e-300)
    return ProfilePair(_to_real(grid, a, scale), _to_real(grid, b, scale))


def apply_scalar_multiplier(grid: Grid, values: np.ndarray, f) -> np.ndarray:
    """Scalar multiplier (``values`` sampled on ``grid.xi``) applied to ``f``."""
    vals = _nyquist_even(grid, values)
    out = np.fft.ifft(vals * np.fft.fft(f))
    return _to_real(grid, out, max(np.max(np.abs(out.real)), 1e-300))


def fractional_laplacian(grid: Grid, s: float, f) -> np.ndarray:
    """``(-d_xx)^s f`` with symbol ``|xi|^(2s)``."""
    return np.fft.ifft(np.abs(grid.xi) ** (2.0 * s) * np.fft.fft(f)).real


def derivative(grid: Grid, f) -> np.ndarray:
    """Spectral ``f'``; the odd Nyquist mode is zeroed."""
    d = 1j * grid.xi
    d[grid.N // 2] = 0.0
    return np.fft.ifft(d * np.fft.fft(f)).real


def spectral_shift(grid: Grid, f, beta: float) -> np.ndarray:
    """Samples of the trigonometric interpolant of ``f`` at ``x - beta``."""
    ph = np.exp(-1j * grid.xi * beta)
    ph[grid.N // 2] = math.cos(grid.xi[grid.N // 2] * beta)
    return np.fft.ifft(ph * np.fft.fft(f)).real


def apply_q(params: ModelParams, grid: Grid, z: ProfilePair) -> ProfilePair:
    return apply_multiplier(grid, lambda xi: symbol_matrix(params, xi), z)


# -- nonlinearity with optional zero-padding -------------------------------

def dealias_factor(sigma: float) -> int:
    """Padding factor that removes aliasing exactly for integer sigma."""
    return int(min(4, max(2, math.ceil(sigma + 1.0))))


def _pad(f: np.ndarray, N: int, M: int) -> np.ndarray:
    F = np.fft.fft(f)
    G = np.zeros(M, dtype=complex)
    h = N // 2
    G[:h] = F[:h]
    G[M - h + 1:] = F[h + 1:]
    return np.fft.ifft(G).real * (M / N)


def _truncate(f: np.ndarray, N: int, M: int) -> np.ndarray:
    F = np.fft.fft(f)
    H = np.zeros(N, dtype=complex)
    h = N // 2
    H[:h] = F[:h]
    H[h + 1:] = F[M - h + 1:]
    return np.fft.ifft(H).real * (N / M)


def nonlinear_term(params: ModelParams, grid: Grid, z: ProfilePair, pad: int = 1) -> ProfilePair:
    """``G(z)`` on the grid; with ``pad > 1`` products are formed on a
    ``pad * N`` grid from the trigonometric interpolant and truncated back."""
    if pad <= 1:
        g1, g2 = nonlinearity(params, z.v, z.w)
        return ProfilePair(g1, g2)
    N, M = grid.N, pad * grid.N
    vp, wp = _pad(z.v, N, M), _pad(z.w, N, M)
    g1, g2 = nonlinearity(params, vp, wp)
    return ProfilePair(_truncate(g1, N, M), _truncate(g2, N, M))


# -- inner products ---------------------------------------------------------

def inner(grid: Grid, a: ProfilePair, b: ProfilePair) -> float:
    """Discrete L2 pairing by the trapezoid rule."""
    return trapezoid(grid, a.v * b.v + a.w * b.w)


def inner_q(params: ModelParams, grid: Grid, z: ProfilePair) -> float:
    """``<Q z, z>`` evaluated in Fourier space (Parseval)."""
    S = _symbol_on_grid(grid, lambda xi: symbol_matrix(params, xi))
    V = np.fft.fft(z.v)
    W = np.fft.fft(z.w)
    quad = (np.conj(V) * (S[0, 0] * V + S[0, 1] * W)
            + np.conj(W) * (S[1, 0] * V + S[1, 1] * W))
    return float(grid.h / grid.N * np.sum(quad).real)


def inner_g(params: ModelParams, grid: Grid, z: ProfilePair, pad: int = 1) -> float:
    """``<G(z), z> = int (v^2 + w^2)^(sigma+1)``, trapezoid rule.

    With ``pad > 1`` the integrand is taken from the interpolant on the fine
    grid, which equals ``<nonlinear_term(.., pad), z>`` by Parseval.
    """
    if pad <= 1:
        r2 = z.v * z.v + z.w * z.w
        return trapezoid(grid, r2 ** (params.sigma + 1.0))
    N, M = grid.N, pad * grid.N
    vp, wp = _pad(z.v, N, M), _pad(z.w, N, M)
    r2 = vp * vp + wp * wp
    return float(grid.h / pad * np.sum(r2 ** (params.sigma + 1.0)))
