"""Real-space convolution kernels ``k11 = k22`` and ``k12 = -k21`` of ``Q^{-1}``
and their algebraic tail constants.

For large ``|x|``::

    |x|^(2s+1) k11(x)      -> K1 = sin(s pi) Gamma(2s+1) / (pi l1^2)
    |x|^(2s+2) k12(x) sgn  -> K2 = -2 l2 sin(s pi) Gamma(2s+2) / (pi l1^3)

With ``l1 = 1`` these are the textbook constants. The ``l1`` powers come from
the leading non-smooth terms ``-|xi|^(2s)/l1^2`` and ``-2 i l2 xi |xi|^(2s)/l1^3``
of the symbols at the origin.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .model import ModelParams, inverse_symbol_matrix
from .spectral import Grid, make_grid

CONSTANT_RTOL = 1e-10
# tapered symbol magnitude at the cutoff, relative to its value at xi = 0
CUTOFF_DECAY_TOL = 0.05


class QuadratureError(RuntimeError):
    """Adaptive quadrature disagreed with the Gamma-function closed form."""


class InsufficientDecayError(ValueError):
    """Frequency cutoff too low for the slowly decaying kernel symbols."""


class TailWindowError(ValueError):
    """Requested tail window is contaminated by periodic images."""


def _moment(p: float) -> float:
    val, _ = integrate.quad(lambda z: z ** p * math.exp(-z), 0.0, np.inf,
                            epsabs=0.0, epsrel=1e-13, limit=500)
    return val


def kernel_constants(params: ModelParams, check: bool = True):
    """Tail constants ``(K1, K2)`` by quadrature, cross-checked against Gamma."""
    s, l1, l2 = params.s, params.lambda1, params.lambda2
    pref = math.sin(s * math.pi) / math.pi
    m0, m1 = _moment(2 * s), _moment(2 * s + 1)
    if check:
        for got, p in ((m0, 2 * s), (m1, 2 * s + 1)):
            ref = special.gamma(p + 1.0)
            if abs(got - ref) > CONSTANT_RTOL * abs(ref):
                raise QuadratureError(
                    f"int z^{p:g} e^-z dz: quadrature {got!r} vs Gamma {ref!r}")
    K1 = pref * m0 / l1 ** 2
    K2 = -2.0 * l2 * pref * m1 / l1 ** 3
    return K1, K2


def kernel_constants_gamma(params: ModelParams):
    """Closed-form ``(K1, K2)`` via the Gamma function."""
    s, l1, l2 = params.s, params.lambda1, params.lambda2
    pref = math.sin(s * math.pi) / math.pi
    return (pref * special.gamma(2 * s + 1) / l1 ** 2,
            -2.0 * l2 * pref * special.gamma(2 * s + 2) / l1 ** 3)


def kernel_grid(params: ModelParams, grid: Grid, taper: bool = True):
    """Kernels ``(k11, k12)`` on the full periodic grid by inverse FFT.

    The symbols decay only like ``|xi|^(-2s)``, so the band-limited sum leaves a
    Nyquist-rate sawtooth ``(-1)^j S(x)`` in the far field (dominant for the odd
    kernel). ``taper`` multiplies the symbols by ``cos(xi h / 2)^2``, which
    annihilates that sawtooth to O(h^2) while preserving the value at ``xi = 0``.
    """
    K = inverse_symbol_matrix(params, grid.xi)
    k11h = K[0, 0].real
    k12h = K[0, 1].copy()
    k12h[grid.N // 2] = 0.0
    if taper:
        filt = np.cos(0.5 * grid.xi * grid.h) ** 2
        k11h = k11h * filt
        k12h = k12h * filt
    # nodes start at -L; shift so that x = 0 lands on index N/2
    k11 = np.fft.fftshift(np.fft.ifft(k11h).real) / grid.h
    k12 = np.fft.fftshift(np.fft.ifft(k12h).real) / grid.h
    return k11, k12


@dataclass(frozen=True)
class KernelSamples:
    x: np.ndarray
    k11: np.ndarray
    k12: np.ndarray
    K1: float
    K2: float
    oversample_factor: int
    L_eval: float


def eval_kernels(params: ModelParams, L_eval: float = 512.0, M: int | None = None,
                 oversample: int = 8, taper: bool = True) -> KernelSamples:
    """Sample the kernels at ``x_j = j L_eval / M``, ``j = 1..M``.

    The FFT runs on ``(-oversample L_eval, oversample L_eval)`` with spacing
    ``L_eval / M`` so that periodic images sit far outside the sampled range.
    ``M`` defaults to ``8 L_eval`` (spacing 1/8).
    """
    if M is None:
        M = int(round(8 * L_eval))
    if oversample < 1 or M < 8:
        raise ValueError("need oversample >= 1 and M >= 8")
    grid = make_grid(oversample * L_eval, 2 * oversample * M)
    K = inverse_symbol_matrix(params, np.array([0.0, grid.nyquist]))
    cutoff = abs(K[0, 0, 1].real)
    if cutoff > CUTOFF_DECAY_TOL * abs(K[0, 0, 0].real):
        raise InsufficientDecayError(
            f"kernel symbol at the cutoff is {cutoff:.3e}; refine the spacing L_eval/M")
    k11, k12 = kernel_grid(params, grid, taper=taper)
    c = grid.centre
    K1, K2 = kernel_constants(params)
    return KernelSamples(
        x=grid.x[c + 1:c + 1 + M].copy(),
        k11=k11[c + 1:c + 1 + M].copy(),
        k12=k12[c + 1:c + 1 + M].copy(),
        K1=K1, K2=K2, oversample_factor=oversample, L_eval=float(L_eval),
    )


def kernel_quadrature(params: ModelParams, x) -> tuple[np.ndarray, np.ndarray]:
    """Kernels at ``x > 0`` by direct Fourier-integral quadrature (QUADPACK QAWF).

    Independent of the FFT path; used as a reference.
    """
    s, l1, l2 = params.s, params.lambda1, params.lambda2

    def lam(t):
        q = l1 + t ** (2 * s)
        return q * q - (l2 * t) ** 2

    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise ValueError("kernel_quadrature needs x > 0")
    k11 = np.empty_like(xs)
    k12 = np.empty_like(xs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for i, xv in enumerate(xs):
            k11[i] = integrate.quad(lambda t: (l1 + t ** (2 * s)) / lam(t), 0.0, np.inf,
                                    weight="cos", wvar=xv, limlst=200)[0] / math.pi
            if l2 == 0.0:
                k12[i] = 0.0
            else:
                k12[i] = -integrate.quad(lambda t: t * l2 / lam(t), 0.0, np.inf,
                                         weight="sin", wvar=xv, limlst=200)[0] / math.pi
    return k11, k12


@dataclass(frozen=True)
class TailReport:
    x: np.ndarray
    scaled_k11: np.ndarray
    scaled_k12: np.ndarray
    dev_k11: np.ndarray
    dev_k12: np.ndarray
    median_dev_k11: float
    median_dev_k12: float
    K1: float
    K2: float
    window: tuple
    absolute_k12: bool


def _deviation(values, K):
    if K == 0.0:
        return np.abs(values), True
    return np.abs(values / K - 1.0), False


def kernel_tail_report(samples: KernelSamples, params: ModelParams, window=None) -> TailReport:
    """Scaled kernels ``x^(2s+1) k11`` and ``x^(2s+2) k12`` against ``K1``, ``K2``.

    Deviations are relative, except against ``K2 = 0`` where the absolute
    value is reported. Default window ``[0.1, 0.5] * L_eval``.
    """
    Le = samples.L_eval
    lo, hi = window if window is not None else (0.1 * Le, 0.5 * Le)
    if lo < 10.0 or hi <= lo:
        raise TailWindowError(f"window [{lo}, {hi}] must satisfy 10 <= lo < hi")
    if hi > 0.75 * Le:
        raise TailWindowError(
            f"window upper end {hi} overlaps the outer 25% of the evaluation domain")
    sel = (samples.x >= lo) & (samples.x <= hi)
    if not np.any(sel):
        raise TailWindowError("window contains no samples")
    x = samples.x[sel]
    s = params.s
    a = x ** (2 * s + 1) * samples.k11[sel]
    b = x ** (2 * s + 2) * samples.k12[sel]
    d1, _ = _deviation(a, samples.K1)
    d2, absolute = _deviation(b, samples.K2)
    return TailReport(
        x=x, scaled_k11=a, scaled_k12=b, dev_k11=d1, dev_k12=d2,
        median_dev_k11=float(np.median(d1)), median_dev_k12=float(np.median(d2)),
        K1=samples.K1, K2=samples.K2, window=(float(lo), float(hi)),
        absolute_k12=absolute,
    )
