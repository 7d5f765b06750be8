"""Model parameters, Fourier symbols and the nonlinearity of the profile system.

The stationary system for a solitary-wave profile ``z = (v, w)`` reads

    (-d_xx)^s v + l1 v - l2 w' = (v^2 + w^2)^sigma v
    (-d_xx)^s w + l1 w + l2 v' = (v^2 + w^2)^sigma w

or ``Q z = G(z)`` with ``Q`` the 2x2 matrix Fourier multiplier built here.
The Fourier transform convention is ``f^(xi) = int f(x) exp(-i xi x) dx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .spectral import Grid, ProfilePair


class AdmissibilityError(ValueError):
    """Raised when model parameters fall outside the existence window."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = tuple(failures)


@dataclass(frozen=True)
class ModelParams:
    """Fractional order ``s``, nonlinearity ``sigma`` and Lagrange multipliers.

    ``lambda1`` plays the role of a frequency, ``lambda2`` the wave speed.
    ``classical=True`` admits ``s = 1`` (the classical NLS) for regression
    checks against closed-form solutions; it is off by default.
    """

    s: float
    sigma: float = 1.0
    lambda1: float = 1.0
    lambda2: float = 0.0
    classical: bool = False
    admissible: bool = False

    def checked(self) -> "ModelParams":
        return validate(self)


def speed_bound(s: float, lambda1: float) -> float:
    """Largest admissible ``|lambda2|``: ``2s (lambda1 / (2s-1))^((2s-1)/(2s))``."""
    if not s > 0.5:
        raise ValueError(f"speed bound undefined for s={s!r} <= 1/2")
    if s > 1:
        raise ValueError(f"speed bound requires s <= 1, got {s!r}")
    if not lambda1 > 0:
        raise ValueError(f"speed bound requires lambda1 > 0, got {lambda1!r}")
    return 2.0 * s * (lambda1 / (2.0 * s - 1.0)) ** ((2.0 * s - 1.0) / (2.0 * s))


def validate(params: ModelParams) -> ModelParams:
    """Return a copy of ``params`` marked admissible, or raise AdmissibilityError.

    Every failing inequality is listed in ``AdmissibilityError.failures``.
    """
    failures = []
    s = params.s
    s_ok = (0.5 < s < 1.0) or (s == 1.0 and params.classical)
    if not s_ok:
        if s == 1.0:
            failures.append("s-range: s = 1 requires the classical flag")
        else:
            failures.append(f"s-range: need 1/2 < s < 1, got s={s}")
    if not params.sigma > 0:
        failures.append(f"sigma: need sigma > 0, got {params.sigma}")
    if not params.lambda1 > 0:
        failures.append(f"lambda1: need lambda1 > 0, got {params.lambda1}")
    if s_ok and params.lambda1 > 0:
        c = speed_bound(s, params.lambda1)
        if not abs(params.lambda2) < c:
            failures.append(
                f"speed bound: need |lambda2| < {c:.6g}, got lambda2={params.lambda2}"
            )
    if failures:
        raise AdmissibilityError("inadmissible parameters: " + "; ".join(failures), failures)
    return ModelParams(
        s=float(s),
        sigma=float(params.sigma),
        lambda1=float(params.lambda1),
        lambda2=float(params.lambda2),
        classical=params.classical,
        admissible=True,
    )


@dataclass(frozen=True)
class SymbolValue:
    """Entries of the symbol of ``Q`` at one frequency.

    ``q12`` is the (1,2) entry ``-i l2 xi``; the (2,1) entry is its conjugate.
    """

    xi: float
    q11: float
    q12: complex
    lambda_plus: float
    lambda_minus: float
    det: float

    @property
    def q21(self) -> complex:
        return self.q12.conjugate()

    def matrix(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q21, self.q11]], dtype=complex)


def _diag(params: ModelParams, xi):
    return params.lambda1 + np.abs(xi) ** (2.0 * params.s)


def symbol_at(params: ModelParams, xi: float) -> SymbolValue:
    q11 = float(_diag(params, xi))
    b = params.lambda2 * xi
    lp, lm = q11 + b, q11 - b
    return SymbolValue(xi=float(xi), q11=q11, q12=complex(0.0, -b),
                       lambda_plus=lp, lambda_minus=lm, det=lp * lm)


def inverse_symbol_at(params: ModelParams, xi: float) -> np.ndarray:
    """2x2 symbol of ``K = Q^{-1}`` at ``xi``."""
    sv = symbol_at(params, xi)
    k11 = sv.q11 / sv.det
    k12 = 1j * params.lambda2 * xi / sv.det
    return np.array([[k11, k12], [np.conj(k12), k11]], dtype=complex)


def symbol_matrix(params: ModelParams, xi: np.ndarray) -> np.ndarray:
    """Vectorised symbol of ``Q``: array of shape ``(2, 2, len(xi))``."""
    xi = np.asarray(xi, dtype=float)
    q = _diag(params, xi)
    b = params.lambda2 * xi
    out = np.empty((2, 2) + xi.shape, dtype=complex)
    out[0, 0] = q
    out[1, 1] = q
    out[0, 1] = -1j * b
    out[1, 0] = 1j * b
    return out


def inverse_symbol_matrix(params: ModelParams, xi: np.ndarray) -> np.ndarray:
    """Vectorised symbol of ``K = Q^{-1}``, shape ``(2, 2, len(xi))``."""
    xi = np.asarray(xi, dtype=float)
    q = _diag(params, xi)
    b = params.lambda2 * xi
    det = q * q - b * b
    out = np.empty((2, 2) + xi.shape, dtype=complex)
    out[0, 0] = q / det
    out[1, 1] = q / det
    out[0, 1] = 1j * b / det
    out[1, 0] = -1j * b / det
    return out


def nonlinearity(params: ModelParams, v, w):
    """``G(v, w) = (v^2 + w^2)^sigma (v, w)``; works on scalars or arrays."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    r2 = v * v + w * w
    # r2 ** sigma is 0 at the origin for sigma > 0
    f = r2 ** params.sigma
    g1, g2 = f * v, f * w
    if g1.ndim == 0:
        return float(g1), float(g2)
    return g1, g2


def group_action(alpha: float, beta: float, profile: "ProfilePair", grid: "Grid") -> "ProfilePair":
    """Rotate by ``alpha`` and translate by ``beta``: ``R(alpha) z(x - beta)``.

    The translation is a spectral phase shift, exact for trigonometric
    interpolants; at the Nyquist mode only the real part of the phase is kept.
    """
    from .spectral import ProfilePair, spectral_shift

    v, w = profile.v, profile.w
    if beta != 0.0:
        v = spectral_shift(grid, v, beta)
        w = spectral_shift(grid, w, beta)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return ProfilePair(ca * v - sa * w, sa * v + ca * w)


def classical_ground_state(params: ModelParams, x) -> np.ndarray:
    """Closed-form ground state for ``s = 1`` and ``lambda2 = 0``.

    ``(l1 (sigma+1))^(1/(2 sigma)) sech(sigma sqrt(l1) x)^(1/sigma)``; for
    sigma = 1, l1 = 1 this is ``sqrt(2) sech(x)``.
    """
    if params.s != 1.0 or params.lambda2 != 0.0:
        raise ValueError("closed form only available for s = 1, lambda2 = 0")
    sig, l1 = params.sigma, params.lambda1
    x = np.asarray(x, dtype=float)
    amp = (l1 * (sig + 1.0)) ** (1.0 / (2.0 * sig))
    return amp / np.cosh(sig * math.sqrt(l1) * x) ** (1.0 / sig)
