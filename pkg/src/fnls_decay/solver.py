"""Petviashvili iteration for ``Q z = G(z)`` with restarted MPE/RRE acceleration.

One step::

    m   = <Q z, z> / <G(z), z>
    z+  = K (m^alpha G(z)),        K = Q^{-1}

At a fixed point ``m = 1``. Stopping needs the sup-norm increment, the L2
residual ``||Q z - G(z)||`` and ``|m - 1|`` all below tolerance.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import ModelParams, inverse_symbol_matrix, symbol_matrix, validate
from .spectral import (
    Grid,
    ProfilePair,
    _nyquist_even,
    dealias_factor,
    inner_g,
    nonlinear_term,
    trapezoid,
)

COLLAPSE_TOL = 1e-300
BLOWUP_SUP = 1e12
EXTRAPOLATION_METHODS = ("none", "mpe", "rre")


class SolverError(RuntimeError):
    """Base class for iteration failures; carries the trace so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class CollapseError(SolverError):
    """Iterate collapsed to zero (``<G(z), z>`` vanished)."""


class DivergenceError(SolverError):
    """Non-finite stabilising factor or blow-up of the iterate."""


class ConvergenceError(SolverError):
    """Iteration cap reached before all tolerances were met."""


class ExtrapolationWarning(RuntimeWarning):
    pass


@dataclass
class SolverConfig:
    alpha: float | None = None  # None -> (2 sigma + 1) / (2 sigma)
    tol_inc: float = 1e-10
    tol_res: float = 1e-9
    tol_m: float = 1e-10
    max_iter: int = 500
    extrapolation: str = "none"
    cycle_width: int = 6
    dealias: bool = True
    recentre: bool = True

    def __post_init__(self):
        self.extrapolation = str(self.extrapolation).lower()
        if self.extrapolation not in EXTRAPOLATION_METHODS:
            raise ValueError(f"extrapolation must be one of {EXTRAPOLATION_METHODS}")
        if min(self.tol_inc, self.tol_res, self.tol_m) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.cycle_width < 2:
            raise ValueError("cycle_width must be >= 2")

    def alpha_for(self, sigma: float) -> float:
        if self.alpha is None:
            return (2 * sigma + 1) / (2 * sigma)
        hi = (2 * sigma + 2) / (2 * sigma)
        if not 1.0 < self.alpha < hi:
            raise ValueError(f"alpha must lie in (1, {hi:g}) for sigma={sigma:g}")
        return self.alpha

    def pad_for(self, sigma: float) -> int:
        return dealias_factor(sigma) if self.dealias else 1


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    m_nu: float
    residual: float
    increment: float
    kind: str  # "plain" or "extrapolated" (step taken from an extrapolant)


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.records)

    def append(self, rec: TraceRecord):
        self.records.append(rec)

    @property
    def last(self) -> TraceRecord:
        return self.records[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["iter", "m_nu", "residual", "increment", "kind"])
            for r in self.records:
                wr.writerow([r.iteration, f"{r.m_nu:.15g}", f"{r.residual:.15g}",
                             f"{r.increment:.15g}", r.kind])


def default_phase_slope(params: ModelParams) -> float:
    """Wavenumber ``A`` with ``lambda2 = 2s |A|^(2s-2) A``."""
    l2, s = params.lambda2, params.s
    if l2 == 0.0:
        return 0.0
    return math.copysign((abs(l2) / (2 * s)) ** (1.0 / (2 * s - 1)), l2)


def initial_guess(grid: Grid, kind: str = "gaussian", amplitude: float = 1.0,
                  width: float = 1.0, phase: str = "linear", A: float = 0.0) -> ProfilePair:
    """Seed ``rho0(x) exp(i theta(x))``; ``theta = A x`` or ``theta = x^2``."""
    if not (amplitude > 0 and width > 0):
        raise ValueError("amplitude and width must be positive")
    x = grid.x
    if kind == "gaussian":
        rho0 = amplitude * np.exp(-(x / width) ** 2)
    elif kind == "sech":
        rho0 = amplitude / np.cosh(x / width)
    else:
        raise ValueError(f"unknown seed kind {kind!r}")
    if phase == "linear":
        th = A * x
    elif phase == "quadratic":
        th = x * x
    else:
        raise ValueError(f"unknown phase {phase!r}")
    return ProfilePair(rho0 * np.cos(th), rho0 * np.sin(th))


class _Operators:
    """Symbols of Q and K sampled once per (params, grid)."""

    def __init__(self, params: ModelParams, grid: Grid, pad: int):
        self.params, self.grid, self.pad = params, grid, pad
        self.Q = _nyquist_even(grid, symbol_matrix(params, grid.xi),
                               lambda xi: symbol_matrix(params, xi))
        self.K = inverse_symbol_matrix(params, grid.xi)
        # invert the projected Q at Nyquist rather than project K, so that
        # K Q = I holds on every mode
        k = grid.N // 2
        self.K[:, :, k] = np.linalg.inv(self.Q[:, :, k])

    @staticmethod
    def _apply(S, V, W):
        a = np.fft.ifft(S[0, 0] * V + S[0, 1] * W).real
        b = np.fft.ifft(S[1, 0] * V + S[1, 1] * W).real
        return a, b

    def evaluate(self, z: ProfilePair, alpha: float):
        """Return ``(z_next, m, residual)`` for one Petviashvili step from z."""
        grid = self.grid
        G = nonlinear_term(self.params, grid, z, pad=self.pad)
        V, W = np.fft.fft(z.v), np.fft.fft(z.w)
        qv, qw = self._apply(self.Q, V, W)
        num = trapezoid(grid, qv * z.v + qw * z.w)
        den = inner_g(self.params, grid, z, pad=self.pad)
        if not den > COLLAPSE_TOL:
            raise CollapseError(f"degenerate iterate: <G(z), z> = {den:.3e}")
        m = num / den
        if not math.isfinite(m) or m <= 0:
            raise DivergenceError(f"non-finite or non-positive stabilising factor m = {m!r}")
        res = math.sqrt(trapezoid(grid, (qv - G.v) ** 2 + (qw - G.w) ** 2))
        f = m ** alpha
        nv, nw = self._apply(self.K, f * np.fft.fft(G.v), f * np.fft.fft(G.w))
        return ProfilePair(nv, nw), m, res


def petviashvili_step(params: ModelParams, grid: Grid, z: ProfilePair, alpha: float,
                      pad: int = 1):
    """One Petviashvili update; returns ``(z_next, m_nu)``."""
    z_next, m, _ = _Operators(params, grid, pad).evaluate(z, alpha)
    return z_next, m


def extrapolate(history: Sequence, method: str = "mpe", tol: float = 0.0):
    """Minimal-polynomial (MPE) or reduced-rank (RRE) extrapolation.

    ``history`` holds iterates ``x_0 .. x_{k+1}`` (ProfilePairs or flat arrays);
    the differences ``u_i = x_{i+1} - x_i`` define the least-squares problem and
    the extrapolant is ``sum_i gamma_i x_i`` with ``sum_i gamma_i = 1``.
    Falls back to the last iterate (with an ExtrapolationWarning) when the
    difference matrix is rank deficient.
    """
    if len(history) < 3:
        raise ValueError("extrapolation needs at least three iterates")
    as_pairs = isinstance(history[0], ProfilePair)
    X = np.stack([h.stacked() if as_pairs else np.asarray(h, dtype=float) for h in history], axis=1)
    wrap = (lambda vec: ProfilePair.from_stacked(vec)) if as_pairs else (lambda vec: vec)
    U = np.diff(X, axis=1)
    if np.max(np.abs(U[:, -1])) <= tol or not np.any(U):
        return wrap(X[:, -1].copy())
    k = U.shape[1] - 1
    method = method.lower()
    # column scaling keeps the geometric decay of the differences from
    # masquerading as rank deficiency
    scale = np.linalg.norm(U, axis=0)
    scale[scale == 0] = 1.0
    Us = U / scale
    # only u_0 .. u_{k-1} need be independent; u_k depends on them once the
    # minimal polynomial has been captured
    d = np.abs(np.diag(np.linalg.qr(Us[:, :k], mode="r")))
    if d.min() <= 1e-13 * d.max():
        warnings.warn("rank-deficient difference matrix; keeping last iterate",
                      ExtrapolationWarning, stacklevel=2)
        return wrap(X[:, -1].copy())
    if method == "mpe":
        # U_{0..k-1} c = -u_k in the least-squares sense, c_k = 1
        c, *_ = np.linalg.lstsq(Us[:, :k], -Us[:, k], rcond=None)
        c = np.append(c / scale[:k], 1.0 / scale[k])
    elif method == "rre":
        # min ||U gamma|| with sum gamma = 1, eliminating gamma_k
        D = U[:, :k] - U[:, [k]]
        dn = np.linalg.norm(D, axis=0)
        dn[dn == 0] = 1.0
        g, *_ = np.linalg.lstsq(D / dn, -U[:, k], rcond=None)
        g = g / dn
        c = np.append(g, 1.0 - g.sum())
    else:
        raise ValueError(f"unknown extrapolation method {method!r}")
    total = c.sum()
    if not np.isfinite(total) or abs(total) < 1e-14 * np.abs(c).sum():
        warnings.warn("degenerate extrapolation weights; keeping last iterate",
                      ExtrapolationWarning, stacklevel=2)
        return wrap(X[:, -1].copy())
    gamma = c / total
    return wrap(X[:, : k + 1] @ gamma)


def recentre(grid: Grid, z: ProfilePair) -> ProfilePair:
    """Roll by whole nodes so that ``rho`` peaks at ``x = 0``."""
    return z.roll(grid.centre - int(np.argmax(z.rho)))


def solve_profile(params: ModelParams, grid: Grid, config: SolverConfig | None = None,
                  guess: ProfilePair | None = None):
    """Iterate to a solitary-wave profile; returns ``(profile, trace)``.

    Raises ConvergenceError, CollapseError or DivergenceError with the trace
    attached.
    """
    if not params.admissible:
        params = validate(params)
    config = config or SolverConfig()
    alpha = config.alpha_for(params.sigma)
    if guess is None:
        guess = initial_guess(grid, A=default_phase_slope(params))
    ops = _Operators(params, grid, config.pad_for(params.sigma))
    trace = IterationTrace()
    z = guess
    history = [z]
    kind = "plain"
    for it in range(config.max_iter):
        try:
            z_next, m, res = ops.evaluate(z, alpha)
        except SolverError as exc:
            exc.trace = trace
            raise
        inc = (z_next - z).sup()
        trace.append(TraceRecord(it, m, res, inc, kind))
        if inc <= config.tol_inc and res <= config.tol_res and abs(m - 1.0) <= config.tol_m:
            trace.converged = True
            out = recentre(grid, z) if config.recentre else z
            return out, trace
        if z_next.sup() > BLOWUP_SUP:
            raise DivergenceError(f"iterate blew up (sup norm {z_next.sup():.3e})", trace)
        kind = "plain"
        z = z_next
        if config.extrapolation != "none":
            history.append(z)
            if len(history) == config.cycle_width + 1:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always", ExtrapolationWarning)
                    z = extrapolate(history, config.extrapolation)
                kind = "fallback" if caught else "extrapolated"
                history = [z]
    raise ConvergenceError(
        f"no convergence in {config.max_iter} iterations "
        f"(residual {trace.last.residual:.3e}, |m-1| {abs(trace.last.m_nu - 1):.3e}, "
        f"increment {trace.last.increment:.3e})", trace)
