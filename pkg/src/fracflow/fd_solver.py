"""Finite-difference solver for the fractional rotating-cylinder equation.

Solves

    d omega/dt = (nu + alpha D_t^beta) L omega,   L = d2/dr2 + (1/r) d/dr - 1/r^2

on 0 <= r <= R with omega(0, t) = 0, omega(R, t) = R Omega t and omega(r, 0) = 0.
D_t^beta is the Riemann-Liouville derivative, discretised with Grunwald-Letnikov
weights applied to the stored history of L omega. The solver shares no code
with the series or transform paths.

The full-history convolution sum_k w_k H^{n-k} is accumulated online by
divide and conquer: contributions of a finished block of steps to the next
block are added with one FFT convolution, so nt = 1e5 steps cost
O(nt log^2 nt) rather than O(nt^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.signal import fftconvolve

from fracflow.errors import InstabilityError, ParameterError
from fracflow.params import FlowConfig, FluidParams

__all__ = ["Field", "Grid", "gl_derivative", "gl_weights", "radial_operator", "simulate"]

_DIRECT_BLOCK = 64
_FFT_COLUMNS = 32


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid: r_i = i R/(nr - 1), t_n = n dt, n = 0..nt."""

    nr: int
    dt: float
    nt: int
    R: float = 1.0

    def __post_init__(self):
        if self.nr < 16:
            raise ParameterError(f"nr must be >= 16, got {self.nr}")
        if not self.dt > 0:
            raise ParameterError(f"dt must be > 0, got {self.dt}")
        if self.nt < 1:
            raise ParameterError(f"nt must be >= 1, got {self.nt}")
        if not self.R > 0:
            raise ParameterError(f"R must be > 0, got {self.R}")

    @property
    def dr(self) -> float:
        return self.R / (self.nr - 1)

    @property
    def r(self) -> np.ndarray:
        return np.linspace(0.0, self.R, self.nr)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.nt + 1)

    def explicit_limit(self, nu: float) -> float:
        """Heuristic explicit-scheme bound 0.25 dr^2 / nu (Newtonian part only)."""
        return 0.25 * self.dr**2 / nu

    @classmethod
    def until(cls, t_final: float, nr: int, dt: float, R: float = 1.0) -> "Grid":
        return cls(nr=nr, dt=dt, nt=int(math.ceil(t_final / dt - 1e-9)), R=R)


@dataclass
class Field:
    """Velocity history on a :class:`Grid`; ``values[n, i]`` is omega(r_i, t_n)."""

    grid: Grid
    values: np.ndarray
    scheme: str

    def time_index(self, t: float) -> int:
        n = int(round(t / self.grid.dt))
        if not 0 <= n <= self.grid.nt or abs(n * self.grid.dt - t) > 1e-9 * max(1.0, t):
            raise ParameterError(f"t={t} is not a node of the time grid")
        return n

    def sample(self, r, t: float):
        """omega at (r, t), linear in r and in t between grid nodes."""
        pos = t / self.grid.dt
        if not -1e-9 <= pos <= self.grid.nt + 1e-9:
            raise ParameterError(f"t={t} lies outside the simulated interval")
        n = min(int(np.floor(pos + 1e-9)), self.grid.nt)
        frac = pos - n if n < self.grid.nt else 0.0
        row = self.values[n]
        if frac > 1e-9:
            row = (1.0 - frac) * row + frac * self.values[n + 1]
        return np.interp(r, self.grid.r, row)


def gl_weights(beta: float, m: int) -> np.ndarray:
    """Grunwald-Letnikov weights w_0..w_{m-1} of order ``beta``."""
    if not 0 < beta <= 1:
        raise ParameterError(f"beta must lie in (0, 1], got {beta}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    k = np.arange(1, m, dtype=float)
    w = np.empty(m)
    w[0] = 1.0
    w[1:] = np.cumprod((k - 1.0 - beta) / k)
    return w


def gl_derivative(values, beta: float, dt: float, axis: int = 0) -> np.ndarray:
    """D^beta of samples f(n dt), n = 0.., along ``axis`` (history from t = 0)."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    w = gl_weights(beta, f.shape[0]).reshape((-1,) + (1,) * (f.ndim - 1))
    out = fftconvolve(f, w, axes=0)[: f.shape[0]] * dt**-beta
    return np.moveaxis(out, 0, axis)


def _operator_coefficients(grid: Grid):
    # L on interior nodes i = 1..nr-2: lower, diagonal, upper
    dr = grid.dr
    ri = grid.r[1:-1]
    lower = 1.0 / dr**2 - 1.0 / (2.0 * ri * dr)
    diag = -2.0 / dr**2 - 1.0 / ri**2
    upper = 1.0 / dr**2 + 1.0 / (2.0 * ri * dr)
    return lower, diag, upper


def radial_operator(row, grid: Grid) -> np.ndarray:
    """Second-order central differences of L applied to ``row``.

    The end values are returned as zero: both are Dirichlet nodes.
    """
    row = np.asarray(row, dtype=float)
    if row.shape[-1] != grid.nr:
        raise ParameterError(f"row length {row.shape[-1]} != nr={grid.nr}")
    lower, diag, upper = _operator_coefficients(grid)
    out = np.zeros(row.shape)
    out[..., 1:-1] = lower * row[..., :-2] + diag * row[..., 1:-1] + upper * row[..., 2:]
    return out


def _operator_matrix(grid: Grid):
    lower, diag, upper = _operator_coefficients(grid)
    m = grid.nr - 2
    M = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    b = np.zeros(m)
    b[-1] = upper[-1]
    return M, b


def _add_block(acc, H, w, lo, mid, hi):
    # acc[n] += sum_{j in [lo, mid)} w[n - j] H[j] for n in [mid, hi)
    kern = w[: hi - lo, None]
    for c0 in range(0, H.shape[1], _FFT_COLUMNS):
        cols = slice(c0, c0 + _FFT_COLUMNS)
        conv = fftconvolve(H[lo:mid, cols], kern, axes=0)
        acc[mid:hi, cols] += conv[mid - lo: hi - lo]


def simulate(fp: FluidParams, fc: FlowConfig, grid: Grid, scheme: str = "implicit") -> Field:
    """March the fractional equation over ``grid``.

    ``scheme="implicit"`` treats nu L omega and the newest history term
    w_0 L omega^{n+1} implicitly (backward Euler); ``"explicit"`` is forward
    Euler and is only stable for very small dt when alpha > 0.
    Raises :class:`InstabilityError` if max|omega| exceeds 1e3 R Omega t_final.
    """
    if scheme not in ("implicit", "explicit"):
        raise ParameterError(f"unknown scheme {scheme!r}")
    if not math.isclose(grid.R, fc.R, rel_tol=1e-15):
        raise ParameterError("grid radius differs from the flow radius")
    nt, dt = grid.nt, grid.dt
    r = grid.r
    wall = fc.R * fc.Omega * grid.t
    M, b = _operator_matrix(grid)
    m = grid.nr - 2
    w = gl_weights(fp.beta, nt + 1)
    frac = fp.alpha * dt ** (1.0 - fp.beta)
    limit = 1e3 * abs(fc.R * fc.Omega) * grid.t[-1]

    omega = np.zeros((nt + 1, grid.nr))
    H = np.zeros((nt + 1, m))
    acc = np.zeros((nt + 1, m))
    if scheme == "implicit":
        kappa = dt * fp.nu + frac
        lu = lu_factor(np.eye(m) - kappa * M)

    def step(n):
        if n == 0:
            return
        if scheme == "implicit":
            rhs = omega[n - 1, 1:-1] + kappa * b * wall[n] + frac * acc[n]
            inner = lu_solve(lu, rhs, check_finite=False)
        else:
            prev = H[n - 1]
            inner = omega[n - 1, 1:-1] + dt * fp.nu * prev + frac * (w[0] * prev + acc[n - 1])
        omega[n, 1:-1] = inner
        omega[n, -1] = wall[n]
        H[n] = M @ inner + b * wall[n]
        peak = np.max(np.abs(inner)) if m else 0.0
        if not np.isfinite(peak) or (limit > 0 and peak > limit) or (limit == 0 and peak > 0):
            raise InstabilityError(
                f"max|omega| = {peak:.3g} exceeds {limit:.3g} at step {n} (dt={dt})")

    def solve(lo, hi):
        if hi - lo <= _DIRECT_BLOCK:
            for n in range(lo, hi):
                if n > lo:
                    acc[n] += w[n - lo:0:-1] @ H[lo:n]
                step(n)
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        _add_block(acc, H, w, lo, mid, hi)
        solve(mid, hi)

    solve(0, nt + 1)
    assert np.all(omega[:, 0] == 0.0) and np.all(omega[:, -1] == wall)
    assert np.all(omega[0] == 0.0)
    return Field(grid=grid, values=omega, scheme=scheme)
