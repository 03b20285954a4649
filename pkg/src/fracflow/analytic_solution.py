"""Series solutions for the rotating-cylinder problem.

Every field is written as a mode sum

    velocity(r, t) = Omega r t + sum_n J1(r x_n) / J2(R x_n) * u_n(t)
    stress(r, t)   =            sum_n J2(r x_n) / J2(R x_n) * sigma_n(t)

where x_n are the roots of J1(R x) = 0. The mode functions u_n and sigma_n do
not depend on r, so they are computed once per time grid and reused for every
radius.

For alpha > 0 the non-Newtonian part of each mode is an alternating double
series in t whose terms grow roughly like exp(lambda_n t) before they decay.
Each (mode, time) pair is evaluated by the series when its cancellation
indicator stays below ``SERIES_INDICATOR_LIMIT``, and by Gaver-Stehfest
inversion of that mode's transform otherwise. The choice made for every entry is
reported in :class:`FieldProfile`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln, logsumexp

from fracflow.errors import ParameterError, ParameterRegimeError, QuadratureError
from fracflow.laplace_oracle import (
    fractional_kernel_transform,
    mode_sum,
    shear_mode_kernel,
    stehfest_invert,
)
from fracflow.params import FlowConfig, FluidParams
from fracflow.special_functions import (
    CANCELLATION_LIMIT,
    CompensatedSum,
    GFunctionParams,
    ModeBasis,
    bessel_j,
    cancellation_indicator,
    g_series,
)

__all__ = [
    "FieldProfile",
    "FlowConfig",
    "FluidParams",
    "ModeFunctions",
    "mode_convolution",
    "shear",
    "shear_field",
    "shear_modes",
    "shear_newtonian",
    "shear_sgf",
    "velocity",
    "velocity_field",
    "velocity_modes",
    "velocity_newtonian",
    "velocity_sgf",
]

SERIES = "series"
FALLBACK = "oracle-fallback"
MIXED = "mixed"

#: series results are kept only below this cancellation indicator. Each term
#: carries ~1e-13 relative roundoff from long inner recurrences, so this keeps
#: the series error near 1e-7; CANCELLATION_LIMIT is the hard ceiling.
SERIES_INDICATOR_LIMIT = 1e6
# series attempted only while the estimated growth lambda*t stays below this
_GROWTH_CUTOFF = math.log(SERIES_INDICATOR_LIMIT) + 3.0
# exp(-c (t - s)) < exp(-_LAYER) is treated as its own quadrature segment
_LAYER = 40.0
_GL_ORDER = 16
_MAX_DOUBLINGS = 12
_INNER_TOL = 1e-16


@dataclass(frozen=True)
class FieldProfile:
    """Sampled velocity or stress on an (r, t) grid with per-entry diagnostics.

    ``values``, ``cancellation`` and ``method`` all have shape
    ``(len(r_samples), len(t_samples))``. ``tail`` is a per-radius bound on the
    magnitude of the neglected modes (it ignores their sign oscillation).
    """

    r_samples: np.ndarray
    t_samples: np.ndarray
    values: np.ndarray
    kind: str
    cancellation: np.ndarray
    method: np.ndarray
    tail: np.ndarray

    def __post_init__(self):
        shape = (len(self.r_samples), len(self.t_samples))
        if self.values.shape != shape:
            raise ParameterError(f"values shape {self.values.shape} != {shape}")


@dataclass
class ModeFunctions:
    """r-independent mode functions on a time grid, shape (n_modes, n_times)."""

    t: np.ndarray
    values: np.ndarray
    indicator: np.ndarray
    series: np.ndarray

    def column_method(self) -> np.ndarray:
        """Per-time tag: series (every mode), oracle-fallback (none) or mixed."""
        n_series = self.series.sum(axis=0)
        tags = np.full(n_series.shape, MIXED, dtype=object)
        tags[n_series == self.series.shape[0]] = SERIES
        tags[n_series == 0] = FALLBACK
        return tags.astype(str)

    def column_indicator(self) -> np.ndarray:
        """Largest indicator among the series evaluations actually used (1 if none)."""
        return np.where(self.series, self.indicator, 1.0).max(axis=0)


# -- quadrature --------------------------------------------------------------------

@lru_cache(maxsize=None)
def _panel_nodes(panels: int, order: int = _GL_ORDER):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    u = (mids[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return u, wt


def _graded(u, m):
    return u**m, m * u ** (m - 1)


def _convolve(c: float, integrand, t: np.ndarray, quad_tol: float, grading: int = 4,
              panels: int = 2):
    """Integral of exp(-c (t - s)) * F(s) over [0, t] for every entry of ``t``.

    ``integrand(s)`` returns ``(F, Fpeak, ok)`` for an array of s; Fpeak is a
    pointwise magnitude bound used for the cancellation indicator. The
    interval is split where the exponential has decayed by exp(-40); a graded
    substitution s ~ u**grading removes the fractional power at s = 0.
    Composite Gauss-Legendre panels are doubled until two successive
    estimates agree to ``quad_tol``.

    Returns ``(value, peak, ok)`` arrays.
    """
    t = np.asarray(t, dtype=float)
    split = np.maximum(t - _LAYER / c, 0.0) if c > 0 else np.zeros_like(t)
    grade_b = split == 0

    def estimate(p):
        u, w = _panel_nodes(p)
        ug, jg = _graded(u, grading)
        sa = split[:, None] * ug[None, :]
        ja = split[:, None] * jg[None, :]
        span = (t - split)[:, None]
        phi = np.where(grade_b[:, None], ug[None, :], u[None, :])
        dphi = np.where(grade_b[:, None], jg[None, :], 1.0)
        sb = split[:, None] + span * phi
        jb = span * dphi
        s = np.concatenate([sa, sb], axis=1)
        jac = np.concatenate([ja, jb], axis=1) * np.concatenate([w, w])[None, :]
        f, fpk, ok = integrand(s)
        ker = np.exp(-c * (t[:, None] - s)) * jac
        return (np.sum(ker * f, axis=1), np.sum(ker * fpk, axis=1),
                np.all(ok, axis=1))

    prev, peak, ok = estimate(panels)
    cur, done = prev, np.zeros(t.shape, dtype=bool)
    for _ in range(_MAX_DOUBLINGS):
        panels *= 2
        cur, peak, ok = estimate(panels)
        done = np.abs(cur - prev) <= quad_tol * np.abs(cur) + 1e-14 * peak
        if np.all(done):
            return cur, peak, ok
        prev = cur
    return cur, peak, ok & done


def mode_convolution(c: float, g: GFunctionParams, t, quad_tol: float = 1e-9):
    """Integral over [0, t] of exp(-c (t - s)) G_{a,b,c}(d, s) ds.

    ``g.t`` is ignored; ``t`` may be a scalar or an array. Raises
    :class:`QuadratureError` if panel doubling does not settle.
    """
    lead = g.c * g.a - g.b - 1.0
    if lead < 0:
        raise ParameterError(f"leading G exponent {lead} < 0: integrand unbounded at s = 0")
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0):
        raise ParameterError("t must be >= 0")
    out = np.zeros(tt.shape)
    pos = tt > 0
    if np.any(pos):
        def integrand(s):
            v, pk, ok = g_series(g.a, g.b, g.c, g.d, s, _INNER_TOL)
            return v, pk, ok

        val, _, ok = _convolve(c, integrand, tt[pos], quad_tol, grading=_grading(lead))
        if not np.all(ok):
            raise QuadratureError(f"convolution did not converge for c={c}, {g}")
        out[pos] = val
    return float(out[0]) if np.ndim(t) == 0 else out


def _grading(lead: float) -> int:
    return 1 if float(lead).is_integer() else 4


# -- growth estimate ---------------------------------------------------------------

def _log_growth(c: float, A: float, beta: float) -> float:
    """log of lambda, the exponential growth rate of the series' term magnitudes.

    For beta < 1 lambda is the positive root of q - A q^beta - c = 0; at beta = 1
    the G-functions collapse to exponentials and lambda = 2c/(1 + A).
    """
    if beta == 1:
        return math.log(2.0 * c / (1.0 + A))
    lo = math.log(c)
    hi = max(lo, math.log(A + c) / (1.0 - beta)) + 1.0

    def f(y):
        return (1.0 - beta) * y - math.log(A + c * math.exp(-beta * y))

    if f(lo) >= 0:
        # A negligible against c^(1-beta): lambda = c
        return lo
    return brentq(f, lo, hi, xtol=1e-12)


def _series_window(c, A, beta, t):
    with np.errstate(divide="ignore"):
        lg = _log_growth(c, A, beta) + np.log(np.where(t > 0, t, 1.0))
    growth = np.exp(np.minimum(lg, 700.0))
    return (t > 0) & (growth <= _GROWTH_CUTOFF), np.exp(np.minimum(growth, 700.0))


# -- per-mode series ---------------------------------------------------------------

def _velocity_kernel_series(c: float, A: float, beta: float, t: np.ndarray, fc: FlowConfig):
    """h(t) = sum_k (-c)^k * conv(exp(-c .), G_{1-beta, -beta k - 1, k+1}(-A, .)).

    Returns ``(h, indicator, ok)``.
    """
    T = t.shape[0]
    a = 1.0 - beta
    total = CompensatedSum(T)
    peak = np.zeros(T)
    streak = np.zeros(T, dtype=int)
    prev = np.full(T, np.inf)
    ok = np.ones(T, dtype=bool)
    active = np.arange(T)
    logc = math.log(c)
    for k in range(fc.k_max + 1):
        b = -beta * k - 1.0
        order = k + 1.0
        lead = order * a - b - 1.0

        def integrand(s, b=b, order=order, k=k):
            return g_series(a, b, order, -A, s, _INNER_TOL, log_scale=k * logc)

        val, mag, qok = _convolve(c, integrand, t[active], fc.quad_tol, grading=_grading(lead))
        term = val if k % 2 == 0 else -val
        if not np.all(np.isfinite(term)):
            ok[active] = False
            break
        full = np.zeros(T)
        full[active] = term
        total.add(full)
        peak[active] = np.maximum(peak[active], mag)
        ok[active] &= qok
        part = np.abs(total.value[active])
        small = (np.abs(term) <= fc.series_tol * part) & (np.abs(term) <= prev[active])
        streak[active] = np.where(small, streak[active] + 1, 0)
        prev[active] = np.abs(term)
        active = active[streak[active] < 3]
        if active.size == 0:
            break
    ok[streak < 3] = False
    h = total.value
    return h, cancellation_indicator(h, peak), ok


class _PowerTable:
    """Rows z**0, z**1, ... of a flat array, grown on demand."""

    def __init__(self, z):
        self.z = z
        self.rows = np.ones((16, z.size))
        self.filled = 1

    def upto(self, k: int) -> np.ndarray:
        if k >= self.rows.shape[0]:
            grown = np.empty((max(2 * self.rows.shape[0], k + 1), self.z.size))
            grown[:self.filled] = self.rows[:self.filled]
            self.rows = grown
        while self.filled <= k:
            self.rows[self.filled] = self.rows[self.filled - 1] * self.z
            self.filled += 1
        return self.rows


def _double_series(c: float, A: float, beta: float, s: np.ndarray, shift: float,
                   tol: float, k_max: int, j_max: int):
    """sum_{k,j} C(k+j,k) (-c)^k (-A)^j s^p / Gamma(p+1), p = k + (1-beta)(j+1) + shift.

    Summed along anti-diagonals k + j = m; all terms of one diagonal share the
    sign (-1)^m. With z = s^beta a diagonal equals
    s^((1-beta)(m+1)+shift) * sum_k a_k z^k with positive a_k, evaluated as
    a product of rescaled coefficients with a table of powers of z
    (log-sum-exp when z > 2, where the powers could overflow). Diagonals are combined with compensation.
    Returns ``(value, peak, ok)``.
    """
    s = np.asarray(s, dtype=float)
    pos = s > 0
    logs = np.log(np.where(pos, s, 1.0))
    z = np.where(pos, s, 0.0) ** beta
    horner = not np.any(z > 2.0)
    powers = _PowerTable(z.ravel())
    lnc, lnA = math.log(c), math.log(A)
    total = CompensatedSum(s.shape)
    peak = np.zeros(s.shape)
    streak = np.zeros(s.shape, dtype=int)
    prev = np.full(s.shape, np.inf)
    for m in range(k_max + j_max + 1):
        ks = np.arange(max(0, m - j_max), min(m, k_max) + 1)
        js = m - ks
        expo = ks + (1.0 - beta) * (js + 1) + shift
        coef = (gammaln(m + 1.0) - gammaln(ks + 1.0) - gammaln(js + 1.0)
                + ks * lnc + js * lnA - gammaln(expo + 1.0))
        base = (1.0 - beta) * (m + 1) + shift
        if horner:
            top = coef.max()
            zp = powers.upto(ks[-1])
            poly = (np.exp(coef - top) @ zp[ks[0]:ks[-1] + 1]).reshape(s.shape)
            with np.errstate(divide="ignore"):
                diag = np.where(pos, np.exp(top + base * logs + np.log(poly)), 0.0)
        else:
            lt = coef.reshape((-1,) + (1,) * s.ndim) \
                + (beta * ks + base).reshape((-1,) + (1,) * s.ndim) * logs[None]
            diag = np.where(pos, np.exp(logsumexp(lt, axis=0)), 0.0)
        if not np.all(np.isfinite(diag)):
            return total.value, np.full(s.shape, np.inf), np.zeros(s.shape, dtype=bool)
        total.add(-diag if m % 2 else diag)
        peak = np.maximum(peak, diag)
        small = (diag <= tol * np.abs(total.value)) & (diag <= prev)
        streak = np.where(small, streak + 1, 0)
        prev = diag
        if m >= 2 and np.all(streak >= 3):
            return total.value, peak, np.ones(s.shape, dtype=bool)
    return total.value, peak, streak >= 3


def _shear_kernel_series(fp: FluidParams, fc: FlowConfig, x: float, t: np.ndarray):
    """Non-Newtonian part of sigma_n(t) for beta < 1, as three blocks.

    Returns ``(value, indicator, ok)``.
    """
    beta, Om = fp.beta, fc.Omega
    c, A = fp.nu * x * x, fp.alpha * x * x
    mu, a1 = fp.mu, fp.alpha1
    g1, g1_peak, g1_ok = g_series(1.0, beta - 1.0, 1.0, -c, t, _INNER_TOL)

    def integrand(s):
        f, fpk, fok = _double_series(c, A, beta, s, 0.0, _INNER_TOL, fc.k_max, fc.j_max)
        psi, ppk, pok = _double_series(c, A, beta, s, 1.0 - beta, _INNER_TOL,
                                       fc.k_max, fc.j_max)
        return mu * f - c * a1 * psi, mu * fpk + c * a1 * ppk, fok & pok

    conv, conv_peak, conv_ok = _convolve(c, integrand, t, fc.quad_tol)
    psi_t, psi_peak, psi_ok = _double_series(c, A, beta, t, 1.0 - beta, _INNER_TOL,
                                             fc.k_max, fc.j_max)
    scale = 2.0 * fp.alpha * Om * x * x
    value = 2.0 * a1 * Om * g1 - scale * (conv + a1 * psi_t)
    peak = np.maximum.reduce([2.0 * a1 * Om * g1_peak, scale * conv_peak,
                              scale * a1 * psi_peak])
    return value, cancellation_indicator(value, peak), g1_ok & conv_ok & psi_ok


# -- mode functions ----------------------------------------------------------------

def _modes(fc: FlowConfig, basis: ModeBasis):
    if basis.count < fc.n_modes:
        raise ParameterError(f"basis has {basis.count} modes, config needs {fc.n_modes}")
    if not math.isclose(basis.radius, fc.R, rel_tol=1e-15):
        raise ParameterError("mode basis was built for a different radius")
    return basis.zeros[:fc.n_modes], basis.weights[:fc.n_modes]


def _times(t) -> np.ndarray:
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if tt.ndim != 1 or np.any(~(tt >= 0)):
        raise ParameterError("times must be a 1-d collection of values >= 0")
    return tt


def _run_modes(jobs, workers):
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: job(), jobs))
    return [job() for job in jobs]


def _mixed(series_fn, fallback_fn, c_arr, A_arr, beta, t, method, workers):
    """Evaluate per-mode corrections by series where admissible, else by inversion."""
    n, T = len(c_arr), len(t)
    values = np.zeros((n, T))
    indicator = np.ones((n, T))
    used = np.zeros((n, T), dtype=bool)
    used[:, t == 0] = True
    windows = []
    for i in range(n):
        win, est = _series_window(c_arr[i], A_arr[i], beta, t)
        if method == "series":
            win = t > 0
        elif method == "oracle":
            win = np.zeros(T, dtype=bool)
        indicator[i] = np.where(t > 0, est, 1.0)
        windows.append(win)

    def job(i):
        win = windows[i]
        if not win.any():
            return i, None
        return i, series_fn(i, t[win])

    results = _run_modes([lambda i=i: job(i) for i in range(n)], workers)
    for i, res in results:
        if res is None:
            continue
        val, ind, ok = res
        idx = np.flatnonzero(windows[i])
        good = ok & (ind <= min(SERIES_INDICATOR_LIMIT, CANCELLATION_LIMIT))
        if method == "series":
            good = np.ones_like(good)
        values[i, idx[good]] = val[good]
        indicator[i, idx] = ind
        used[i, idx[good]] = True
    need = (~used) & (t[None, :] > 0)
    if need.any():
        cols = np.flatnonzero(need.any(axis=0))
        inv = fallback_fn(t[cols])
        if not np.all(np.isfinite(inv[need[:, cols]])):
            raise ParameterRegimeError(
                "series rejected by its cancellation check and inversion gave non-finite values")
        values[:, cols] = np.where(need[:, cols], inv, values[:, cols])
    return values, indicator, used


def velocity_modes(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, t,
                   method: str = "auto", workers: int | None = None) -> ModeFunctions:
    """Velocity mode functions u_n(t) for every mode and time.

    ``method`` is ``"auto"`` (series with per-entry fallback), ``"series"``
    (series everywhere, no fallback; diagnostic use) or ``"oracle"``
    (inversion for every non-Newtonian part).
    """
    x, _ = _modes(fc, basis)
    tt = _times(t)
    c_arr = fp.nu * x * x
    newton = -2.0 * fc.Omega / (fp.nu * x[:, None] ** 3) * -np.expm1(-np.outer(c_arr, tt))
    if fp.alpha == 0:
        ones = np.ones(newton.shape)
        return ModeFunctions(tt, newton, ones, ones.astype(bool))
    A_arr = fp.alpha * x * x

    def series_fn(i, ts):
        return _velocity_kernel_series(c_arr[i], A_arr[i], fp.beta, ts, fc)

    def fallback_fn(ts):
        return stehfest_invert(
            lambda q: fractional_kernel_transform(c_arr[:, None, None], A_arr[:, None, None],
                                                  fp.beta, q[None]),
            ts, fc.stehfest_n)

    corr, ind, used = _mixed(series_fn, fallback_fn, c_arr, A_arr, fp.beta, tt, method, workers)
    values = newton + 2.0 * fp.alpha * fc.Omega * x[:, None] * corr
    return ModeFunctions(tt, values, ind, used)


def shear_modes(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, t,
                method: str = "auto", workers: int | None = None) -> ModeFunctions:
    """Stress mode functions sigma_n(t) for 0 < beta < 1 (see :func:`velocity_modes`)."""
    x, _ = _modes(fc, basis)
    tt = _times(t)
    c_arr = fp.nu * x * x
    newton = 2.0 * fp.rho * fc.Omega / (x[:, None] ** 2) * -np.expm1(-np.outer(c_arr, tt))
    if fp.alpha == 0:
        ones = np.ones(newton.shape)
        return ModeFunctions(tt, newton, ones, ones.astype(bool))
    if fp.beta == 1:
        raise ParameterError("beta = 1 stress is evaluated in closed form by shear_sgf")
    A_arr = fp.alpha * x * x

    def series_fn(i, ts):
        return _shear_kernel_series(fp, fc, x[i], ts)

    def fallback_fn(ts):
        return stehfest_invert(
            lambda q: shear_mode_kernel(fp, fc, x[:, None, None], q[None], newtonian=False),
            ts, fc.stehfest_n)

    corr, ind, used = _mixed(series_fn, fallback_fn, c_arr, A_arr, fp.beta, tt, method, workers)
    return ModeFunctions(tt, newton + corr, ind, used)


# -- public evaluators ---------------------------------------------------------------

def _radii(fc: FlowConfig, r) -> np.ndarray:
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rr < 0) or np.any(rr > fc.R * (1 + 1e-15)):
        raise ParameterError(f"radii must lie in [0, R={fc.R}]")
    return rr


def _shape_out(out, r, t):
    if np.ndim(r) == 0 and np.ndim(t) == 0:
        return float(out[0, 0])
    return out


def _velocity_assemble(fc, basis, rr, modes: ModeFunctions):
    x, j2R = _modes(fc, basis)
    w = bessel_j(1, np.outer(rr, x)) / j2R
    return fc.Omega * np.outer(rr, modes.t) + mode_sum(w, modes.values)


def _shear_assemble(fc, basis, rr, modes: ModeFunctions):
    x, j2R = _modes(fc, basis)
    w = bessel_j(2, np.outer(rr, x)) / j2R
    return mode_sum(w, modes.values)


def _sgf_modes(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, tt, kind: str):
    x, _ = _modes(fc, basis)
    c = fp.nu * x * x
    A = fp.alpha * x * x
    slow = np.outer(c / (1.0 + A), tt)
    if kind == "velocity":
        vals = -2.0 * fc.Omega / (fp.nu * x[:, None] ** 3) * -np.expm1(-slow)
    else:
        vals = 2.0 * fp.rho * fc.Omega / (x[:, None] ** 2) * (
            1.0 - np.exp(-slow) / (1.0 + A[:, None]))
    ones = np.ones(vals.shape)
    return ModeFunctions(tt, vals, ones, ones.astype(bool))


def velocity_newtonian(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t):
    """Newtonian velocity (alpha ignored)."""
    rr, tt = _radii(fc, r), _times(t)
    modes = velocity_modes(fp.replace(alpha=0.0), fc, basis, tt)
    return _shape_out(_velocity_assemble(fc, basis, rr, modes), r, t)


def velocity(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t,
             workers: int | None = None):
    """Velocity of the generalized fluid; Newtonian part plus fractional correction."""
    rr, tt = _radii(fc, r), _times(t)
    modes = velocity_modes(fp, fc, basis, tt, workers=workers)
    return _shape_out(_velocity_assemble(fc, basis, rr, modes), r, t)


def velocity_sgf(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t):
    """Closed-form velocity of the ordinary second grade fluid (beta taken as 1)."""
    rr, tt = _radii(fc, r), _times(t)
    modes = _sgf_modes(fp, fc, basis, tt, "velocity")
    return _shape_out(_velocity_assemble(fc, basis, rr, modes), r, t)


def shear_newtonian(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t):
    """Newtonian shear stress (alpha ignored)."""
    rr, tt = _radii(fc, r), _times(t)
    modes = shear_modes(fp.replace(alpha=0.0), fc, basis, tt)
    return _shape_out(_shear_assemble(fc, basis, rr, modes), r, t)


def shear(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t,
          workers: int | None = None):
    """Shear stress of the generalized fluid; beta = 1 is routed to :func:`shear_sgf`."""
    if fp.beta == 1 and fp.alpha > 0:
        return shear_sgf(fp, fc, basis, r, t)
    rr, tt = _radii(fc, r), _times(t)
    modes = shear_modes(fp, fc, basis, tt, workers=workers)
    return _shape_out(_shear_assemble(fc, basis, rr, modes), r, t)


def shear_sgf(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t):
    """Closed-form shear stress of the ordinary second grade fluid (beta taken as 1)."""
    rr, tt = _radii(fc, r), _times(t)
    modes = _sgf_modes(fp, fc, basis, tt, "stress")
    return _shape_out(_shear_assemble(fc, basis, rr, modes), r, t)


# -- profiles ------------------------------------------------------------------------

def _tail(fp, fc, basis, rr, kind):
    x, _ = _modes(fc, basis)
    xn = x[-1]
    with np.errstate(divide="ignore"):
        amp = np.where(rr > 0, np.sqrt(fc.R / np.where(rr > 0, rr, 1.0)), 0.0)
    if kind == "velocity":
        return amp * fc.Omega * fc.R / (math.pi * fp.nu * xn * xn)
    return amp * 2.0 * fp.rho * fc.Omega * fc.R / (math.pi * xn)


def _profile(fp, fc, basis, r_samples, t_samples, kind, modes, assemble):
    rr = _radii(fc, r_samples)
    vals = assemble(fc, basis, rr, modes)
    shape = vals.shape
    return FieldProfile(
        r_samples=rr, t_samples=modes.t, values=vals, kind=kind,
        cancellation=np.broadcast_to(modes.column_indicator(), shape).copy(),
        method=np.broadcast_to(modes.column_method(), shape).copy(),
        tail=_tail(fp, fc, basis, rr, kind),
    )


def velocity_field(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r_samples, t_samples,
                   workers: int | None = None) -> FieldProfile:
    """Velocity on the grid r_samples x t_samples with diagnostics."""
    modes = velocity_modes(fp, fc, basis, t_samples, workers=workers)
    return _profile(fp, fc, basis, r_samples, t_samples, "velocity", modes, _velocity_assemble)


def shear_field(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r_samples, t_samples,
                workers: int | None = None) -> FieldProfile:
    """Shear stress on the grid r_samples x t_samples with diagnostics."""
    tt = _times(t_samples)
    if fp.beta == 1 and fp.alpha > 0:
        modes = _sgf_modes(fp, fc, basis, tt, "stress")
    else:
        modes = shear_modes(fp, fc, basis, tt, workers=workers)
    return _profile(fp, fc, basis, r_samples, t_samples, "stress", modes, _shear_assemble)
