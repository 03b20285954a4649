"""Special-function substrate: Gamma, Bessel J0/J1/J2, Bessel zeros and the
generalized G-function of Lorenzo and Hartley.

Gamma and the low-order Bessel functions are thin wrappers over
:mod:`scipy.special`; the zero finder and the G-function series are local.
All array-valued helpers broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from fracflow.errors import (
    BracketError,
    CancellationError,
    ConvergenceConditionError,
    ParameterError,
    PoleError,
)

#: indicator above which a double-precision series result is discarded
CANCELLATION_LIMIT = 1e12
#: hard cap on the number of G-function terms
G_MAX_TERMS = 10_000


class CompensatedSum:
    """Running Neumaier (improved Kahan) sum, elementwise over an array."""

    def __init__(self, shape=()):
        self._s = np.zeros(shape)
        self._c = np.zeros(shape)

    def add(self, x) -> None:
        x = np.asarray(x, dtype=float)
        t = self._s + x
        big = np.abs(self._s) >= np.abs(x)
        self._c = self._c + np.where(big, (self._s - t) + x, (x - t) + self._s)
        self._s = t

    @property
    def value(self) -> np.ndarray:
        return self._s + self._c


def _is_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x):
    """Gamma function; raises :class:`PoleError` at nonpositive integers."""
    arr = np.asarray(x, dtype=float)
    if np.any((arr <= 0) & (arr == np.floor(arr))):
        raise PoleError(f"gamma has a pole at nonpositive integer argument {x!r}")
    out = sp.gamma(arr)
    return float(out) if out.ndim == 0 else out


def reciprocal_gamma(x):
    """1/Gamma(x); entire, exactly zero at the poles of Gamma."""
    out = sp.rgamma(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def _j2_series(x: np.ndarray) -> np.ndarray:
    # ascending series; no cancellation for x < 2
    h2 = -(x * x) / 4.0
    term = x * x / 8.0
    total = term.copy()
    for k in range(1, 30):
        term = term * h2 / (k * (k + 2))
        total = total + term
    return total


def bessel_j(order: int, x):
    """Bessel function of the first kind J_order(x) for order in {0, 1, 2}.

    J2 is formed from the upward recurrence ``(2/x) J1 - J0`` except for small
    arguments, where the ascending series is used instead.
    """
    if order not in (0, 1, 2):
        raise ParameterError(f"bessel_j supports orders 0, 1, 2; got {order}")
    arr = np.asarray(x, dtype=float)
    if order == 0:
        out = sp.j0(arr)
    elif order == 1:
        out = sp.j1(arr)
    else:
        a = np.abs(arr)
        small = a < 2.0
        safe = np.where(small, 1.0, arr)
        out = np.where(small, _j2_series(np.where(small, arr, 0.0)),
                       2.0 / safe * sp.j1(safe) - sp.j0(safe))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ModeBasis:
    """Positive roots r_n of J1(R r) = 0 together with J2(R r_n).

    ``zeros`` are in 1/m (already divided by the radius), ``weights`` hold
    J2(R r_n). Both arrays are read-only.
    """

    radius: float
    zeros: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.zeros, self.weights):
            arr.setflags(write=False)

    @property
    def count(self) -> int:
        return len(self.zeros)

    def truncated(self, n: int) -> "ModeBasis":
        if n > self.count:
            raise ParameterError(f"basis holds {self.count} modes, {n} requested")
        return ModeBasis(self.radius, self.zeros[:n].copy(), self.weights[:n].copy())


def _mcmahon_j1(n: np.ndarray) -> np.ndarray:
    b = (n + 0.25) * np.pi
    return b - 3.0 / (8.0 * b) + 36.0 / (384.0 * b**3)


def bessel_j1_zeros(R: float, n_max: int) -> ModeBasis:
    """First ``n_max`` positive roots of J1(R r) = 0 by bracketed bisection.

    Brackets are centred on the McMahon estimate; bisection runs until the
    bracket cannot shrink further in double precision.
    """
    if not R > 0:
        raise ParameterError(f"radius must be positive, got {R}")
    if n_max < 1:
        raise ParameterError(f"n_max must be >= 1, got {n_max}")
    n = np.arange(1, n_max + 1, dtype=float)
    guess = _mcmahon_j1(n)
    half = np.where(n < 5, 0.5, 0.25)
    lo, hi = guess - half, guess + half
    flo, fhi = sp.j1(lo), sp.j1(hi)
    if np.any(np.sign(flo) == np.sign(fhi)):
        bad = int(np.argmax(np.sign(flo) == np.sign(fhi))) + 1
        raise BracketError(f"McMahon bracket for zero {bad} holds no sign change")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        fmid = sp.j1(mid)
        left = np.sign(fmid) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fmid, flo)
        hi = np.where(left, hi, mid)
    x = np.where(np.abs(flo) <= np.abs(sp.j1(hi)), lo, hi)
    if np.max(np.abs(sp.j1(x))) >= 1e-12:
        raise BracketError("bisection did not reach |J1| < 1e-12")
    return ModeBasis(float(R), x / R, np.asarray(bessel_j(2, x)))


@dataclass(frozen=True)
class GFunctionParams:
    """Parameters of G_{a,b,c}(d, t), the inverse transform of q^b/(q^a - d)^c."""

    a: float
    b: float
    c: float
    d: float
    t: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError(f"G-function order c must be positive, got {self.c}")


def _check_condition(a, b, c):
    if not a * c - b > 0:
        raise ConvergenceConditionError(
            f"G-function needs a*c - b > 0; got a={a}, b={b}, c={c}")


def g_series(a: float, b: float, c: float, d: float, t, tol: float = 1e-15,
             log_scale: float = 0.0):
    """Array form of the G-function series.

    Returns ``(value, peak, converged)``: the sum multiplied by
    ``exp(log_scale)``, the largest single-term magnitude (same scaling) and a
    boolean mask telling where the stopping rule was met. For ``a == 0`` the
    binomial j-sum is replaced by its closed form (1 - d)^(-c), which is the
    analytic continuation required when |d| >= 1. For ``a == 1`` and ``d < 0``
    Kummer's transformation is applied first, which removes the alternating
    signs.
    """
    _check_condition(a, b, c)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("G-function time must be nonnegative")
    pos = t > 0
    logt = np.log(np.where(pos, t, 1.0))

    def power(expo, logc, sign):
        # sign * exp(logc) * t**expo, with the t = 0 limit taken explicitly
        val = sign * np.exp(logc + expo * logt)
        if expo > 0:
            zero_val = 0.0
        elif expo == 0:
            zero_val = sign * math.exp(logc)
        else:
            zero_val = math.copysign(math.inf, sign)
        return np.where(pos, val, zero_val)

    if a == 0:
        if not d < 1:
            raise ConvergenceConditionError(f"a = 0 G-function needs d < 1, got {d}")
        x0 = -b
        logc = log_scale - c * math.log1p(-d) - sp.gammaln(x0)
        val = power(x0 - 1, logc, sp.gammasgn(x0))
        return val, np.abs(val), np.ones(t.shape, dtype=bool)

    if a == 1 and d < 0:
        return _g_kummer(b, c, d, t, pos, power, tol, log_scale)

    total = CompensatedSum(t.shape)
    peak = np.zeros(t.shape)
    streak = np.zeros(t.shape, dtype=int)
    prev = np.full(t.shape, np.inf)
    use_ratio = a > 0
    ta = np.where(pos, np.exp(a * logt), 0.0) if use_ratio else None
    term = None
    log_abs_d = math.log(abs(d)) if d != 0 else -math.inf
    converged = np.zeros(t.shape, dtype=bool)
    for j in range(G_MAX_TERMS):
        x = (c + j) * a - b
        pole = _is_pole(x)
        if j == 0 or not use_ratio or term is None:
            if pole:
                term = np.zeros(t.shape)
            else:
                logc = (log_scale + (j * log_abs_d if j else 0.0) + sp.gammaln(c + j) - sp.gammaln(c)
                        - sp.gammaln(j + 1.0) - sp.gammaln(x))
                sign = (1.0 if d >= 0 or j % 2 == 0 else -1.0) * sp.gammasgn(x)
                term = power(x - 1, logc, sign) if (j == 0 or d != 0) else np.zeros(t.shape)
        else:
            x_prev = x - a
            ratio = d * (c + j - 1) / j * math.exp(sp.gammaln(x_prev) - sp.gammaln(x))
            ratio *= sp.gammasgn(x_prev) * sp.gammasgn(x)
            with np.errstate(over="ignore", invalid="ignore"):
                term = term * (ratio * ta)
        mag = np.abs(term)
        if not np.all(np.isfinite(mag)):
            # overflow: the series is unusable in double precision here
            converged = (streak >= 3) & np.isfinite(mag)
            break
        total.add(term)
        peak = np.maximum(peak, mag)
        if d == 0:
            converged = np.ones(t.shape, dtype=bool)
            break
        if pole:
            continue
        small = (mag <= tol * np.abs(total.value)) & (mag <= prev)
        streak = np.where(small, streak + 1, 0)
        prev = mag
        if j >= 2 and np.all(streak >= 3):
            converged = np.ones(t.shape, dtype=bool)
            break
    else:
        converged = streak >= 3
    return total.value, peak, converged


def _g_kummer(b, c, d, t, pos, power, tol, log_scale):
    # a = 1: G = t^(x-1)/Gamma(x) 1F1(c; x; d t) with x = c - b. Kummer's
    # transformation 1F1(c; x; z) = e^z 1F1(-b; x; -z) gives nonnegative
    # terms for b <= 0 and d < 0, so no cancellation.
    x = c - b
    pre = power(x - 1, log_scale - sp.gammaln(x), sp.gammasgn(x)) * np.exp(d * t)
    z = -d * t
    term = np.ones(t.shape)
    total = CompensatedSum(t.shape)
    total.add(term)
    peak = np.ones(t.shape)
    streak = np.zeros(t.shape, dtype=int)
    prev = np.ones(t.shape)
    converged = np.zeros(t.shape, dtype=bool)
    for j in range(1, G_MAX_TERMS):
        term = term * ((-b + j - 1) / ((x + j - 1) * j)) * z
        mag = np.abs(term)
        total.add(term)
        peak = np.maximum(peak, mag)
        small = (mag <= tol * np.abs(total.value)) & (mag <= prev)
        streak = np.where(small, streak + 1, 0)
        prev = mag
        if j >= 2 and np.all(streak >= 3):
            converged = np.ones(t.shape, dtype=bool)
            break
    else:
        converged = streak >= 3
    scale = np.abs(pre)
    return pre * total.value, scale * peak, converged | ~pos


def cancellation_indicator(value, peak):
    """Ratio of the largest partial term to the result (1 when both vanish)."""
    value = np.abs(np.asarray(value, dtype=float))
    peak = np.asarray(peak, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ind = np.where(value > 0, peak / value, np.where(peak > 0, np.inf, 1.0))
    return np.maximum(ind, 1.0)


def g_function(p: GFunctionParams, tol: float = 1e-14):
    """Evaluate G_{a,b,c}(d, t) and its cancellation indicator.

    Returns ``(value, indicator)``. Raises :class:`CancellationError` if the
    indicator exceeds ``CANCELLATION_LIMIT`` or the series failed to settle
    within ``G_MAX_TERMS`` terms.
    """
    if not 0 < tol <= 1e-3:
        raise ParameterError(f"tol must lie in (0, 1e-3], got {tol}")
    value, peak, ok = g_series(p.a, p.b, p.c, p.d, p.t, tol)
    value = float(value)
    ind = float(cancellation_indicator(value, peak))
    if not ok:
        raise CancellationError(f"G-function series did not converge for {p}")
    if ind > CANCELLATION_LIMIT:
        raise CancellationError(f"G-function cancellation indicator {ind:.3g} for {p}")
    return value, ind
