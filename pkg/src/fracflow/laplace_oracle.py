"""Laplace-domain solutions and their Gaver-Stehfest inversion.

Everything here works with real q > 0 only. Powers q**beta are formed as
exp(beta*log q). Time-domain results come from inverting each mode's
transform separately and then summing the modes.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np

from fracflow.errors import InversionError, ParameterError
from fracflow.params import FlowConfig, FluidParams
from fracflow.special_functions import CompensatedSum, ModeBasis, bessel_j


@lru_cache(maxsize=None)
def _stehfest_weights_exact(N: int) -> tuple:
    half = N // 2
    weights = []
    for i in range(1, N + 1):
        acc = Fraction(0)
        for k in range((i + 1) // 2, min(i, half) + 1):
            num = k**half * math.factorial(2 * k)
            den = (math.factorial(half - k) * math.factorial(k) * math.factorial(k - 1)
                   * math.factorial(i - k) * math.factorial(2 * k - i))
            acc += Fraction(num, den)
        weights.append((-1) ** (half + i) * acc)
    return tuple(weights)


def stehfest_weights(N: int) -> np.ndarray:
    """Gaver-Stehfest weights V_1..V_N, computed in exact rational arithmetic."""
    if N % 2 or not 2 <= N <= 30:
        raise InversionError(f"Stehfest order must be even in [2, 30], got {N}")
    return np.array([float(v) for v in _stehfest_weights_exact(N)])


def stehfest_working_digits(N: int) -> int:
    """Decimal digits needed so weight cancellation leaves double-precision accuracy.

    Returns 0 (plain float64) for N <= 16.
    """
    if N <= 16:
        return 0
    spread = sum(abs(v) for v in _stehfest_weights_exact(N))
    return 20 + int(math.ceil(math.log10(float(spread))))


def stehfest_invert(F, t, N: int = 14, dps: int | None = None):
    """Invert the Laplace transform ``F`` at time(s) ``t`` > 0.

    ``F`` is called once with an array of q values of shape ``t.shape + (N,)``
    and must broadcast over it. With ``dps`` > 0 the nodes are mpmath numbers
    in an object array and the weighted sum is formed at that precision;
    ``dps=None`` picks :func:`stehfest_working_digits`. Scalar ``t`` gives a
    float, array ``t`` an array.
    """
    if N % 2 or not 8 <= N <= 20:
        raise InversionError(f"N must be even with 8 <= N <= 20, got {N}")
    tt = np.asarray(t, dtype=float)
    if np.any(~(tt > 0)):
        raise InversionError("Stehfest inversion needs t > 0; use the analytic t = 0 limit")
    if dps is None:
        dps = stehfest_working_digits(N)
    if not dps:
        V = stehfest_weights(N)
        scale = math.log(2.0) / tt
        q = scale[..., None] * np.arange(1, N + 1)
        out = scale * np.sum(V * F(q), axis=-1)
        return float(out) if out.ndim == 0 else out
    with mp.workdps(dps):
        V = [mp.mpf(v.numerator) / v.denominator for v in _stehfest_weights_exact(N)]
        ln2 = mp.log(2)
        scale = np.empty(tt.shape, dtype=object)
        for idx, ti in np.ndenumerate(tt):
            scale[idx] = ln2 / mp.mpf(float(ti))
        q = np.empty(tt.shape + (N,), dtype=object)
        for i in range(N):
            q[..., i] = scale * (i + 1)
        Fq = F(q)
        acc = Fq[..., 0] * V[0]
        for i in range(1, N):
            acc = acc + Fq[..., i] * V[i]
        out = np.asarray((scale * acc), dtype=object)
        out = np.vectorize(float, otypes=[float])(out) if out.shape else np.asarray(float(out))
    return float(out) if out.ndim == 0 else out


_mp_pow = np.frompyfunc(lambda z, b: mp.exp(b * mp.log(z)), 2, 1)


def _qpow(q, beta):
    if isinstance(q, np.ndarray) and q.dtype != object:
        return np.exp(beta * np.log(q))
    if isinstance(q, np.ndarray):
        return _mp_pow(q, beta)
    if isinstance(q, mp.mpf):
        return mp.exp(beta * mp.log(q))
    return math.exp(beta * math.log(q))


def _check_q(q):
    if np.any(~(np.asarray(q) > 0)):
        raise ParameterError("transform variable q must be > 0")


# -- per-mode transforms --------------------------------------------------------

def fractional_kernel_transform(c, A, beta, q):
    """q^(beta-1) / ((q + c)(q + A q^beta + c)), the non-Newtonian mode kernel.

    ``c`` is nu*r_n**2 and ``A`` is alpha*r_n**2; all arguments broadcast.
    """
    qb = _qpow(q, beta)
    return qb / q / ((q + c) * (q + A * qb + c))


def velocity_mode_kernel(fp: FluidParams, fc: FlowConfig, x, q):
    """Transform of the r-free velocity mode function u_n.

    omega_bar(r, q) = Omega r / q^2 + sum_n J1(r x_n)/J2(R x_n) * (this).
    """
    c = fp.nu * x * x
    A = fp.alpha * x * x
    newton = -2.0 * fc.Omega / (fp.nu * x**3) * c / (q * (q + c))
    if fp.alpha == 0:
        return newton
    return newton + 2.0 * fp.alpha * fc.Omega * x * fractional_kernel_transform(c, A, fp.beta, q)


def shear_mode_kernel(fp: FluidParams, fc: FlowConfig, x, q, newtonian: bool = True):
    """Transform of the r-free stress mode function sigma_n.

    tau_bar(r, q) = sum_n J2(r x_n)/J2(R x_n) * (this).
    """
    c = fp.nu * x * x
    A = fp.alpha * x * x
    qb = _qpow(q, fp.beta)
    out = 2.0 * fp.alpha1 * fc.Omega * qb / q / (q + c)
    if fp.alpha != 0:
        out = out - 2.0 * fp.alpha * fc.Omega * x * x * (fp.mu + fp.alpha1 * qb) \
            * fractional_kernel_transform(c, A, fp.beta, q)
    if newtonian:
        out = out + 2.0 * fp.rho * fc.Omega / (x * x) * c / (q * (q + c))
    return out


def velocity_transform_mode(fp: FluidParams, fc: FlowConfig, r1n: float, q):
    """Finite Hankel transform of omega_bar for one mode, in closed form."""
    _check_q(q)
    x, R = r1n, fc.R
    qb = _qpow(q, fp.beta)
    j2 = bessel_j(2, R * x)
    return (fc.Omega * R * R * x * j2 * (fp.nu + fp.alpha * qb)
            / (q * q * (q + fp.alpha * x * x * qb + fp.nu * x * x)))


def velocity_transform_parts(fp: FluidParams, fc: FlowConfig, r1n: float, q):
    """The three-term split of :func:`velocity_transform_mode`.

    Returns ``(rigid, newtonian, fractional)``; their sum is the full mode
    transform.
    """
    _check_q(q)
    x, R, Om = r1n, fc.R, fc.Omega
    c = fp.nu * x * x
    j2 = bessel_j(2, R * x)
    qb = _qpow(q, fp.beta)
    rigid = Om * R * R / (q * q * x) * j2
    newton = -Om * R * R * j2 / (fp.nu * x**3) * (1.0 / q - 1.0 / (q + c))
    frac = (fp.alpha * Om * R * R * x * j2 / (q + c) * qb / q
            / (q + fp.alpha * x * x * qb + c))
    return rigid, newton, frac


def _basis(fc: FlowConfig, basis: ModeBasis):
    if basis.count < fc.n_modes:
        raise ParameterError(f"basis has {basis.count} modes, config needs {fc.n_modes}")
    if not math.isclose(basis.radius, fc.R, rel_tol=1e-15):
        raise ParameterError("mode basis was built for a different radius")
    return basis.zeros[:fc.n_modes], basis.weights[:fc.n_modes]


def velocity_transform(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r: float, q):
    """omega_bar(r, q): rigid rotation plus the truncated mode sum."""
    _check_q(q)
    x, j2R = _basis(fc, basis)
    q = np.asarray(q, dtype=float)
    w = bessel_j(1, r * x) / j2R
    terms = w[:, None] * velocity_mode_kernel(fp, fc, x[:, None], q.reshape(1, -1))
    out = fc.Omega * r / (q * q) + terms.sum(axis=0).reshape(q.shape)
    return float(out) if out.ndim == 0 else out


def velocity_transform_hankel(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r: float, q):
    """omega_bar(r, q) rebuilt from the mode-space pieces by inverse Hankel weights.

    The rigid piece is inverted in closed form (Omega r / q^2); the other two
    are resummed with weights 2 J1(r x)/(R^2 J2(R x)^2).
    """
    _check_q(q)
    x, j2R = _basis(fc, basis)
    total = fc.Omega * r / (q * q)
    for xn, j2 in zip(x, j2R):
        _, newton, frac = velocity_transform_parts(fp, fc, xn, q)
        total = total + 2.0 / fc.R**2 * bessel_j(1, r * xn) / j2**2 * (newton + frac)
    return total


def _expanded_kernel_sums(c, A, beta, q, max_diag=400):
    """Double power series behind the stress transform, summed term by term.

    Returns (S1, S2) with S1 = sum B_kj q^-(k+(1-beta)(j+1)+1) and
    S2 = sum B_kj q^-(k+3+(1-beta)j-2beta), B_kj = C(k+j,k)(-c)^k(-A)^j.
    Needs c/q + A q^(beta-1) < 1.
    """
    rho = c / q + A * q ** (beta - 1)
    if rho >= 0.9:
        raise ParameterError(f"expansion not admissible: c/q + A q^(beta-1) = {rho:.3g}")
    lq = math.log(q)
    s1 = s2 = 0.0
    for m in range(max_diag):
        d1 = d2 = 0.0
        for k in range(m + 1):
            j = m - k
            logb = (math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(j + 1)
                    + (k * math.log(c) if k else 0.0) + (j * math.log(A) if j else 0.0))
            e1 = k + (1 - beta) * (j + 1) + 1
            e2 = k + 3 + (1 - beta) * j - 2 * beta
            d1 += math.exp(logb - e1 * lq)
            d2 += math.exp(logb - e2 * lq)
        sign = -1.0 if m % 2 else 1.0
        s1 += sign * d1
        s2 += sign * d2
        if d1 < 1e-18 * abs(s1) and d2 < 1e-18 * abs(s2):
            break
    return s1, s2


def shear_transform(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r: float, q,
                    assembly: str = "derivative"):
    """tau_bar(r, q) for 0 < r <= R.

    ``assembly="derivative"`` applies (mu + alpha1 q^beta) to the closed-form
    radial derivative of omega_bar; ``assembly="expanded"`` sums the
    three-block expansion in powers of 1/q term by term (scalar q only, and only
    where that expansion converges).
    """
    _check_q(q)
    if not 0 < r <= fc.R:
        raise ParameterError(f"shear transform needs 0 < r <= R, got r={r}")
    x, j2R = _basis(fc, basis)
    w2 = bessel_j(2, r * x) / j2R
    if assembly == "derivative":
        qa = np.asarray(q, dtype=float)
        c = fp.nu * x[:, None] ** 2
        A = fp.alpha * x[:, None] ** 2
        qq = qa.reshape(1, -1)
        deriv = (2.0 * fc.Omega / fp.nu / x[:, None] ** 2 * (1.0 / qq - 1.0 / (qq + c))
                 - 2.0 * fp.alpha * fc.Omega * x[:, None] ** 2
                 * fractional_kernel_transform(c, A, fp.beta, qq))
        dsum = (w2[:, None] * deriv).sum(axis=0).reshape(qa.shape)
        out = (fp.mu + fp.alpha1 * _qpow(qa, fp.beta)) * dsum
        return float(out) if out.ndim == 0 else out
    if assembly != "expanded":
        raise ParameterError(f"unknown assembly {assembly!r}")
    q = float(q)
    beta, Om = fp.beta, fc.Omega
    qb = q ** beta
    total = 0.0
    for xn, w in zip(x, w2):
        c = fp.nu * xn * xn
        A = fp.alpha * xn * xn
        block = 2 * fp.rho * Om / (xn * xn) * (1 / q - 1 / (q + c))
        block += 2 * fp.alpha1 * Om * qb / q / (q + c)
        if fp.alpha:
            s1, s2 = _expanded_kernel_sums(c, A, beta, q)
            block -= 2 * fp.alpha * Om * xn * xn * (
                (fp.mu * s1 - c * fp.alpha1 * s2) / (q + c) + fp.alpha1 * s2)
        total += w * block
    return total


# -- time domain by inversion ------------------------------------------------------

def velocity_modes_via_inversion(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, t, N=None, dps=None):
    """Stehfest-inverted velocity mode functions u_n(t), shape (n_modes, len(t))."""
    x, _ = _basis(fc, basis)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    N = N or fc.stehfest_n
    xm = x[:, None, None]
    return stehfest_invert(lambda q: velocity_mode_kernel(fp, fc, xm, q[None]), tt, N, dps)


def shear_modes_via_inversion(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, t, N=None, dps=None):
    """Stehfest-inverted stress mode functions sigma_n(t), shape (n_modes, len(t))."""
    x, _ = _basis(fc, basis)
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    N = N or fc.stehfest_n
    xm = x[:, None, None]
    return stehfest_invert(lambda q: shear_mode_kernel(fp, fc, xm, q[None]), tt, N, dps)


def _grid_or_scalar(out, r, t):
    if np.ndim(r) == 0 and np.ndim(t) == 0:
        return float(out[0, 0])
    return out


def mode_sum(weights: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """sum_n weights[i, n] * modes[n, j], accumulated with compensation."""
    acc = CompensatedSum((weights.shape[0], modes.shape[1]))
    for n in range(modes.shape[0]):
        acc.add(weights[:, n:n + 1] * modes[n][None, :])
    return acc.value


def velocity_via_inversion(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t, N=None, dps=None):
    """Velocity by numerical inversion, mode by mode.

    Scalar (r, t) gives a float; otherwise a (len(r), len(t)) array.
    """
    x, j2R = _basis(fc, basis)
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    N = N or fc.stehfest_n
    modes = velocity_modes_via_inversion(fp, fc, basis, tt, N, dps)
    rigid = stehfest_invert(lambda q: 1.0 / (q * q), tt, N, dps)
    weights = bessel_j(1, np.outer(rr, x)) / j2R
    out = fc.Omega * rr[:, None] * rigid[None, :] + mode_sum(weights, modes)
    return _grid_or_scalar(out, r, t)


def shear_via_inversion(fp: FluidParams, fc: FlowConfig, basis: ModeBasis, r, t, N=None, dps=None):
    """Shear stress by numerical inversion, mode by mode."""
    x, j2R = _basis(fc, basis)
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    modes = shear_modes_via_inversion(fp, fc, basis, tt, N, dps)
    weights = bessel_j(2, np.outer(rr, x)) / j2R
    return _grid_or_scalar(mode_sum(weights, modes), r, t)
