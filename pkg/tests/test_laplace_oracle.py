import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracflow import FlowConfig, FluidParams, velocity, velocity_newtonian, velocity_sgf
from fracflow.errors import InversionError, ParameterError
from fracflow.laplace_oracle import (
    fractional_kernel_transform,
    shear_transform,
    shear_via_inversion,
    stehfest_invert,
    stehfest_weights,
    stehfest_working_digits,
    velocity_transform,
    velocity_transform_hankel,
    velocity_transform_mode,
    velocity_transform_parts,
    velocity_via_inversion,
)
from fracflow.special_functions import GFunctionParams, g_function


# -- Stehfest ----------------------------------------------------------------------

def test_weights_sum_to_zero():
    for N in (8, 12, 14, 20):
        V = stehfest_weights(N)
        assert abs(V.sum()) < 1e-6 * np.abs(V).sum()


def test_working_digits():
    assert stehfest_working_digits(14) == 0
    assert stehfest_working_digits(20) > 20


def test_exponential_pair():
    assert stehfest_invert(lambda q: 1 / (q + 1), 1.0, 14) == pytest.approx(math.exp(-1), abs=1e-6)


def test_ramp_pair():
    assert abs(stehfest_invert(lambda q: 1 / q**2, 2.0, 14) / 2 - 1) < 1e-8


def test_ramp_pair_extended_order():
    assert abs(stehfest_invert(lambda q: 1 / q**2, 2.0, 20) / 2 - 1) < 1e-8


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_g_pair(t):
    inv = stehfest_invert(lambda q: q**-0.5 / (q**0.5 + 1), t, 14)
    ref = g_function(GFunctionParams(0.5, -0.5, 1.0, -1.0, t))[0]
    assert inv == pytest.approx(ref, rel=1e-4)


def test_vectorised_times():
    t = np.array([0.5, 1.0, 3.0])
    np.testing.assert_allclose(stehfest_invert(lambda q: 1 / (q + 2), t, 16), np.exp(-2 * t),
                               atol=1e-5)


@pytest.mark.parametrize("t,N", [(0.0, 14), (-1.0, 14), (1.0, 13), (1.0, 6), (1.0, 22)])
def test_stehfest_rejects(t, N):
    with pytest.raises(InversionError):
        stehfest_invert(lambda q: 1 / q, t, N)


# -- transforms --------------------------------------------------------------------

def test_mode_transform_newtonian(fc, basis50):
    fp = FluidParams(nu=1.3, alpha=0.0)
    x = basis50.zeros[2]
    j2 = basis50.weights[2]
    q = 2.5
    ref = fc.Omega * fc.R**2 * x * j2 * fp.nu / (q * q * (q + fp.nu * x * x))
    assert velocity_transform_mode(fp, fc, x, q) == pytest.approx(ref, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 50), st.floats(0.1, 5), st.floats(0, 3), st.floats(0.05, 1.0),
       st.integers(0, 20))
def test_mode_transform_decomposition(q, nu, alpha, beta, n):
    fc = FlowConfig()
    from fracflow import bessel_j1_zeros
    x = bessel_j1_zeros(1.0, n + 1).zeros[n]
    fp = FluidParams(nu=nu, alpha=alpha, beta=beta)
    whole = velocity_transform_mode(fp, fc, x, q)
    parts = velocity_transform_parts(fp, fc, x, q)
    assert sum(parts) == pytest.approx(whole, rel=1e-12, abs=1e-300)


def test_mode_transform_desk_value(fc, basis50):
    fp = FluidParams(nu=1.0, alpha=1.0, beta=0.5)
    x, j2 = basis50.zeros[0], basis50.weights[0]
    q = 2.0
    direct = x * j2 * (1 + q**0.5) / (q * q * (q + x * x * q**0.5 + x * x))
    assert velocity_transform_mode(fp, fc, x, q) == pytest.approx(direct, rel=1e-14)
    assert sum(velocity_transform_parts(fp, fc, x, q)) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("q", [0.5, 1.0, 10.0])
def test_transform_boundary(fc, basis50, frac, q):
    assert velocity_transform(frac, fc, basis50, fc.R, q) == pytest.approx(
        fc.R * fc.Omega / q**2, rel=1e-12)


def test_single_mode_transform(basis50):
    fc = FlowConfig(n_modes=1)
    fp = FluidParams(nu=1.0, alpha=0.0)
    r, q = 0.4, 3.0
    x, j2 = basis50.zeros[0], basis50.weights[0]
    from fracflow.special_functions import bessel_j
    expected = r / q**2 + 2 * bessel_j(1, r * x) / j2**2 * (
        sum(velocity_transform_parts(fp, fc, x, q)) - velocity_transform_parts(fp, fc, x, q)[0])
    assert velocity_transform(fp, fc, basis50, r, q) == pytest.approx(expected, rel=1e-12)


def test_hankel_resummation(fc, basis50, frac):
    a = velocity_transform(frac, fc, basis50, 0.5, 3.0)
    b = velocity_transform_hankel(frac, fc, basis50, 0.5, 3.0)
    assert a == pytest.approx(b, rel=1e-8)


def test_shear_transform_newtonian(fc, basis50):
    from fracflow.special_functions import bessel_j
    fp = FluidParams(nu=1.0, alpha=0.0, rho=2.0)
    r, q = 0.6, 1.7
    x, j2 = basis50.zeros, basis50.weights
    ref = np.sum(2 * fp.rho * fc.Omega * bessel_j(2, r * x) / (x * x * j2)
                 * (1 / q - 1 / (q + fp.nu * x * x)))
    assert shear_transform(fp, fc, basis50, r, q) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_shear_two_assemblies(basis50, seed):
    rng = np.random.default_rng(seed)
    fp = FluidParams(nu=rng.uniform(0.2, 2), alpha=rng.uniform(0.05, 0.5),
                     rho=rng.uniform(0.5, 2), beta=rng.uniform(0.2, 0.9))
    fc = FlowConfig(n_modes=6)
    r = rng.uniform(0.1, 1.0)
    # the expanded form needs c/q + A q^(beta-1) < 0.9 for every mode
    x6 = basis50.zeros[5]
    q = 1.0
    while fp.nu * x6**2 / q + fp.alpha * x6**2 * q ** (fp.beta - 1) >= 0.5:
        q *= 2
    a = shear_transform(fp, fc, basis50, r, q, assembly="derivative")
    b = shear_transform(fp, fc, basis50, r, q, assembly="expanded")
    assert a == pytest.approx(b, rel=1e-9)


def test_shear_transform_large_q_bound(basis50, frac):
    # the truncated sum decays at least like q^(beta-2) over a decade
    fc = FlowConfig(n_modes=50)
    s3 = shear_transform(frac, fc, basis50, 0.5, 1e3)
    s4 = shear_transform(frac, fc, basis50, 0.5, 1e4)
    assert abs(s4 / s3) <= 10.0 ** (frac.beta - 2)


def test_shear_transform_large_q_slope_single_mode(basis50, frac):
    # while alpha x^2 q^beta dominates q a single mode decays like q^(beta-2)
    fc = FlowConfig(n_modes=1)
    s3 = shear_transform(frac, fc, basis50, 0.5, 1e3)
    s4 = shear_transform(frac, fc, basis50, 0.5, 1e4)
    assert math.log10(s4 / s3) == pytest.approx(frac.beta - 2, abs=0.06)


def test_shear_transform_rejects_axis(fc, basis50, frac):
    with pytest.raises(ParameterError):
        shear_transform(frac, fc, basis50, 0.0, 1.0)
    with pytest.raises(ParameterError):
        velocity_transform(frac, fc, basis50, 0.5, -1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 0.9), st.floats(0.05, 2.0), st.floats(0.0, 1.0))
def test_k_expansion_converges(beta, alpha, u):
    # sum_k (-c)^k q^(beta-1)/(q + A q^beta)^(k+1) -> q^(beta-1)/(q + A q^beta + c)
    c, A = 14.68, alpha * 14.68
    # admissible q: c < q + A q^beta, chosen with margin
    q = 2.0 * c * (1.0 + 4.0 * u)
    qb = q**beta
    ratio = c / (q + A * qb)
    assert ratio < 1
    lead = q ** (beta - 1) / (q + A * qb)
    partial = math.fsum(lead * (-ratio) ** k for k in range(400))
    target = fractional_kernel_transform(c, A, beta, q) * (q + c)
    assert partial == pytest.approx(target, rel=1e-12)
    # geometric tail after K terms is bounded by ratio^K
    K = 10
    partial_k = math.fsum(lead * (-ratio) ** k for k in range(K))
    assert abs(partial_k - target) <= ratio**K * lead * 1.000001 + 4 * np.spacing(target)


# -- time domain -------------------------------------------------------------------

def test_inversion_newtonian_default_order(fc, basis50):
    fp = FluidParams(nu=1.0, alpha=0.0)
    ref = velocity_newtonian(fp, fc, basis50, 0.5, 0.5)
    assert velocity_via_inversion(fp, fc, basis50, 0.5, 0.5) == pytest.approx(ref, rel=1e-6)


def test_inversion_newtonian_extended(fc, basis50):
    fp = FluidParams(nu=1.0, alpha=0.0)
    ref = velocity_newtonian(fp, fc, basis50, 0.5, 0.5)
    assert velocity_via_inversion(fp, fc, basis50, 0.5, 0.5, N=20) == pytest.approx(ref, rel=1e-6)


def test_inversion_second_grade(fc, basis50):
    fp = FluidParams(nu=1.0, alpha=1.0, beta=1.0)
    r, t = np.array([0.25, 0.5, 0.75]), np.array([0.1, 0.5, 1.0, 2.0])
    np.testing.assert_allclose(velocity_via_inversion(fp, fc, basis50, r, t),
                               velocity_sgf(fp, fc, basis50, r, t), rtol=1e-5)


def test_inversion_rejects_t0(fc, basis50, frac):
    with pytest.raises(InversionError):
        velocity_via_inversion(frac, fc, basis50, 0.5, 0.0)


def test_inversion_boundary(fc, basis50, frac):
    t = np.array([0.3, 1.0])
    v = velocity_via_inversion(frac, fc, basis50, 1.0, t, N=20)
    np.testing.assert_allclose(v[0], t, rtol=1e-8)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("alpha", [0.2, 1.0])
def test_order_consistency(fc, basis50, grid4, beta, alpha):
    fp = FluidParams(nu=1.0, alpha=alpha, beta=beta)
    r, t = grid4
    r = r[:3]
    for fn in (velocity_via_inversion, shear_via_inversion):
        a = fn(fp, fc, basis50, r, t, N=12)
        b = fn(fp, fc, basis50, r, t, N=16)
        assert np.max(np.abs(a / b - 1)) < 1e-3


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("alpha", [0.2, 1.0])
def test_oracle_agrees_with_series(fc, basis50, grid4, beta, alpha):
    fp = FluidParams(nu=1.0, alpha=alpha, beta=beta)
    r, t = grid4
    ref = velocity_via_inversion(fp, fc, basis50, r, t, N=20)
    np.testing.assert_allclose(velocity(fp, fc, basis50, r, t), ref, rtol=1e-4)
