import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fracflow.errors import (
    CancellationError,
    ConvergenceConditionError,
    ParameterError,
    PoleError,
)
from fracflow.special_functions import (
    CompensatedSum,
    GFunctionParams,
    ModeBasis,
    bessel_j,
    bessel_j1_zeros,
    cancellation_indicator,
    g_function,
    g_series,
    gamma,
    reciprocal_gamma,
)

# mpmath: besselj(2, besseljzero(1, 1)) at 30 digits
J2_AT_FIRST_ZERO = 0.40275939570255315


# -- gamma ---------------------------------------------------------------------

@pytest.mark.parametrize("x,expected", [(1, 1.0), (5, 24.0), (0.5, 1.7724538509055160)])
def test_gamma_examples(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("x", [0, -1, -3, -170])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma(x)


@settings(max_examples=200, deadline=None)
@given(st.floats(-170.0, 170.0).filter(lambda x: abs(x - round(x)) > 1e-6 or x > 0.5))
def test_gamma_matches_mpmath(x):
    ref = mp.gamma(mp.mpf(x))
    got = gamma(x)
    if abs(ref) > 1e-300:
        assert abs(got / float(ref) - 1) <= 1e-13


@pytest.mark.parametrize("x,expected", [(1, 1.0), (0, 0.0), (-3, 0.0)])
def test_reciprocal_gamma_examples(x, expected):
    assert reciprocal_gamma(x) == expected


def test_reciprocal_gamma_vectorised():
    x = np.array([-2.0, -0.5, 0.0, 2.5])
    expected = [0.0, float(1 / mp.gamma(-0.5)), 0.0, float(1 / mp.gamma(2.5))]
    np.testing.assert_allclose(reciprocal_gamma(x), expected, rtol=1e-15)


# -- Bessel ----------------------------------------------------------------------

def test_bessel_examples():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert abs(bessel_j(1, 3.8317059702075123)) < 1e-12
    assert bessel_j(2, 0.0) == 0.0


def test_bessel_bad_order():
    with pytest.raises(ParameterError):
        bessel_j(3, 1.0)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([0, 1, 2]), st.floats(0.0, 1e4))
def test_bessel_matches_mpmath(order, x):
    # error measured against the local amplitude: a relative bound is
    # meaningless next to a zero of J
    ref = float(mp.besselj(order, x))
    scale = max(abs(ref), min(1.0, math.sqrt(2 / (math.pi * max(x, 1e-300)))))
    assert abs(bessel_j(order, x) - ref) <= 1e-12 * scale


def test_j2_small_argument_series():
    x = np.array([1e-8, 1e-5, 1e-4, 0.5, 1.99, 2.0, 2.01])
    ref = [float(mp.besselj(2, xi)) for xi in x]
    np.testing.assert_allclose(bessel_j(2, x), ref, rtol=1e-14)


def test_bessel_recurrence_random():
    rng = np.random.default_rng(3)
    x = rng.uniform(0.1, 50, 100)
    resid = 2 / x * bessel_j(1, x) - bessel_j(0, x) - bessel_j(2, x)
    assert np.max(np.abs(resid)) < 1e-11


def test_bessel_derivative_identity():
    # x J1'(x) - J1(x) + x J2(x) = 0 with J1' = J0 - J1/x
    rng = np.random.default_rng(4)
    x = rng.uniform(0.1, 50, 100)
    d1 = bessel_j(0, x) - bessel_j(1, x) / x
    resid = x * d1 - bessel_j(1, x) + x * bessel_j(2, x)
    assert np.max(np.abs(resid)) < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_bessel_moment_integral(n):
    basis = bessel_j1_zeros(1.0, 5)
    x = basis.zeros[n - 1]
    val, _ = quad(lambda r: r * r * bessel_j(1, r * x), 0.0, 1.0, epsabs=1e-14, limit=200)
    assert abs(val - basis.weights[n - 1] / x) < 1e-8


# -- zeros -----------------------------------------------------------------------

def test_zero_examples():
    b = bessel_j1_zeros(1.0, 3)
    np.testing.assert_allclose(b.zeros, [3.8317059702, 7.0155866698, 10.1734681351], atol=1e-10)
    assert bessel_j1_zeros(2.0, 1).zeros[0] == pytest.approx(1.9158529851, abs=1e-10)


def test_zeros_match_mpmath():
    b = bessel_j1_zeros(1.0, 40)
    ref = [float(mp.besseljzero(1, k)) for k in range(1, 41)]
    np.testing.assert_allclose(b.zeros, ref, rtol=4e-16, atol=0)


def test_first_weight_value_and_sign():
    b = bessel_j1_zeros(1.0, 6)
    assert b.weights[0] == pytest.approx(J2_AT_FIRST_ZERO, rel=1e-14)
    np.testing.assert_array_equal(np.sign(b.weights), [1, -1, 1, -1, 1, -1])


def test_zero_basis_invariants():
    b = bessel_j1_zeros(1.5, 2000)
    x = b.zeros * b.radius
    assert np.max(np.abs(bessel_j(1, x))) < 1e-12
    assert b.zeros[0] > 0 and np.all(np.diff(b.zeros) > 0)
    gaps = np.diff(x)[9:]
    assert np.max(np.abs(gaps - np.pi)) < 0.05
    np.testing.assert_allclose(b.weights, bessel_j(2, x), rtol=1e-14)


def test_zeros_large_count():
    b = bessel_j1_zeros(1.0, 100_000)
    assert b.count == 100_000
    assert np.max(np.abs(bessel_j(1, b.zeros))) < 1e-12


def test_basis_is_read_only_and_truncates():
    b = bessel_j1_zeros(1.0, 10)
    with pytest.raises(ValueError):
        b.zeros[0] = 1.0
    t = b.truncated(4)
    assert isinstance(t, ModeBasis) and t.count == 4
    with pytest.raises(ParameterError):
        b.truncated(11)


@pytest.mark.parametrize("R,n", [(0.0, 3), (-1.0, 3), (1.0, 0)])
def test_zeros_bad_input(R, n):
    with pytest.raises(ParameterError):
        bessel_j1_zeros(R, n)


# -- G-function ------------------------------------------------------------------

def test_g_examples():
    v, ind = g_function(GFunctionParams(1, 0, 1, -1, 1))
    assert v == pytest.approx(0.36787944117, abs=1e-11)
    assert ind >= 1
    assert g_function(GFunctionParams(0, -1, 1, -1, 2))[0] == pytest.approx(0.5, rel=1e-15)
    assert g_function(GFunctionParams(0.5, -0.5, 1, 0, 7))[0] == pytest.approx(1.0, rel=1e-15)


def test_g_parameter_checks():
    with pytest.raises(ParameterError):
        GFunctionParams(1, 0, 0, -1)
    with pytest.raises(ConvergenceConditionError):
        g_function(GFunctionParams(0.5, 1.0, 1.0, -1.0, 1.0))
    with pytest.raises(ParameterError):
        g_function(GFunctionParams(1, 0, 1, -1, 1), tol=1e-2)
    with pytest.raises(ParameterError):
        g_function(GFunctionParams(1, 0, 1, -1, -1.0))


def _g_mp(a, b, c, d, t):
    t = mp.mpf(t)
    def term(j):
        x = (c + j) * a - b
        return mp.mpf(d) ** j * mp.rf(c, j) / mp.factorial(j) * t ** (x - 1) * mp.rgamma(x)
    return mp.nsum(term, [0, mp.inf])


@pytest.mark.parametrize("a,b,c,d,t", [
    (0.5, -0.5, 1.0, -1.0, 1.0),
    (0.5, -1.5, 2.0, -3.0, 0.4),
    (0.3, -1.0, 1.0, -2.0, 0.7),
    (0.7, -2.4, 3.0, 1.5, 0.3),
    (1.0, -0.5, 1.0, -4.0, 2.0),
])
def test_g_matches_mpmath_series(a, b, c, d, t):
    with mp.workdps(40):
        ref = float(_g_mp(a, b, c, d, t))
    v, ind = g_function(GFunctionParams(a, b, c, d, t))
    assert v == pytest.approx(ref, rel=1e-12 * ind)


def test_g_positive_d_and_zero_time():
    v, _, ok = g_series(1.0, 0.0, 1.0, 2.0, np.array([0.0, 0.5]))
    assert ok.all()
    assert v[0] == 1.0 and v[1] == pytest.approx(math.exp(1.0), rel=1e-14)


def test_g_cancellation_detected():
    # the plain alternating series at a = 0.5 loses all digits for large |d| t^a
    with pytest.raises(CancellationError):
        g_function(GFunctionParams(0.5, -0.5, 1.0, -30.0, 4.0))


@pytest.mark.parametrize("A", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("c", [0.5, 1.0])
@pytest.mark.parametrize("s", [0.1, 1.0])
def test_g_collapsed_sum(A, c, s):
    total = CompensatedSum()
    for k in range(60):
        total.add((-c) ** k * g_function(GFunctionParams(0, -k - 1, k + 1, -A, s))[0])
    assert float(total.value) == pytest.approx(math.exp(-c * s / (1 + A)) / (1 + A), rel=1e-9)


@pytest.mark.parametrize("A", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [0, 1, 4])
def test_g_a0_termwise(A, k):
    s = 0.7
    v = g_function(GFunctionParams(0, -k - 1, k + 1, -A, s))[0]
    assert v == pytest.approx(s**k / math.factorial(k) / (1 + A) ** (k + 1), rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(-10.0, 0.0), st.floats(0.0, 5.0))
def test_g_exponential_identity(d, t):
    v = g_function(GFunctionParams(1, 0, 1, d, t))[0]
    assert v == pytest.approx(math.exp(d * t), rel=1e-10)


def test_cancellation_indicator():
    assert cancellation_indicator(2.0, 1.0) == 1.0
    assert cancellation_indicator(1e-3, 10.0) == pytest.approx(1e4)
    assert cancellation_indicator(0.0, 0.0) == 1.0
    assert np.isinf(cancellation_indicator(0.0, 1.0))


# -- compensated sum -------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False), min_size=1, max_size=200))
def test_compensated_sum_close_to_fsum(xs):
    acc = CompensatedSum()
    for x in xs:
        acc.add(x)
    exact = math.fsum(xs)
    assert abs(float(acc.value) - exact) <= 1e-15 * sum(abs(x) for x in xs) + 1e-300


def test_compensated_sum_beats_naive():
    xs = [1.0, 1e100, 1.0, -1e100] * 50
    acc = CompensatedSum()
    for x in xs:
        acc.add(x)
    assert float(acc.value) == 100.0
