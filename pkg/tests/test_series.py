import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wellcorr.errors import ConvergenceError, ParameterDomainError, UnreachableToleranceError
from wellcorr.series import (
    NUFFT_MIN_POINTS,
    ROUNDING,
    HarmonicSumSpec,
    autocorr_on_period_grid,
    bloch_closed,
    eval_autocorr,
    eval_bloch,
    eval_d,
    eval_harmonic,
    eval_riemann,
    f1,
    f2,
    f3,
    sweep_autocorr,
)
from wellcorr.spectral import BuiltinState, builtin_coefficients, decompose_piecewise, piecewise_form

PI = math.pi
PSI1 = builtin_coefficients(BuiltinState("psi1"))
PSI2 = builtin_coefficients(BuiltinState("psi2"))
PSI3 = builtin_coefficients(BuiltinState("psi3"))
STATES = {
    "psi1": PSI1,
    "psi2": PSI2,
    "psi3": PSI3,
    "psi4": builtin_coefficients(BuiltinState("psi4")),
    "chi": builtin_coefficients(BuiltinState("chibeta", beta=0.3)),
    "bloch": builtin_coefficients(BuiltinState("bloch", alpha=0.37)),
}
FAST_TOL = 1e-5


def test_value_at_zero_is_exact():
    sv = eval_autocorr(PSI1, 0.0, 1e-6)
    assert sv.value == 1.0
    assert 0 < sv.truncation_bound <= 1e-6


@pytest.mark.parametrize("coeffs,expected", [(PSI1, -0.5), (PSI2, -1.0), (PSI3, -1.0)])
def test_parity_values(coeffs, expected):
    sv = eval_autocorr(coeffs, PI, 1e-6)
    assert abs(sv.value - expected) <= sv.truncation_bound + 1e-12


def test_revival_at_two_pi():
    sv = eval_autocorr(PSI1, 2 * PI, 1e-6)
    assert abs(sv.value - 1.0) <= sv.truncation_bound + 1e-12


def test_exact_phase_reduction_for_huge_energies():
    # n^2 t mod 2 pi with n ~ 1e7: compare with an exact integer reduction
    from wellcorr.series import _phases, _turns

    n = np.array([12_345_677, 9_999_991], dtype=np.uint64)
    t = 1.2345
    hi, lo = _turns(t)
    got = _phases(n * n, hi, lo)
    import mpmath

    with mpmath.workdps(60):
        ref = [float(mpmath.fmod(mpmath.mpf(int(k) ** 2) * mpmath.mpf(t), 2 * mpmath.pi)) for k in n]
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_harmonic_examples():
    for spec, exact in ((f2(2.0), PI**2 / 8), (f1(2.0), PI**2 / 6)):
        sv = eval_harmonic(spec, 0.0, 1e-7)
        assert abs(sv.value - exact) <= sv.truncation_bound <= 1e-7
    assert abs(eval_harmonic(f3(1.1), PI, 1e-8).value) <= 1e-12


def test_harmonic_spec_validation():
    with pytest.raises(ConvergenceError):
        f1(1.0)
    with pytest.raises(ParameterDomainError):
        HarmonicSumSpec("sine", 2.0)
    with pytest.raises(ParameterDomainError):
        HarmonicSumSpec("all", 2.0, "linear_sine")


def test_sine_sum_against_closed_form():
    # sum sin(n x)/n^2 has no elementary form, but sum sin(n x)/n^3 does:
    # pi^2 x / 6 - pi x^2 / 4 + x^3 / 12 on [0, 2 pi]
    x = 1.3
    exact = PI**2 * x / 6 - PI * x**2 / 4 + x**3 / 12
    sv = eval_harmonic(f3(3.0), x, 1e-10)
    assert abs(sv.value.real - exact) <= sv.truncation_bound + 1e-13


def test_riemann_function():
    assert eval_riemann(0.0, 1e-6) == 0.0
    assert abs(eval_riemann(PI, 1e-6)) <= 1e-12
    r = eval_riemann(1.0, 1e-7)
    a = eval_autocorr(PSI1, 1.0, 1e-7)
    assert r == pytest.approx(-(PI**2 / 6) * a.value.imag, abs=1e-6)


def test_d_at_zero_and_asymptote():
    sv = eval_d(0.0, 1e-7)
    assert abs(sv.value - PI**2 / 8) <= sv.truncation_bound <= 1e-7
    t = 1e-6
    d = eval_d(t, 1e-7).value
    assert d.real == pytest.approx(PI**2 / 8 - math.sqrt(PI * t / 8), abs=1e-5)
    assert d.imag == pytest.approx(-math.sqrt(PI * t / 8), abs=1e-5)


def test_d_relation():
    # A_2'(t) = -i (96/pi^4) D(t); step 1e-7 keeps the sqrt(h) cusp error of D small
    h = 1e-7
    for t in (1.0, 2.0, 3.0, 4.0, 5.0, 6.0):
        d = eval_harmonic(f2(2.0), math.sqrt(t), 1e-7).value
        fd = (eval_autocorr(PSI2, t + h, 1e-14).value - eval_autocorr(PSI2, t - h, 1e-14).value) / (2 * h)
        assert abs(fd - (-1j * 96 / PI**4) * d) < 1e-5, t


def test_d_cusp_limits_finite_differences():
    # at rational multiples of pi D has a sqrt cusp, so the FD error decays like sqrt(h)
    t = 2 * PI / 5
    d = eval_d(t, 1e-7).value
    errs = []
    for h in (1e-5, 1e-6):
        fd = (eval_autocorr(PSI2, t + h, 1e-14).value - eval_autocorr(PSI2, t - h, 1e-14).value) / (2 * h)
        errs.append(abs(fd - (-1j * 96 / PI**4) * d))
    assert errs[0] / errs[1] == pytest.approx(math.sqrt(10), rel=0.2)


def test_bloch_closed_form_examples():
    for alpha in (0.2, 0.3, 0.77):
        assert bloch_closed(alpha, 0.0) == 1.0
        assert abs(bloch_closed(alpha, 2 * PI - 1e-15) - 1.0) < 1e-13
    with pytest.raises(ParameterDomainError):
        bloch_closed(2.0, 1.0)


def test_bloch_series_matches_closed_form():
    ts = 2 * PI * np.arange(1, 1001) / 1001
    coeffs = STATES["bloch"]
    vals, _, bound = sweep_autocorr(coeffs, ts, 1e-8)
    closed = np.array([bloch_closed(0.37, t) for t in ts])
    assert bound <= 1.01e-8
    assert np.max(np.abs(vals - closed)) <= bound
    for t in (0.1, 3.0):
        sv = eval_bloch(0.37, t, 1e-8)
        assert abs(sv.value - bloch_closed(0.37, t)) <= sv.truncation_bound


def test_bloch_linear_decay():
    alpha = 0.3
    slope = (1 - math.cos(2 * PI * alpha)) / PI
    for t in (1e-4, 1e-5):
        b = bloch_closed(alpha, t)
        assert (1 - abs(b) ** 2) / t == pytest.approx(slope, rel=1e-3)


def test_sweep_matches_pointwise():
    ts = np.linspace(0.0, 2 * PI, 2 * NUFFT_MIN_POINTS)
    vals, defects, bound = sweep_autocorr(PSI2, ts, 1e-9)
    assert vals[0] == 1.0
    for i in (0, 17, 100, 127):
        sv = eval_autocorr(PSI2, ts[i], 1e-9)
        assert abs(vals[i] - sv.value) <= bound + sv.truncation_bound
        assert abs(defects[i] - (1 - vals[i])) < 1e-15


def test_period_grid_matches_pointwise():
    t, vals, bound = autocorr_on_period_grid(PSI1, 64, 1e-6)
    assert vals[0] == 1.0
    for j in (3, 21, 40):
        sv = eval_autocorr(PSI1, t[j], 1e-6)
        assert abs(vals[j] - sv.value) <= bound + sv.truncation_bound


def test_prefix_states_are_exact_sums():
    psi4 = STATES["psi4"]
    t = 0.77
    exact = sum(c * c * cmath.exp(-1j * n * n * t) for n, c in enumerate(psi4.prefix, start=1))
    sv = eval_autocorr(psi4, t, 1e-8)
    # nothing is truncated: the bound is the rounding allowance alone
    assert sv.truncation_bound == ROUNDING * psi4.norm_sq
    assert abs(sv.value - exact) < 1e-15


def test_unreachable_tolerance():
    with pytest.raises(UnreachableToleranceError):
        eval_autocorr(PSI1, 1.0, 1e-18)
    with pytest.raises(ParameterDomainError):
        eval_autocorr(PSI1, 1.0, 0.0)


def test_piecewise_prefix_agrees_with_closed_form():
    prefix = decompose_piecewise(piecewise_form(BuiltinState("psi3")), 400)
    a = eval_autocorr(prefix, 0.9, 1e-9).value
    b = eval_autocorr(PSI3, 0.9, 1e-12).value
    # the prefix misses the weight beyond n = 400, about 1e-14
    assert abs(a - b) < 1e-12


# ------------------------------------------------------------- properties

times = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)
names = st.sampled_from(sorted(STATES))


@settings(max_examples=40, deadline=None)
@given(names, times)
def test_modulus_bounded(name, t):
    sv = eval_autocorr(STATES[name], t, FAST_TOL)
    assert abs(sv.value) <= 1.0 + sv.truncation_bound


@settings(max_examples=40, deadline=None)
@given(names, times)
def test_conjugate_symmetry(name, t):
    a = eval_autocorr(STATES[name], t, FAST_TOL)
    b = eval_autocorr(STATES[name], -t, FAST_TOL)
    # same cutoff on both sides, so the truncated sums are exact conjugates
    assert abs(a.value - b.value.conjugate()) < 1e-13


@settings(max_examples=40, deadline=None)
@given(names, times)
def test_two_pi_periodicity(name, t):
    a = eval_autocorr(STATES[name], t, FAST_TOL)
    b = eval_autocorr(STATES[name], t + 2 * PI, FAST_TOL)
    assert abs(a.value - b.value) <= 2 * FAST_TOL


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["psi1", "psi2", "psi3", "chi", "bloch"]), times, st.integers(min_value=50, max_value=20000))
def test_truncation_bound_honest(name, t, n):
    coeffs = STATES[name]
    short = eval_autocorr(coeffs, t, n_max=n)
    long = eval_autocorr(coeffs, t, n_max=4 * n)
    assert abs(short.value - long.value) <= short.truncation_bound
    assert long.truncation_bound < short.truncation_bound


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1.8, max_value=4.0), st.floats(min_value=0.01, max_value=6.2))
def test_harmonic_bound_honest(mu, x):
    for spec in (f1(mu), f2(mu), f3(mu)):
        sv = eval_harmonic(spec, x, 1e-3)
        ref = eval_harmonic(spec, x, 1e-3 / 8)
        assert abs(sv.value - ref.value) <= sv.truncation_bound + ref.truncation_bound
