import math
import warnings

import pytest

from wellcorr.errors import ParameterDomainError, PoleOnLineError
from wellcorr.mellin import (
    COLLISION,
    DOUBLE,
    GAMMA,
    IM,
    RE,
    SIMPLE,
    ZETA,
    AsymptoticExpansion,
    PoleDescriptor,
    Term,
    autocorr_expansion,
    chi_beta_expansion,
    enumerate_poles,
    eval_expansion,
    expand,
)
from wellcorr.series import eval_autocorr, eval_harmonic, f1, f2, f3
from wellcorr.spectral import BuiltinState, builtin_coefficients
from wellcorr.special import gamma_real, zeta_real

PI = math.pi

# (state, part, power in t, closed-form coefficient, depth)
CLOSED_FORMS = [
    ("psi1", RE, 0.5, -math.sqrt(18 / PI**3), 3.5),
    ("psi1", IM, 0.5, -math.sqrt(18 / PI**3), 3.5),
    ("psi1", IM, 1.0, 3 / PI**2, 3.5),
    ("psi2", RE, 1.5, -math.sqrt(512 / PI**7), 3.5),
    ("psi2", IM, 1.0, -12 / PI**2, 3.5),
    ("psi2", IM, 1.5, math.sqrt(512 / PI**7), 3.5),
    ("psi3", RE, 2.0, -60 / PI**4, 5.5),
    ("psi3", RE, 2.5, math.sqrt(8192 / PI**11), 5.5),
    ("psi3", IM, 1.0, -10 / PI**2, 5.5),
    ("psi3", IM, 2.5, math.sqrt(8192 / PI**11), 5.5),
]


@pytest.mark.parametrize("tag,part,power,coeff,depth", CLOSED_FORMS)
def test_closed_form_coefficients(tag, part, power, coeff, depth):
    exp = autocorr_expansion(BuiltinState(tag), part, depth)
    assert exp.variable == "t"
    got = exp.coefficient(power).real
    assert got == pytest.approx(coeff, rel=1e-10)


@pytest.mark.parametrize("tag", ["psi1", "psi2", "psi3"])
def test_constant_term_is_one(tag):
    exp = autocorr_expansion(BuiltinState(tag), RE, 5.5)
    assert exp.coefficient(0.0).real == pytest.approx(1.0, rel=1e-13)
    assert autocorr_expansion(BuiltinState(tag), IM, 5.5).coefficient(0.0) == 0


def test_f1_mu2_appendix_expansions():
    re = expand(f1(2.0), RE)
    im = expand(f1(2.0), IM)
    assert re.coefficient(0.0).real == pytest.approx(PI**2 / 6, rel=1e-13)
    assert re.coefficient(1.0).real == pytest.approx(-math.sqrt(PI / 2), rel=1e-13)
    assert im.coefficient(1.0).real == pytest.approx(-math.sqrt(PI / 2), rel=1e-13)
    assert im.coefficient(2.0).real == pytest.approx(0.5, rel=1e-13)
    assert [t.power for t in re.terms] == [0.0, 1.0]


def test_d_asymptote():
    exp = expand(f2(2.0), RE).in_t()
    assert exp.coefficient(0.0).real == pytest.approx(PI**2 / 8, rel=1e-13)
    assert exp.coefficient(0.5).real == pytest.approx(-math.sqrt(PI / 8), rel=1e-13)
    im = expand(f2(2.0), IM).in_t()
    assert im.coefficient(0.5).real == pytest.approx(-math.sqrt(PI / 8), rel=1e-13)


def test_pole_lists():
    assert enumerate_poles(f1(2.0), RE, 3) == [PoleDescriptor(0.0, SIMPLE, GAMMA), PoleDescriptor(-1.0, SIMPLE, ZETA)]
    assert enumerate_poles(f1(2.0), IM, 3) == [PoleDescriptor(-1.0, SIMPLE, ZETA), PoleDescriptor(-2.0, SIMPLE, GAMMA)]
    assert PoleDescriptor(-2.0, DOUBLE, COLLISION) in enumerate_poles(f1(3.0), IM, 3)
    beta = 0.3
    assert enumerate_poles(f3(1 + beta), RE, 2) == [
        PoleDescriptor(pytest.approx(-beta), SIMPLE, ZETA),
        PoleDescriptor(-1.0, SIMPLE, GAMMA),
    ]


def test_sine_sum_lattice_is_odd_only():
    locs = [p.location for p in enumerate_poles(f3(1.5), RE, 6.5)]
    assert locs == [-0.5, -1.0, -3.0, -5.0]


def test_pole_on_line_raises():
    with pytest.raises(PoleOnLineError):
        expand(f1(2.0), RE, depth=1.0)
    with pytest.raises(ParameterDomainError):
        enumerate_poles(f1(2.0), RE, depth=0.0)


def test_double_pole_log_term():
    exp = expand(f1(3.0), IM)
    assert exp.coefficient(2.0, 1).real == pytest.approx(1.0, rel=1e-12)
    assert exp.coefficient(2.0, 0).real == pytest.approx(-(1 + 0.5772156649015329) / 2, rel=1e-12)
    # the log term leads
    assert exp.leading() == Term(exp.coefficient(2.0, 1), 2.0, 1)


def test_near_collision_warns_and_exact_collision_does_not():
    with pytest.warns(RuntimeWarning):
        enumerate_poles(f1(3.0 + 5e-10), IM, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        enumerate_poles(f1(3.0 + 1e-13), IM, 3)


@pytest.mark.parametrize("mu", [2.0, 4.0, 6.0, 2.2, 2.5, 2.8])
def test_zeta_pole_exponent_rule(mu):
    exp = expand(f1(mu), IM, depth=7.5).in_t()
    zeta_power = (mu - 1) / 2
    assert exp.coefficient(zeta_power) != 0
    poles = enumerate_poles(f1(mu), IM, 7.5)
    assert any(abs(p.location - (1 - mu)) < 1e-12 for p in poles)


@pytest.mark.parametrize("mu,lowest", [(2.0, 0.5), (3.5, 1.25), (4.0, 1.5), (4.9, 1.95), (5.1, 2.0), (6.0, 2.0), (7.5, 2.0)])
def test_quadratic_threshold(mu, lowest):
    exp = expand(f1(mu), RE, depth=7.5).in_t()
    assert exp.leading().power == pytest.approx(lowest, abs=1e-12)


@pytest.mark.parametrize("beta", [0.1, 0.25, 0.4])
def test_chi_beta_autocorr_coefficients(beta):
    lam = (1 + 2 * beta) / 2
    z = zeta_real(2 + 2 * beta)
    st = BuiltinState("chibeta", beta=beta)
    re = autocorr_expansion(st, RE)
    im = autocorr_expansion(st, IM)
    assert -re.coefficient(lam).real == pytest.approx(-gamma_real(-lam) * math.cos(lam * PI / 2) / (2 * z), rel=1e-10)
    assert im.coefficient(lam).real == pytest.approx(gamma_real(-lam) * math.sin(lam * PI / 2) / (2 * z), rel=1e-10)


def test_chi_beta_wavefunction_law():
    beta = 0.25
    exp = chi_beta_expansion(beta)
    lead = exp.leading()
    assert lead.power == pytest.approx(beta)
    expected = gamma_real(-beta) * math.sin(-PI * beta / 2) * math.sqrt(2) / math.sqrt(PI * zeta_real(2 + 2 * beta))
    assert lead.coeff.real == pytest.approx(expected, rel=1e-12)
    factor = math.sqrt(2 / PI) / math.sqrt(zeta_real(2 + 2 * beta))
    for x in (1e-2, 1e-3):
        series = factor * eval_harmonic(f3(1 + beta), x, 1e-7).value.real
        assert eval_expansion(exp, x).real == pytest.approx(series, abs=3e-7)


def _reachable_tol(coeffs, t, vo, budget=4e7, floor=1e-14):
    # series accurate to 1% of the allowed remainder, unless double rounding
    # or the term budget makes that unreachable
    tol = 1e-2 * t**vo
    if tol < floor:
        return None
    n = coeffs.tail.cutoff(tol / 2)
    return tol if n <= budget else None


@pytest.mark.parametrize("tag,depth", [("psi1", 3.5), ("psi2", 3.5), ("psi3", 5.5)])
def test_oracle_match(tag, depth):
    st = BuiltinState(tag)
    coeffs = builtin_coefficients(st)
    exps = {part: autocorr_expansion(st, part, depth) for part in (RE, IM)}
    vo = exps[RE].valid_order
    checked = 0
    for k in range(2, 9):
        t = 10.0**-k
        tol = _reachable_tol(coeffs, t, vo)
        if tol is None:
            continue
        checked += 1
        value = eval_autocorr(coeffs, t, tol).value
        for part, pick in ((RE, lambda z: z.real), (IM, lambda z: z.imag)):
            ratio = abs(pick(value) - eval_expansion(exps[part], t).real) / t**vo
            assert ratio < 1.0, (tag, part, t, ratio)
    assert checked >= 2


def test_expansion_json_round_trip():
    exp = expand(f1(3.0), IM)
    doc = exp.to_dict()
    assert set(doc) == {"variable", "terms", "valid_order"}
    assert set(doc["terms"][0]) == {"coeff_re", "coeff_im", "power", "log_power"}
    assert AsymptoticExpansion.from_dict(doc) == exp


def test_eval_expansion_examples():
    exp = autocorr_expansion(BuiltinState("psi1"), RE)
    t = 1e-4
    assert eval_expansion(exp, t).real == pytest.approx(1 - math.sqrt(18 / PI**3) * 1e-2, rel=1e-14)
    assert eval_expansion(AsymptoticExpansion("t"), 0.3) == 0
    with pytest.raises(ParameterDomainError):
        eval_expansion(exp, 0.0)


def test_sine_kernel_has_no_imaginary_part():
    with pytest.raises(ParameterDomainError):
        expand(f3(1.5), IM)


def test_non_harmonic_states_rejected():
    with pytest.raises(ParameterDomainError):
        autocorr_expansion(BuiltinState("psi4"))
