"""Small-argument asymptotics of harmonic sums by Mellin residue calculus.

For a harmonic sum F(x) = sum w(n) K(n x) / n^mu the Mellin transform
factorises as  C * Gamma(c s) * trig(b s) * zeta(s + mu) * [1 - 2^(-s-mu)],
the last factor present only for odd-n sums. Shifting the inversion contour
to Re s = -depth collects the residues of x^(-s) * M(s), each of which is
one term a * x^p * (ln x)^q of the expansion.

Residues come from analytic Laurent data, never from contour quadrature:
Gamma near -k is (-1)^k/k! * (1/eps + psi(k+1)), zeta near 1 is 1/eps + gamma.

Kernel table (b is the trig frequency, c the Gamma scale, C the prefactor):

    quadratic_exp, Re :  C = +1/2, Gamma(s/2), cos(pi s/4)
    quadratic_exp, Im :  C = -1/2, Gamma(s/2), sin(pi s/4)
    linear_sine       :  C = 1,    Gamma(s),   sin(pi s/2)
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Tuple

from .errors import ParameterDomainError, PoleOnLineError
from .series import LINEAR_SINE, ODD_N, HarmonicSumSpec, f1, f2
from .spectral import BuiltinState
from .special import EULER_GAMMA, cospi, digamma, gamma_real, sinpi, zeta_real

DEFAULT_DEPTH = 3.5

EXACT_TOL = 1e-12
COLLISION_TOL = 1e-9

GAMMA = "Gamma"
ZETA = "Zeta"
COLLISION = "Collision"
SIMPLE = "simple"
DOUBLE = "double"

RE = "re"
IM = "im"


@dataclass(frozen=True)
class PoleDescriptor:
    location: float
    order: str
    source: str


@dataclass(frozen=True)
class Term:
    coeff: complex
    power: float
    log_power: int = 0


@dataclass(frozen=True)
class AsymptoticExpansion:
    """sum coeff * v**power * (ln v)**log_power, error O(v**valid_order)."""

    variable: str
    terms: Tuple[Term, ...] = ()
    valid_order: float = 0.0

    def __post_init__(self):
        merged = {}
        for term in self.terms:
            key = (term.power, term.log_power)
            merged[key] = merged.get(key, 0j) + complex(term.coeff)
        terms = tuple(Term(merged[k], k[0], k[1]) for k in sorted(merged))
        object.__setattr__(self, "terms", terms)

    def coefficient(self, power, log_power=0, tol=1e-12):
        for term in self.terms:
            if abs(term.power - power) <= tol and term.log_power == log_power:
                return term.coeff
        return 0j

    def scaled(self, factor):
        return AsymptoticExpansion(
            self.variable, tuple(Term(t.coeff * factor, t.power, t.log_power) for t in self.terms), self.valid_order
        )

    def in_t(self):
        """Rewrite an expansion in x as one in t = x**2."""
        if self.variable == "t":
            return self
        terms = tuple(Term(t.coeff / 2.0**t.log_power, t.power / 2.0, t.log_power) for t in self.terms)
        return AsymptoticExpansion("t", terms, self.valid_order / 2.0)

    def leading(self, skip_constant=True):
        """Dominant term as v -> 0+ (lowest power, then highest log power)."""
        best = None
        for term in self.terms:
            if skip_constant and term.power == 0 and term.log_power == 0:
                continue
            if term.coeff == 0:
                continue
            if best is None or (term.power, -term.log_power) < (best.power, -best.log_power):
                best = term
        return best

    def to_dict(self):
        return {
            "variable": self.variable,
            "terms": [
                {"coeff_re": t.coeff.real, "coeff_im": t.coeff.imag, "power": t.power, "log_power": t.log_power}
                for t in self.terms
            ],
            "valid_order": self.valid_order,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc):
        terms = tuple(
            Term(complex(t["coeff_re"], t["coeff_im"]), float(t["power"]), int(t["log_power"])) for t in doc["terms"]
        )
        return cls(doc["variable"], terms, float(doc["valid_order"]))


def eval_expansion(exp: AsymptoticExpansion, t):
    """Evaluate the expansion at a positive argument."""
    t = float(t)
    if not t > 0:
        raise ParameterDomainError("expansions are evaluated at positive arguments only")
    log_t = math.log(t)
    total = 0j
    for term in exp.terms:
        total += term.coeff * t**term.power * log_t**term.log_power
    return total


# ---------------------------------------------------------------- kernel data


@dataclass(frozen=True)
class _Kernel:
    prefactor: float
    gamma_scale: float  # Gamma(c s)
    trig_scale: float  # trig(b s) with b = trig_scale * pi
    trig: str  # "cos" | "sin"


def _kernel(spec: HarmonicSumSpec, part):
    if spec.phase_kernel == LINEAR_SINE:
        if part != RE:
            raise ParameterDomainError("the sine sum is real; only its real part has an expansion")
        return _Kernel(1.0, 1.0, 0.5, "sin")
    if part == RE:
        return _Kernel(0.5, 0.5, 0.25, "cos")
    if part == IM:
        return _Kernel(-0.5, 0.5, 0.25, "sin")
    raise ParameterDomainError(f"part must be 're' or 'im', got {part!r}")


def _near_int(v, tol=EXACT_TOL):
    k = round(v)
    return k if abs(v - k) <= tol * max(1.0, abs(v)) else None


def _trig_laurent(kern: _Kernel, s0):
    """(order, a0, a1) of trig(b s) around s0."""
    arg = kern.trig_scale * s0  # in units of pi
    b = kern.trig_scale * math.pi
    if kern.trig == "cos":
        val, der = cospi(arg), -b * sinpi(arg)
    else:
        val, der = sinpi(arg), b * cospi(arg)
    if val == 0.0:
        return 1, der, 0.0
    return 0, val, der


def _gamma_laurent(kern: _Kernel, s0):
    z = kern.gamma_scale * s0
    k = _near_int(-z)
    if k is not None and k >= 0:
        res = (-1) ** k / math.factorial(k)
        return -1, res / kern.gamma_scale, res * digamma(k + 1)
    g = gamma_real(z)
    return 0, g, kern.gamma_scale * g * digamma(z)


def _zeta_laurent(mu, s0):
    if _near_int(s0 + mu - 1.0) == 0:
        return -1, 1.0, EULER_GAMMA
    val = zeta_real(s0 + mu)
    if val == 0.0:
        return 1, math.nan, math.nan
    return 0, val, math.nan


def _odd_laurent(mu, s0):
    e = s0 + mu
    if _near_int(e) == 0:
        ln2 = math.log(2.0)
        return 1, ln2, -0.5 * ln2 * ln2
    p = 2.0**-e
    return 0, 1.0 - p, math.log(2.0) * p


def _factors(spec, kern, s0):
    out = [_gamma_laurent(kern, s0), _trig_laurent(kern, s0), _zeta_laurent(spec.mu, s0)]
    if spec.weight_pattern == ODD_N:
        out.append(_odd_laurent(spec.mu, s0))
    return out


def _candidates(spec: HarmonicSumSpec, depth):
    """Candidate singular points s0 > -depth: Gamma lattice and the zeta pole."""
    step = 1.0 if spec.phase_kernel == LINEAR_SINE else 2.0
    pts = []
    k = 0
    while -k * step > -depth:
        pts.append((-k * step, GAMMA))
        k += 1
    zeta_pole = 1.0 - spec.mu
    if zeta_pole > -depth:
        merged = False
        for i, (loc, _) in enumerate(pts):
            gap = abs(loc - zeta_pole)
            if gap <= COLLISION_TOL:
                if gap > EXACT_TOL:
                    warnings.warn(
                        f"zeta pole at {zeta_pole!r} is {gap:.1e} from the Gamma pole at {loc}; "
                        "treated as a double pole, accuracy degraded",
                        RuntimeWarning,
                        stacklevel=3,
                    )
                pts[i] = (loc, COLLISION)
                merged = True
        if not merged:
            pts.append((zeta_pole, ZETA))
    return sorted(pts, key=lambda p: -p[0])


def _check_line(spec, kern, depth):
    for loc, _ in _candidates(spec, depth + 1.0):
        if abs(loc + depth) <= EXACT_TOL and _order(spec, kern, loc) < 0:
            raise PoleOnLineError(f"a pole sits on the shifted line Re s = {-depth}; choose another depth")


def _order(spec, kern, s0):
    return sum(f[0] for f in _factors(spec, kern, s0))


def enumerate_poles(spec: HarmonicSumSpec, part=RE, depth=DEFAULT_DEPTH) -> List[PoleDescriptor]:
    """Poles of the Mellin integrand with s0 > -depth, right to left.

    Lattice points where a trig zero, a trivial zeta zero or the odd-sum
    factor cancels the Gamma pole are removable and therefore omitted.
    """
    if not depth > 0:
        raise ParameterDomainError("depth must be positive")
    kern = _kernel(spec, part)
    poles = []
    for loc, source in _candidates(spec, depth):
        order = -_order(spec, kern, loc)
        if order <= 0:
            continue
        poles.append(PoleDescriptor(loc, DOUBLE if order == 2 else SIMPLE, source))
    return poles


def _residue_terms(spec, kern, s0):
    """Terms contributed by x^(-s) M(s) at s0 (power in x)."""
    factors = _factors(spec, kern, s0)
    order = sum(f[0] for f in factors)
    lead = kern.prefactor * math.prod(f[1] for f in factors)
    power = -s0 if s0 != 0 else 0.0
    if order == -1:
        return [Term(complex(lead), power, 0)]
    if order == -2:
        correction = sum(f[2] / f[1] for f in factors)
        if not math.isfinite(correction):
            raise ArithmeticError(f"missing Laurent data at s0 = {s0}")
        # x^(-s) = x^(-s0) (1 - eps ln x + ...)
        return [Term(complex(lead * correction), power, 0), Term(complex(-lead), power, 1)]
    raise ArithmeticError(f"unexpected pole order {-order} at s0 = {s0}")


def valid_order(spec: HarmonicSumSpec, depth=DEFAULT_DEPTH):
    """Order in x of the remainder left by the residues right of -depth.

    For the sine kernel the shifted contour integral converges absolutely
    and the remainder is O(x**depth). For exp(-i n^2 x^2) it does not decay
    along vertical lines: Poisson summation shows oscillatory terms of size
    x**(2 mu - 1) (modulated by exp(i pi^2 k^2 / x^2)) that no residue
    produces, so the order is capped there.
    """
    if spec.phase_kernel == LINEAR_SINE:
        return float(depth)
    return float(min(depth, 2.0 * spec.mu - 1.0))


def expand(spec: HarmonicSumSpec, part=RE, depth=DEFAULT_DEPTH) -> AsymptoticExpansion:
    """Expansion of Re/Im of a harmonic sum as x -> 0+, in the variable x.

    Collects every pole right of Re s = -depth; the remainder order is
    reported as ``valid_order`` (see :func:`valid_order`).
    """
    kern = _kernel(spec, part)
    _check_line(spec, kern, depth)
    terms = []
    for pole in enumerate_poles(spec, part, depth):
        terms.extend(_residue_terms(spec, kern, pole.location))
    return AsymptoticExpansion("x", tuple(terms), valid_order(spec, depth))


# ------------------------------------------------------ autocorrelation level


def harmonic_form(state: BuiltinState):
    """(spec, factor) with A(t) = factor * f(sqrt(t)) for series states."""
    if state.tag == "psi1":
        return f1(2.0), 6.0 / math.pi**2
    if state.tag == "psi2":
        return f2(4.0), 96.0 / math.pi**4
    if state.tag == "psi3":
        return f2(6.0), 960.0 / math.pi**6
    if state.tag == "chibeta":
        mu = 2.0 + 2.0 * state.beta
        return f1(mu), 1.0 / zeta_real(mu)
    raise ParameterDomainError(f"{state.tag} is not a harmonic sum; no Mellin expansion available")


def autocorr_expansion(state: BuiltinState, part=RE, depth=DEFAULT_DEPTH) -> AsymptoticExpansion:
    """Short-time expansion of Re or Im of A(t), in t."""
    spec, factor = harmonic_form(state)
    return expand(spec, part, depth).scaled(factor).in_t()


def chi_beta_expansion(beta, depth=DEFAULT_DEPTH) -> AsymptoticExpansion:
    """chi_beta(x) as x -> 0+, from the sine sum with mu = 1 + beta."""
    from .series import f3

    factor = math.sqrt(2.0 / math.pi) / math.sqrt(zeta_real(2.0 + 2.0 * beta))
    return expand(f3(1.0 + beta), RE, depth).scaled(factor)
