"""Certified evaluation of slowly converging oscillatory Fourier series.

Every sum has the shape  sum_n w_n exp(-i E_n t)  with w_n >= 0 and integer
energies E_n (n**2 for the well, n for the Bloch series and the sine kernel).
Two things keep 10^8-term sums honest in double precision:

* Phases are reduced exactly. ``t / 2 pi`` is rounded once to a 128-bit
  fixed-point fraction and ``E_n * t / 2 pi mod 1`` is formed with wrapping
  uint64 arithmetic, so the phase error does not grow with E_n.
* Chunk totals are combined with a Neumaier accumulator in ascending n.

Truncation is chosen from a dominating power-law envelope of the weights, so
``|value - exact| <= truncation_bound`` holds for the reported bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .accumulate import NeumaierSum
from .errors import ConvergenceError, ParameterDomainError, UnreachableToleranceError
from .spectral import LINEAR, BuiltinState, PowerTail, SpectralCoefficients, builtin_coefficients

DEFAULT_TOL = 1e-8
CHUNK = 1 << 20
EXACT_HEAD = 1 << 16
# rounding allowance added to every certified bound, in units of the total weight
ROUNDING = 16.0 * np.finfo(float).eps
MAX_TERMS = 1 << 34
# n**2 must fit in a uint64 for the exact phase reduction
MAX_QUADRATIC_TERMS = 1 << 32

ALL_N = "all"
ODD_N = "odd"
SINE_KERNEL = "sine"
QUADRATIC_EXP = "quadratic_exp"
LINEAR_SINE = "linear_sine"

_TWO_POW_M53 = 2.0**-53
_SHIFT = np.uint64(11)
_LOW_BITS = np.uint64(0x7FF)


@dataclass(frozen=True)
class HarmonicSumSpec:
    """sum_n w(n) K(n, x) / n**mu for the three kernels in use.

    all/quadratic_exp  -> sum_{n>=1}     exp(-i n^2 x^2) / n^mu
    odd/quadratic_exp  -> sum_{n odd}    exp(-i n^2 x^2) / n^mu
    sine/linear_sine   -> sum_{n>=1}     sin(n x) / n^mu
    """

    weight_pattern: str
    mu: float
    phase_kernel: str = QUADRATIC_EXP

    def __post_init__(self):
        if not self.mu > 1.0:
            raise ConvergenceError(f"harmonic sums need mu > 1, got {self.mu}")
        if self.weight_pattern == SINE_KERNEL:
            if self.phase_kernel != LINEAR_SINE:
                raise ParameterDomainError("the sine weight pattern pairs only with the linear sine kernel")
        elif self.weight_pattern in (ALL_N, ODD_N):
            if self.phase_kernel != QUADRATIC_EXP:
                raise ParameterDomainError("all/odd weight patterns pair only with the quadratic exponential kernel")
        else:
            raise ParameterDomainError(f"unknown weight pattern {self.weight_pattern!r}")

    @property
    def odd_only(self):
        return self.weight_pattern == ODD_N


def f1(mu):
    return HarmonicSumSpec(ALL_N, mu)


def f2(mu):
    return HarmonicSumSpec(ODD_N, mu)


def f3(mu):
    return HarmonicSumSpec(SINE_KERNEL, mu, LINEAR_SINE)


@dataclass(frozen=True)
class SeriesValue:
    """A truncated series with a certified bound on the neglected tail.

    ``defect`` is A(0) - A(t) summed term by term, which avoids cancellation
    when A(t) is close to A(0); it carries the same bound as ``value``.
    """

    value: complex
    truncation_bound: float
    terms_used: int
    defect: complex = 0j


def _turns(t, square=False):
    """Fraction of a turn t/(2 pi) mod 1 as (high uint64 word, low part).

    The low part is already scaled to turns (value < 2**-64).
    """
    with mpmath.workprec(256):
        v = mpmath.mpf(t)
        if square:
            v = v * v
        tau = v / (2 * mpmath.pi)
        tau -= mpmath.floor(tau)
        # tau can round up to exactly 1 for tiny negative t; wrap to 0
        fixed = int(mpmath.floor(tau * mpmath.mpf(2) ** 128)) & ((1 << 128) - 1)
    return np.uint64(fixed >> 64), float(fixed & ((1 << 64) - 1)) * 2.0**-128


def _phases(energy, hi, lo):
    """2 pi * frac(energy * tau) for uint64 energies."""
    with np.errstate(over="ignore"):
        wrapped = energy * hi
    frac = (wrapped >> _SHIFT).astype(np.float64) * _TWO_POW_M53
    # the 11 bits below the float mantissa matter when the phase itself is tiny
    frac += (wrapped & _LOW_BITS).astype(np.float64) * 2.0**-64 + energy.astype(np.float64) * lo
    frac -= np.floor(frac)
    return 2.0 * np.pi * frac


class _Accumulators:
    def __init__(self):
        self.cos = NeumaierSum()
        self.sin = NeumaierSum()
        self.vers = NeumaierSum()  # sum w (1 - cos)

    def add(self, w_cos, w_sin, phase, exact=False):
        c = np.cos(phase)
        s = np.sin(phase)
        h = np.sin(0.5 * phase)
        if exact:
            self.cos.add(math.fsum(w_cos * c))
            self.sin.add(math.fsum(w_sin * s))
            self.vers.add(2.0 * math.fsum(w_cos * (h * h)))
        else:
            self.cos.add(np.dot(w_cos, c))
            self.sin.add(np.dot(w_sin, s))
            self.vers.add(2.0 * np.dot(w_cos, h * h))


def _oscillatory_sum(weights_pos, weights_neg, n_max, t, *, quadratic, odd_only=False, square_t=False, chunk=CHUNK):
    """Chunked sums over n = 1..n_max (odd only if requested).

    Returns (C, S, V) with C = sum (w+ + w-) cos, S = sum (w+ - w-) sin,
    V = sum (w+ + w-)(1 - cos), phase = E_n t mod 2 pi.
    """
    if n_max > MAX_TERMS:
        raise UnreachableToleranceError(f"{n_max} terms exceeds the {MAX_TERMS} limit")
    if quadratic and n_max > MAX_QUADRATIC_TERMS:
        raise UnreachableToleranceError(f"{n_max} terms exceeds the {MAX_QUADRATIC_TERMS} limit for n^2 energies")
    hi, lo = _turns(t, square=square_t)
    acc = _Accumulators()
    step = 2 if odd_only else 1
    # the leading terms carry almost all the weight; sum them exactly
    head = min(n_max, EXACT_HEAD * step)
    starts = [(1, head, True)] + [(a, min(a + chunk * step - 1, n_max), False) for a in range(head + 1, n_max + 1, chunk * step)]
    for first, last, exact in starts:
        if first % 2 == 0 and odd_only:
            first += 1
        n = np.arange(first, last + 1, step, dtype=np.uint64)
        if n.size == 0:
            continue
        energy = n * n if quadratic else n
        phase = _phases(energy, hi, lo)
        n_signed = n.astype(np.int64)
        wp = weights_pos(n_signed)
        if weights_neg is None:
            acc.add(wp, wp, phase, exact)
        else:
            wn = weights_neg(-n_signed)
            acc.add(wp + wn, wp - wn, phase, exact)
    return acc.cos.value, acc.sin.value, acc.vers.value


def _cutoff(coeffs: SpectralCoefficients, tol, n_max):
    """Truncation index and certified bound on |A - A_N|.

    A_N = A(0) - sum_{n<=N} w_n (1 - exp(-i E_n t)), so the error is the same
    sum over the neglected modes and is at most twice their total weight.
    The bound also carries a rounding allowance of ROUNDING * A(0).
    """
    slack = ROUNDING * coeffs.norm_sq
    if coeffs.prefix is not None:
        return len(coeffs.prefix), slack
    if coeffs.tail is None:
        raise UnreachableToleranceError(f"{coeffs.label}: the coefficient tail is not dominated; cannot certify tol")
    if n_max is None:
        if not tol > 0:
            raise ParameterDomainError("tol must be positive")
        if tol <= 2.0 * slack:
            raise UnreachableToleranceError(f"tol {tol:g} is below the rounding floor {2.0 * slack:.2g}")
        n_max = coeffs.tail.cutoff(0.5 * (tol - slack))
    limit = MAX_TERMS if coeffs.energy == LINEAR else MAX_QUADRATIC_TERMS
    if n_max > limit:
        raise UnreachableToleranceError(f"{coeffs.label}: tol {tol:g} needs {n_max} terms (limit {limit})")
    return int(n_max), 2.0 * coeffs.tail.weight_beyond(n_max) + slack


def eval_autocorr(coeffs: SpectralCoefficients, t, tol=DEFAULT_TOL, *, n_max=None, chunk=CHUNK) -> SeriesValue:
    """A(t) = sum |c_n|^2 exp(-i E_n t) with |value - A(t)| <= truncation_bound <= tol.

    The value is assembled as A(0) - sum_{n<=N} |c_n|^2 (1 - exp(-i E_n t)),
    which is exact at t = 0. Stored prefixes are summed in full (the bound is
    then the rounding allowance alone).
    ``n_max`` overrides the automatic cutoff; the bound then refers to it.
    For two-sided spectra n runs over [-n_max, n_max].
    """
    n_max, bound = _cutoff(coeffs, tol, n_max)
    w = coeffs.weights
    if coeffs.energy == LINEAR:
        _, s, v = _oscillatory_sum(w, w, n_max, t, quadratic=False, chunk=chunk)
        terms = 2 * n_max + 1
    else:
        _, s, v = _oscillatory_sum(w, None, n_max, t, quadratic=True, odd_only=coeffs.odd_only, chunk=chunk)
        terms = (n_max + 1) // 2 if coeffs.odd_only else n_max
    defect = complex(v, s)
    return SeriesValue(coeffs.norm_sq - defect, bound, terms, defect)


NUFFT_EPS = 1e-13
# allowance for the spreading error of the type-1 transform (weights sum to <= 1)
NUFFT_BOUND = 1e-12
NUFFT_MIN_POINTS = 64


def _is_uniform(ts):
    if ts.size < 3:
        return False
    d = np.diff(ts)
    return bool(np.all(np.abs(d - d[0]) <= 1e-12 * max(1.0, np.max(np.abs(ts)))) and d[0] > 0)


def _uniform_sweep(coeffs: SpectralCoefficients, t0, dt, m, tol, chunk=1 << 22):
    """A(t0 + j dt), j < m, via one type-1 nonuniform FFT per chunk of modes.

    exp(-i E_n (t0 + j dt)) = exp(-i E_n tc) exp(-i w_n k) with
    tc = t0 + (m//2) dt, k = j - m//2 and w_n = E_n dt reduced to [-pi, pi).
    All phase reductions are exact, only the spreading is approximate.
    """
    import finufft

    n_max, bound = _cutoff(coeffs, tol, None)
    hc, lc = _turns(t0 + (m // 2) * dt)
    hd, ld = _turns(dt)
    out = np.zeros(m, dtype=complex)
    mass = NeumaierSum()
    w = coeffs.weights
    step = 2 if (coeffs.odd_only and coeffs.energy != LINEAR) else 1

    def push(energy, weights, sign):
        centre = _phases(energy, hc, lc)
        freq = _phases(energy, hd, ld)
        freq[freq >= np.pi] -= 2.0 * np.pi
        amp = weights * np.exp(-1j * sign * centre)
        # one thread keeps the spreading order, hence the output bits, fixed
        return finufft.nufft1d1(sign * freq, amp, m, eps=NUFFT_EPS, isign=-1, nthreads=1)

    for start in range(1, n_max + 1, chunk * step):
        n = np.arange(start, min(start + chunk * step, n_max + 1), step, dtype=np.uint64)
        ns = n.astype(np.int64)
        wp = w(ns)
        mass.add(np.sum(wp))
        if coeffs.energy == LINEAR:
            out += push(n, wp, 1.0)
            wn = w(-ns)
            mass.add(np.sum(wn))
            out += push(n, wn, -1.0)
        else:
            out += push(n * n, wp, 1.0)
    if coeffs.energy == LINEAR:
        w0 = float(w(np.zeros(1, dtype=np.int64))[0])
        out += w0
        mass.add(w0)
    # same assembly as the pointwise path: A(0) minus the partial defect
    values = coeffs.norm_sq - (mass.value - out)
    return values, bound + NUFFT_BOUND


def sweep_autocorr(coeffs, ts, tol=DEFAULT_TOL):
    """A at every time in ts; returns (values, defects, bound).

    Uniformly spaced sweeps of at least NUFFT_MIN_POINTS samples go through a
    nonuniform FFT (bound widened by NUFFT_BOUND); anything else is summed
    point by point. Samples at exactly t = 0 are A(0) = norm_sq.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.size >= NUFFT_MIN_POINTS and _is_uniform(ts):
        dt = (ts[-1] - ts[0]) / (ts.size - 1)
        vals, bound = _uniform_sweep(coeffs, ts[0], dt, ts.size, tol)
        vals[ts == 0.0] = coeffs.norm_sq
        return vals, coeffs.norm_sq - vals, bound
    vals = np.empty(ts.size, dtype=complex)
    defects = np.empty(ts.size, dtype=complex)
    bound = 0.0
    for i, t in enumerate(ts):
        sv = eval_autocorr(coeffs, float(t), tol)
        vals[i], defects[i] = sv.value, sv.defect
        bound = max(bound, sv.truncation_bound)
    return vals, defects, bound


def _twosum_into(total, carry, part):
    s = total + part
    bp = s - total
    carry += (total - (s - bp)) + (part - bp)
    total[:] = s


def autocorr_on_period_grid(coeffs: SpectralCoefficients, m, tol=DEFAULT_TOL, chunk=CHUNK):
    """A(t_j) at t_j = 2 pi j / m, j = 0..m-1, for integer energies.

    exp(-i E_n t_j) depends only on E_n mod m, so the weights are folded
    into m residue classes and one FFT gives all samples. The weight beyond
    the cutoff is credited to class 0, which makes A(0) = norm_sq exactly and
    matches the pointwise assembly. Returns (t, values, bound).
    """
    n_max, bound = _cutoff(coeffs, tol, None)
    m = int(m)
    total = np.zeros(m)
    carry = np.zeros(m)
    step = 2 if (coeffs.odd_only and coeffs.energy != LINEAR) else 1
    span = chunk * step
    w = coeffs.weights
    for start in range(1, n_max + 1, span):
        n = np.arange(start, min(start + span, n_max + 1), step, dtype=np.int64)
        r = n % m
        if coeffs.energy == LINEAR:
            part = np.bincount(r, weights=w(n), minlength=m)
            part += np.bincount((-n) % m, weights=w(-n), minlength=m)
        else:
            part = np.bincount((r * r) % m, weights=w(n), minlength=m)
        _twosum_into(total, carry, part)
    if coeffs.energy == LINEAR:
        total[0] += float(w(np.zeros(1, dtype=np.int64))[0])
    folded = total + carry
    folded[0] += coeffs.norm_sq - math.fsum(folded)
    t = 2.0 * np.pi * np.arange(m) / m
    return t, np.fft.fft(folded), bound


def _harmonic_tail(spec: HarmonicSumSpec, x, tol):
    """(n_max, bound) for a harmonic sum, rounding allowance included."""
    tail = PowerTail(1.0, spec.mu, odd_only=spec.odd_only)
    # total weight sum n^-mu <= 1 + 1/(mu - 1)
    slack = ROUNDING * (1.0 + 1.0 / (spec.mu - 1.0))
    if not tol > 2.0 * slack:
        raise UnreachableToleranceError(f"tol {tol:g} is below the rounding floor {2.0 * slack:.2g}")
    target = tol - slack
    if spec.phase_kernel != LINEAR_SINE:
        n_abs = tail.cutoff(target)
        return n_abs, tail.weight_beyond(n_abs) + slack
    # partial sums of sin(nx) are bounded by 1/|sin(x/2)|
    half = abs(math.sin(0.5 * x))
    n_dir = math.inf
    if half > 0.0:
        n_dir = max(1, int(math.ceil((1.0 / (half * target)) ** (1.0 / spec.mu))))
    try:
        n_abs = tail.cutoff(target)
    except UnreachableToleranceError:
        if n_dir is math.inf:
            raise
        n_abs = math.inf
    if n_dir < n_abs:
        return n_dir, (n_dir + 1.0) ** -spec.mu / half + slack
    return n_abs, tail.weight_beyond(n_abs) + slack


def eval_harmonic(spec: HarmonicSumSpec, x, tol=DEFAULT_TOL) -> SeriesValue:
    """f1, f2 or f3 at x with a certified truncation bound."""
    x = float(x)
    if not tol > 0:
        raise ParameterDomainError("tol must be positive")
    n_max, bound = _harmonic_tail(spec, x, tol)
    mu = spec.mu

    def w(n):
        return n.astype(float) ** -mu

    if spec.phase_kernel == LINEAR_SINE:
        _, s, _ = _oscillatory_sum(w, None, n_max, x, quadratic=False)
        return SeriesValue(complex(s, 0.0), bound, n_max)
    c, s, v = _oscillatory_sum(w, None, n_max, x, quadratic=True, odd_only=spec.odd_only, square_t=True)
    terms = (n_max + 1) // 2 if spec.odd_only else n_max
    return SeriesValue(complex(c, -s), bound, terms, complex(v, s))


def eval_d(t, tol=DEFAULT_TOL) -> SeriesValue:
    """D(t) = sum over odd n of exp(-i n^2 t) / n^2."""
    n_max, bound = _harmonic_tail(f2(2.0), 0.0, tol)
    c, s, v = _oscillatory_sum(lambda n: n.astype(float) ** -2.0, None, n_max, t, quadratic=True, odd_only=True)
    return SeriesValue(complex(c, -s), bound, (n_max + 1) // 2, complex(v, s))


def eval_riemann(t, tol=DEFAULT_TOL) -> float:
    """R(t) = sum sin(n^2 t) / n^2, within tol of the exact value."""
    n_max, _ = _harmonic_tail(f1(2.0), 0.0, tol)
    _, s, _ = _oscillatory_sum(lambda n: n.astype(float) ** -2.0, None, n_max, t, quadratic=True)
    return s


def eval_bloch(alpha, t, tol=DEFAULT_TOL) -> SeriesValue:
    """B(t) from its two-sided series, truncated symmetrically."""
    return eval_autocorr(builtin_coefficients(BuiltinState("bloch", alpha=alpha)), t, tol)


def bloch_closed(alpha, t) -> complex:
    """Closed form of B(t), with t reduced into [0, 2 pi)."""
    alpha = float(alpha)
    if alpha == math.floor(alpha):
        raise ParameterDomainError(f"bloch needs a non-integer alpha, got {alpha}")
    two_pi = 2.0 * math.pi
    tr = math.fmod(float(t), two_pi)
    if tr < 0:
        tr += two_pi
    jump = 1.0 - complex(math.cos(two_pi * alpha), -math.sin(two_pi * alpha))
    return (1.0 - jump * tr / two_pi) * complex(math.cos(alpha * tr), math.sin(alpha * tr))
