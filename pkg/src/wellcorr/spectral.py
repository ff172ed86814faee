"""Initial states of the infinite square well and their eigenbasis coefficients.

The well occupies (0, pi) with eigenfunctions sqrt(2/pi) sin(n x) and
energies n**2. The Bloch-quench weights use the integer-frequency basis
instead (energies n, n running over all integers).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .accumulate import NeumaierSum
from .errors import (
    InsufficientDataError,
    ParameterDomainError,
    StateFileError,
    UnknownStateError,
    UnreachableToleranceError,
)
from .special import zeta_real

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

QUADRATIC = "quadratic"  # E_n = n**2, n >= 1
LINEAR = "linear"  # E_n = n, n in Z

STATE_TAGS = ("psi1", "psi2", "psi3", "psi4", "chibeta", "bloch")


@dataclass(frozen=True)
class PiecewisePolynomial:
    """Real polynomial pieces covering (0, pi).

    ``pieces`` is a sequence of ``(a, b, coeffs)`` with coefficients in
    ascending powers of x.
    """

    pieces: tuple

    def __post_init__(self):
        pieces = tuple((float(a), float(b), tuple(float(c) for c in coeffs)) for a, b, coeffs in self.pieces)
        if not pieces:
            raise ParameterDomainError("a piecewise polynomial needs at least one piece")
        tol = 1e-12
        if abs(pieces[0][0]) > tol or abs(pieces[-1][1] - math.pi) > tol:
            raise ParameterDomainError("pieces must cover (0, pi) exactly")
        for (a, b, coeffs), nxt in zip(pieces, pieces[1:] + (None,)):
            if not b > a:
                raise ParameterDomainError(f"empty or reversed interval [{a}, {b})")
            if not coeffs:
                raise ParameterDomainError("each piece needs at least one coefficient")
            if nxt is not None and abs(nxt[0] - b) > tol:
                raise ParameterDomainError("intervals must be contiguous and ordered")
        object.__setattr__(self, "pieces", pieces)

    def __call__(self, x):
        x = float(x)
        for a, b, coeffs in self.pieces:
            if a <= x < b:
                return _horner(coeffs, x)
        a, b, coeffs = self.pieces[-1]
        return _horner(coeffs, x)

    def to_json(self):
        return json.dumps(
            {"pieces": [{"a": a, "b": b, "coeffs": list(c)} for a, b, c in self.pieces]}
        )

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
            pieces = [(p["a"], p["b"], p["coeffs"]) for p in doc["pieces"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise StateFileError(f"malformed state document: {exc}") from exc
        try:
            return cls(tuple(pieces))
        except (ParameterDomainError, TypeError, ValueError) as exc:
            raise StateFileError(f"invalid state document: {exc}") from exc


def _horner(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class PowerTail:
    """Dominating envelope |c_n|^2 <= amplitude * (|n| - shift)^-power.

    ``odd_only`` means only odd n carry weight; ``two_sided`` means the
    modes run over n in Z and the envelope is applied on both sides.
    """

    amplitude: float
    power: float
    odd_only: bool = False
    two_sided: bool = False
    shift: float = 0.0

    def weight_beyond(self, n_max):
        """Upper bound on the summed weight of all modes with |n| > n_max."""
        p = self.power
        if self.two_sided:
            if n_max <= self.shift:
                return math.inf
            return 2.0 * self.amplitude * (n_max - self.shift) ** (1.0 - p) / (p - 1.0)
        if self.odd_only:
            if n_max < 2:
                return math.inf
            return 0.5 * self.amplitude * (n_max - 1.0) ** (1.0 - p) / (p - 1.0)
        return self.amplitude * float(n_max) ** (1.0 - p) / (p - 1.0)

    def cutoff(self, tol):
        """Smallest practical n_max with ``weight_beyond(n_max) <= tol``."""
        p = self.power
        scale = self.amplitude / ((p - 1.0) * tol)
        if self.two_sided:
            guess = self.shift + (2.0 * scale) ** (1.0 / (p - 1.0))
        elif self.odd_only:
            guess = 1.0 + (0.5 * scale) ** (1.0 / (p - 1.0))
        else:
            guess = scale ** (1.0 / (p - 1.0))
        if not math.isfinite(guess) or guess > 2**62:
            raise UnreachableToleranceError(f"tolerance {tol:g} needs more than 2^62 terms")
        n = max(int(math.ceil(guess)), 2 if self.odd_only else 1)
        while self.weight_beyond(n) > tol:
            n += 1
        return n


@dataclass(frozen=True)
class SpectralCoefficients:
    """Eigenbasis coefficients c_n of a state.

    Either ``generator`` (vectorised closed form n -> c_n) or ``prefix``
    (c_1..c_N, zero beyond) is set. ``energy`` selects the spectrum the
    autocorrelation series runs over; for the linear rule n ranges over Z.
    """

    label: str
    norm_sq: float
    generator: Optional[Callable[[np.ndarray], np.ndarray]] = None
    prefix: Optional[np.ndarray] = None
    energy: str = QUADRATIC
    odd_only: bool = False
    tail: Optional[PowerTail] = None
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        if (self.generator is None) == (self.prefix is None):
            raise ValueError("exactly one of generator / prefix must be given")
        if self.prefix is not None:
            arr = np.array(self.prefix, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, "prefix", arr)

    @property
    def two_sided(self):
        return self.energy == LINEAR

    def __call__(self, n):
        """c_n for an integer array (or scalar) n."""
        n_arr = np.asarray(n, dtype=np.int64)
        if self.prefix is not None:
            out = np.zeros(n_arr.shape)
            ok = (n_arr >= 1) & (n_arr <= len(self.prefix))
            out[ok] = self.prefix[n_arr[ok] - 1]
            return out if out.ndim else float(out)
        out = self.generator(n_arr)
        return out if np.ndim(out) else float(out)

    def weights(self, n):
        """|c_n|^2, using a dedicated closed form where one exists."""
        if self.weight is not None:
            return self.weight(np.asarray(n, dtype=np.int64))
        return np.square(self(n))

    def is_zero(self, n):
        """Exact-zero mask from the closed form (parity) or stored values."""
        n_arr = np.asarray(n, dtype=np.int64)
        if self.prefix is not None:
            return self(n_arr) == 0.0
        if self.odd_only:
            return n_arr % 2 == 0
        return np.zeros(n_arr.shape, dtype=bool)

    def mode(self, k):
        """Mode index of the k-th element (k >= 1) of the one-sided enumeration.

        Well states enumerate n = k. Two-sided sequences are listed as
        0, 1, -1, 2, -2, ...
        """
        k = np.asarray(k, dtype=np.int64)
        if not self.two_sided:
            return k
        return np.where(k % 2 == 0, k // 2, -(k // 2))

    def prefix_norm_sq(self, n_max):
        n = np.arange(1, n_max + 1)
        return float(np.sum(self.weights(self.mode(n))))


@dataclass(frozen=True)
class BuiltinState:
    tag: str
    beta: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        tag = self.tag.lower()
        if tag not in STATE_TAGS:
            raise UnknownStateError(f"unknown state {self.tag!r}; expected one of {', '.join(STATE_TAGS)}")
        object.__setattr__(self, "tag", tag)
        if tag == "chibeta":
            if self.beta is None or not 0.0 < self.beta < 0.5:
                raise ParameterDomainError(f"chibeta needs 0 < beta < 1/2, got {self.beta}")
        if tag == "bloch":
            if self.alpha is None or not math.isfinite(self.alpha) or self.alpha == math.floor(self.alpha):
                raise ParameterDomainError(f"bloch needs a non-integer alpha, got {self.alpha}")


def _odd_sign(n):
    # sin(n pi / 2) evaluated exactly on the integers
    r = np.mod(n, 4)
    return np.where(r == 1, 1.0, np.where(r == 3, -1.0, 0.0))


def builtin_coefficients(state: BuiltinState) -> SpectralCoefficients:
    tag = state.tag
    if tag == "psi1":
        k = math.sqrt(6.0) / math.pi
        return SpectralCoefficients(
            label="psi1",
            norm_sq=1.0,
            generator=lambda n: k / n,
            weight=lambda n: (6.0 / math.pi**2) / np.square(n.astype(float)),
            tail=PowerTail(6.0 / math.pi**2, 2.0),
        )
    if tag == "psi2":
        k = 4.0 * math.sqrt(6.0) / math.pi**2
        return SpectralCoefficients(
            label="psi2",
            norm_sq=1.0,
            generator=lambda n: k * _odd_sign(n) / np.square(n.astype(float)),
            weight=lambda n: (n % 2) * (96.0 / math.pi**4) / n.astype(float) ** 4,
            odd_only=True,
            tail=PowerTail(96.0 / math.pi**4, 4.0, odd_only=True),
        )
    if tag == "psi3":
        k = 8.0 * math.sqrt(15.0) / math.pi**3
        return SpectralCoefficients(
            label="psi3",
            norm_sq=1.0,
            generator=lambda n: (n % 2) * k / n.astype(float) ** 3,
            weight=lambda n: (n % 2) * (960.0 / math.pi**6) / n.astype(float) ** 6,
            odd_only=True,
            tail=PowerTail(960.0 / math.pi**6, 6.0, odd_only=True),
        )
    if tag == "psi4":
        n = np.arange(1, 21, dtype=float)
        raw = math.sqrt(6.0) / (n * math.pi)
        return SpectralCoefficients(label="psi4", norm_sq=1.0, prefix=raw / math.sqrt(math.fsum(raw**2)))
    if tag == "chibeta":
        beta = float(state.beta)
        z = zeta_real(2.0 + 2.0 * beta)
        amp = 1.0 / math.sqrt(z)
        return SpectralCoefficients(
            label=f"chibeta({beta:g})",
            norm_sq=1.0,
            generator=lambda n: amp / n.astype(float) ** (1.0 + beta),
            weight=lambda n: (1.0 / z) / n.astype(float) ** (2.0 + 2.0 * beta),
            tail=PowerTail(1.0 / z, 2.0 + 2.0 * beta),
        )
    # bloch
    alpha = float(state.alpha)
    s = math.sin(math.pi * alpha) / math.pi
    return SpectralCoefficients(
        label=f"bloch({alpha:g})",
        norm_sq=1.0,
        generator=lambda n: s / (n + alpha),
        weight=lambda n: s * s / np.square(n + alpha),
        energy=LINEAR,
        tail=PowerTail(s * s, 2.0, two_sided=True, shift=abs(alpha)),
    )


def piecewise_form(state: BuiltinState) -> PiecewisePolynomial:
    """Exact polynomial pieces of psi1, psi2 or psi3."""
    pi = math.pi
    if state.tag == "psi1":
        a = math.sqrt(3.0 / pi**3)
        return PiecewisePolynomial(((0.0, pi, (a * pi, -a)),))
    if state.tag == "psi2":
        a = math.sqrt(12.0 / pi**3)
        return PiecewisePolynomial(((0.0, pi / 2, (0.0, a)), (pi / 2, pi, (a * pi, -a))))
    if state.tag == "psi3":
        a = math.sqrt(30.0 / pi**5)
        return PiecewisePolynomial(((0.0, pi, (0.0, a * pi, -a)),))
    raise ParameterDomainError(f"{state.tag} has no piecewise-polynomial form")


def _sine_moment_antiderivatives(k_max, n, x):
    """Antiderivatives of x^k sin(n x) for k = 0..k_max, evaluated at x.

    Uses the integration-by-parts pair
        S_k = -x^k cos(nx)/n + k/n C_{k-1},   C_k = x^k sin(nx)/n - k/n S_{k-1}.
    """
    n = n.astype(float)
    c, s = np.cos(n * x), np.sin(n * x)
    S = [-c / n]
    C = [s / n]
    for k in range(1, k_max + 1):
        xk = x**k
        S.append(-xk * c / n + k / n * C[k - 1])
        C.append(xk * s / n - k / n * S[k - 1])
    return S


def _piecewise_sine_coefficients(psi: PiecewisePolynomial, n):
    """c_n for an int64 array n, with rounding-level results snapped to 0.

    A coefficient smaller than a few ulps of the summed magnitudes of its
    contributions is indistinguishable from zero (parity cancellations).
    """
    c = np.zeros(n.shape)
    scale = np.zeros(n.shape)
    for a, b, coeffs in psi.pieces:
        k_max = len(coeffs) - 1
        hi = _sine_moment_antiderivatives(k_max, n, b)
        lo = _sine_moment_antiderivatives(k_max, n, a)
        for k, ak in enumerate(coeffs):
            if ak:
                for part in (hi[k], lo[k]):
                    scale += np.abs(ak * part)
                c += ak * (hi[k] - lo[k])
    c[np.abs(c) <= 16.0 * np.finfo(float).eps * scale] = 0.0
    return SQRT_2_OVER_PI * c


def decompose_piecewise(psi: PiecewisePolynomial, n_max: int) -> SpectralCoefficients:
    """c_1..c_N of a piecewise polynomial, from exact antiderivatives."""
    if n_max < 1:
        raise ParameterDomainError("need at least one coefficient")
    c = _piecewise_sine_coefficients(psi, np.arange(1, n_max + 1, dtype=np.int64))
    return SpectralCoefficients(label="piecewise", norm_sq=float(math.fsum(c * c)), prefix=c)


def _poly_variation(coeffs, a, b):
    """Total variation of a polynomial on [a, b]."""
    p = np.polynomial.Polynomial(coeffs)
    stops = [a, b]
    if len(coeffs) > 2:
        for r in p.deriv().roots():
            if abs(r.imag) < 1e-12 and a < r.real < b:
                stops.append(r.real)
    stops.sort()
    return sum(abs(p(y) - p(x)) for x, y in zip(stops, stops[1:]))


def piecewise_coefficients(psi: PiecewisePolynomial, label="piecewise") -> SpectralCoefficients:
    """Generator-backed coefficients of a piecewise polynomial state.

    ``norm_sq`` is the exact integral of psi^2. One integration by parts
    gives |c_n| <= sqrt(2/pi) V / n, with V the total variation of psi on
    (0, pi) plus its jumps (including those to zero at the walls); this is
    the certified tail envelope.
    """
    norm = 0.0
    var = 0.0
    prev_end = 0.0
    for a, b, coeffs in psi.pieces:
        p = np.polynomial.Polynomial(coeffs)
        sq = (p * p).integ()
        norm += sq(b) - sq(a)
        var += abs(p(a) - prev_end) + _poly_variation(coeffs, a, b)
        prev_end = p(b)
    var += abs(prev_end)
    if not norm > 0:
        raise ParameterDomainError("the state vanishes identically")
    amp = float(2.0 / math.pi * var * var)
    return SpectralCoefficients(
        label=label,
        norm_sq=float(norm),
        generator=lambda n: _piecewise_sine_coefficients(psi, np.asarray(n, dtype=np.int64)),
        tail=PowerTail(amp, 2.0) if amp > 0 else None,
    )


def decay_exponent_fit(coeffs: SpectralCoefficients, n_min: int, n_max: int) -> float:
    """Least-squares slope of log|c_n| against log n, skipping exact zeros."""
    n = np.arange(n_min, n_max + 1, dtype=np.int64)
    keep = ~coeffs.is_zero(n)
    n = n[keep]
    if n.size < 3:
        raise InsufficientDataError(f"only {n.size} nonzero coefficients in [{n_min}, {n_max}]")
    y = np.log(np.abs(coeffs(n)))
    slope, _ = np.polyfit(np.log(n.astype(float)), y, 1)
    return float(slope)


def chi_beta_terms(beta, x, tol):
    """Terms needed so the chi_beta partial sum at x is within tol.

    Takes the smaller of the absolute bound N^-beta/beta and the Dirichlet
    bound N^-(1+beta)/sin(x/2) (partial sums of sin(nx) are bounded by
    1/sin(x/2) for 0 < x < 2 pi).
    """
    pref = SQRT_2_OVER_PI / math.sqrt(zeta_real(2.0 + 2.0 * beta))
    target = tol / pref
    candidates = [(1.0 / (beta * target)) ** (1.0 / beta)]
    half = math.sin(x / 2.0)
    if half > 0:
        candidates.append((1.0 / (half * target)) ** (1.0 / (1.0 + beta)))
    n = min(candidates)
    if n > 2**40:
        raise UnreachableToleranceError(f"chi_beta at x={x:g} needs {n:.3g} terms for tol {tol:g}")
    return max(1, int(math.ceil(n)))


def evaluate_state(state, x, n_terms=None, *, tol=1e-8, chunk=1 << 20):
    """psi(x) for a builtin or piecewise state.

    Piecewise states (psi1-3 and custom ones) are exact. Series states
    (chibeta, psi4) use the first ``n_terms`` sine modes; when ``n_terms`` is
    None for chibeta it is chosen from ``tol``.
    """
    x = float(x)
    if not 0.0 <= x <= math.pi:
        raise ParameterDomainError(f"x = {x} lies outside [0, pi]")
    if isinstance(state, PiecewisePolynomial):
        return state(x)
    if state.tag in ("psi1", "psi2", "psi3"):
        return piecewise_form(state)(x)
    if state.tag == "bloch":
        raise ParameterDomainError("the Bloch state has no square-well wave function")
    coeffs = builtin_coefficients(state)
    if n_terms is None:
        n_terms = 20 if state.tag == "psi4" else chi_beta_terms(state.beta, x, tol)
    acc = NeumaierSum()
    for start in range(1, n_terms + 1, chunk):
        n = np.arange(start, min(start + chunk, n_terms + 1), dtype=np.int64)
        acc.add(np.dot(coeffs(n), np.sin(n * x)))
    return SQRT_2_OVER_PI * acc.value


def coefficients_csv(coeffs: SpectralCoefficients, count: int) -> str:
    """``n,c_n`` table of the first ``count`` modes of the enumeration."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "c_n"])
    k = np.arange(1, count + 1)
    modes = coeffs.mode(k)
    for n, c in zip(modes, coeffs(modes)):
        writer.writerow([int(n), format_float(c)])
    return buf.getvalue()


def format_float(v):
    return format(float(v), ".17g")
