"""Real-argument Riemann zeta, gamma and digamma functions.

These are needed for Mellin residues, where the arguments are real and the
coefficients must come out to ~1e-12 relative accuracy. Only double precision
is used.
"""

import math
from functools import lru_cache

from .errors import PoleError

EULER_GAMMA = 0.57721566490153286061

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_BORWEIN_TERMS = 48


def _is_nonpositive_integer(x):
    return x <= 0 and x == math.floor(x)


def sinpi(x):
    """sin(pi*x) with exact zeros at the integers."""
    r = math.fmod(x, 2.0)
    if r < 0:
        r += 2.0
    if r == 0.0 or r == 1.0:
        return 0.0
    if r == 0.5:
        return 1.0
    if r == 1.5:
        return -1.0
    if r > 1.0:
        return -math.sin(math.pi * (r - 1.0))
    if r > 0.5:
        r = 1.0 - r
    return math.sin(math.pi * r)


def cospi(x):
    """cos(pi*x) with exact zeros at the half-integers."""
    return sinpi(x + 0.5) if abs(x) < 2**51 else math.cos(math.pi * x)


def gamma_real(s):
    """Gamma function on the real line (Lanczos with reflection)."""
    s = float(s)
    if _is_nonpositive_integer(s):
        raise PoleError(f"gamma has a pole at s = {s:g}", s)
    if s < 0.5:
        return math.pi / (sinpi(s) * gamma_real(1.0 - s))
    z = s - 1.0
    acc = _LANCZOS_P[0]
    for k in range(1, len(_LANCZOS_P)):
        acc += _LANCZOS_P[k] / (z + k)
    base = z + _LANCZOS_G + 0.5
    # split the power to delay overflow for large s
    half = base ** ((z + 0.5) / 2)
    return math.sqrt(2 * math.pi) * half * half * math.exp(-base) * acc


def digamma(s):
    """Logarithmic derivative of gamma for real s."""
    s = float(s)
    if _is_nonpositive_integer(s):
        raise PoleError(f"digamma has a pole at s = {s:g}", s)
    if s < 0.5:
        # psi(1 - s) - psi(s) = pi cot(pi s)
        return digamma(1.0 - s) - math.pi * cospi(s) / sinpi(s)
    shift = 0.0
    while s < 12.0:
        shift -= 1.0 / s
        s += 1.0
    inv2 = 1.0 / (s * s)
    series = inv2 * (1 / 12 - inv2 * (1 / 120 - inv2 * (1 / 252 - inv2 * (1 / 240 - inv2 * (1 / 132)))))
    return shift + math.log(s) - 0.5 / s - series


@lru_cache(maxsize=None)
def _borwein_d(n):
    # d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), kept exact until the end
    total = 0
    out = []
    for i in range(n + 1):
        total += math.factorial(n + i - 1) * 4**i * n // (math.factorial(n - i) * math.factorial(2 * i))
        out.append(total)
    return tuple(float(d) for d in out)


def _eta(s):
    """Dirichlet eta function for s > 0 (Borwein's accelerated alternating sum)."""
    n = _BORWEIN_TERMS
    d = _borwein_d(n)
    dn = d[n]
    acc = 0.0
    for k in range(n):
        term = (d[k] - dn) / (k + 1) ** s
        acc += -term if k % 2 else term
    return -acc / dn


def zeta_real(s):
    """Riemann zeta function for real s != 1.

    Uses the eta series for s > 0 and the functional equation otherwise.
    Trivial zeros are returned as exact zeros.
    """
    s = float(s)
    if s == 1.0:
        raise PoleError("zeta has a pole at s = 1", 1.0)
    if s == 0.0:
        return -0.5
    if s < 0:
        if s == math.floor(s) and int(s) % 2 == 0:
            return 0.0
        one_minus = 1.0 - s
        return (
            2.0**s
            * math.pi ** (s - 1.0)
            * sinpi(s / 2)
            * gamma_real(one_minus)
            * zeta_real(one_minus)
        )
    if s > 60:
        return 1.0 + 2.0**-s + 3.0**-s
    # 1 - 2^(1-s) written with expm1 keeps full precision close to s = 1
    return _eta(s) / -math.expm1((1.0 - s) * math.log(2.0))
