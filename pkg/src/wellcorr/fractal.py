"""Box-counting dimension of sampled graphs and short-time power-law fits."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ChannelError, ParameterDomainError, ScaleError
from .series import DEFAULT_TOL, autocorr_on_period_grid, eval_autocorr
from .spectral import SpectralCoefficients, format_float

MIN_DIMENSION_SAMPLES = 2**14

# Channels of an autocorrelation function. The "1-" and "-" variants are the
# positive short-time defects used for power-law fits.
CHANNELS = ("re", "im", "abs2", "1-re", "-im", "1-abs2")


@dataclass(frozen=True)
class SampledGraph:
    t: np.ndarray
    values: np.ndarray
    channel: str = "re"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size < 2:
            raise ParameterDomainError("t and values must be equal-length 1-d arrays with >= 2 samples")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def spacing(self):
        return (self.t[-1] - self.t[0]) / (self.t.size - 1)

    def is_uniform(self, rtol=1e-12):
        # tolerance sits just above linspace rounding for t ranges of order 2 pi
        d = np.diff(self.t)
        return bool(np.all(np.abs(d - self.spacing) <= rtol * max(abs(self.t[-1]), abs(self.t[0]), self.spacing)))


@dataclass(frozen=True)
class BoxCountReport:
    scales: np.ndarray
    counts: np.ndarray
    fitted_dimension: float
    fit_residual: float

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "count"])
        for e, c in zip(self.scales, self.counts):
            w.writerow([format_float(e), int(c)])
        return buf.getvalue()

    def summary_json(self):
        return json.dumps(
            {"fitted_dimension": self.fitted_dimension, "fit_residual": self.fit_residual}, sort_keys=True
        )


def channel_values(values, defects, channel):
    """Map complex A (and its defect A(0) - A) onto a real channel."""
    if channel == "re":
        return values.real
    if channel == "im":
        return values.imag
    if channel == "abs2":
        return np.abs(values) ** 2
    if channel == "1-re":
        return defects.real
    if channel == "-im":
        return -values.imag
    if channel == "1-abs2":
        # 1 - |1 - D|^2 = 2 Re D - |D|^2 without cancellation near t = 0
        return 2.0 * defects.real - np.abs(defects) ** 2
    raise ChannelError(f"unknown channel {channel!r}; expected one of {', '.join(CHANNELS)}")


def sample_graph(coeffs: SpectralCoefficients, t, channel, tol=DEFAULT_TOL) -> SampledGraph:
    """Evaluate a channel of A at the given times (one certified sum each)."""
    t = np.asarray(t, dtype=float)
    vals = np.empty(t.size, dtype=complex)
    defs = np.empty(t.size, dtype=complex)
    for i, ti in enumerate(t):
        sv = eval_autocorr(coeffs, ti, tol)
        vals[i], defs[i] = sv.value, sv.defect
    return SampledGraph(t, channel_values(vals, defs, channel), channel)


def period_graph(coeffs: SpectralCoefficients, samples, channel="re", tol=1e-7) -> SampledGraph:
    """A channel of A on ``samples`` uniform points covering [0, 2 pi].

    The last sample closes the period (t = 2 pi, same value as t = 0).
    """
    m = int(samples) - 1
    t, vals, _ = autocorr_on_period_grid(coeffs, m, tol)
    t = np.append(t, 2.0 * np.pi)
    vals = np.append(vals, vals[0])
    if channel.startswith("1-") or channel == "-im":
        defs = coeffs.norm_sq - vals
    else:
        defs = None
    return SampledGraph(t, channel_values(vals, defs, channel), channel)


def _column_counts(y, k):
    """Boxes met by the polyline when columns span k sample intervals.

    Inside a column the polyline is continuous, so it meets every box
    between its lowest and highest point; column edges fall on samples.
    """
    n_cols = (y.size - 1) // k
    used = n_cols * k + 1
    starts = np.arange(0, used - 1, k)
    # each column owns samples [j k, (j+1) k]; reduceat over [j k, (j+1) k) then fold in the right edge
    lo = np.minimum.reduceat(y[: used - 1], starts)
    hi = np.maximum.reduceat(y[: used - 1], starts)
    right = y[starts + k]
    lo = np.minimum(lo, right)
    hi = np.maximum(hi, right)
    return lo, hi


def box_count_dimension(g: SampledGraph, scale_range: Optional[Tuple[float, float]] = None, n_scales=12,
                        fit_slice=slice(2, 10)) -> BoxCountReport:
    """Box-counting dimension of the polyline through the samples.

    Both axes are rescaled to the unit square before counting. Scales are
    box sides in these units, always whole multiples of the sample spacing;
    ``scale_range`` is (eps_max, eps_min) and defaults to the widest range
    the preconditions allow. The fit uses the middle scales (``fit_slice``).
    """
    if g.t.size < MIN_DIMENSION_SAMPLES:
        raise ScaleError(f"dimension estimates need at least {MIN_DIMENSION_SAMPLES} samples, got {g.t.size}")
    if not g.is_uniform():
        raise ScaleError("samples must be uniformly spaced")
    intervals = g.t.size - 1
    h = 1.0 / intervals
    if scale_range is None:
        scale_range = (1.0 / 8.0, 4.0 * h)
    eps_max, eps_min = scale_range
    if eps_min < 4.0 * h * (1 - 1e-12) or eps_max > 1.0 / 8.0 * (1 + 1e-12) or not eps_max > eps_min:
        raise ScaleError(
            f"scale range ({eps_max:g}, {eps_min:g}) must satisfy 4*spacing <= eps_min < eps_max <= 1/8"
        )
    span = g.values.max() - g.values.min()
    y = (g.values - g.values.min()) / span if span > 0 else np.zeros_like(g.values)
    ks = np.unique(np.round(np.geomspace(eps_max / h, eps_min / h, n_scales)).astype(int))[::-1]
    ks = ks[(ks * h >= eps_min * (1 - 1e-12)) & (ks * h <= eps_max * (1 + 1e-12))]
    scales, counts = [], []
    for k in ks:
        eps = k * h
        lo, hi = _column_counts(y, k)
        count = np.floor(hi / eps) - np.floor(lo / eps) + 1
        scales.append(eps)
        counts.append(int(count.sum()))
    scales = np.array(scales)
    counts = np.array(counts)
    sel = slice(None) if len(scales) <= 4 else fit_slice
    x = np.log(scales[sel])
    yy = np.log(counts[sel])
    coef, res, *_ = np.polyfit(x, yy, 1, full=True)
    resid = float(math.sqrt(res[0] / x.size)) if res.size else 0.0
    return BoxCountReport(scales, counts, float(-coef[0]), resid)


def power_law_fit(g: SampledGraph, window: Tuple[float, float]):
    """Least-squares fit of log(value) = p log(t) + log(c) over the window.

    Returns (p, c).
    """
    ta, tb = window
    sel = (g.t >= ta) & (g.t <= tb)
    if sel.sum() < 2:
        raise ParameterDomainError(f"fewer than two samples in window [{ta:g}, {tb:g}]")
    v = g.values[sel]
    if np.any(v <= 0):
        raise ChannelError(f"channel {g.channel!r} is not positive on [{ta:g}, {tb:g}]")
    p, logc = np.polyfit(np.log(g.t[sel]), np.log(v), 1)
    return float(p), float(math.exp(logc))


def sliding_slopes(g: SampledGraph, width_decades=0.5):
    """Local log-log slope at each sample, fitted over a centred window.

    Returns (t_centres, slopes) for centres whose whole window is sampled.
    """
    lt = np.log10(g.t)
    half = width_decades / 2.0
    centres, slopes = [], []
    for c in lt:
        if c - half < lt[0] - 1e-12 or c + half > lt[-1] + 1e-12:
            continue
        sel = (lt >= c - half) & (lt <= c + half)
        if sel.sum() < 3:
            continue
        p, _ = np.polyfit(lt[sel], np.log10(g.values[sel]), 1)
        centres.append(10**c)
        slopes.append(p)
    return np.array(centres), np.array(slopes)


@dataclass(frozen=True)
class Plateau:
    t_start: float
    t_end: float
    slope: float


def slope_plateaus(g: SampledGraph, width_decades=0.5, spread=0.05, min_decades=0.2) -> List[Plateau]:
    """Maximal runs of the sliding slope whose range stays below ``spread``.

    Runs shorter than ``min_decades`` in t are discarded. Ordered by t.
    """
    tc, sl = sliding_slopes(g, width_decades)
    out = []
    i = 0
    while i < sl.size:
        j = i
        lo = hi = sl[i]
        while j + 1 < sl.size and max(hi, sl[j + 1]) - min(lo, sl[j + 1]) < spread:
            j += 1
            lo, hi = min(lo, sl[j]), max(hi, sl[j])
        if math.log10(tc[j] / tc[i]) >= min_decades:
            out.append(Plateau(float(tc[i]), float(tc[j]), float(np.mean(sl[i : j + 1]))))
            i = j + 1
        else:
            i += 1
    return out
