"""Autocorrelation functions of infinite-square-well states.

Modules:
    spectral  initial states and their eigenbasis coefficients
    series    certified summation of the oscillatory series
    mellin    short-time expansions by Mellin residue calculus
    fractal   box-counting dimensions and power-law fits
    cli       the ``wellcorr`` command
"""

from .errors import WellcorrError
from .fractal import (
    BoxCountReport,
    SampledGraph,
    box_count_dimension,
    period_graph,
    power_law_fit,
    sample_graph,
    slope_plateaus,
)
from .mellin import AsymptoticExpansion, PoleDescriptor, autocorr_expansion, enumerate_poles, expand
from .series import (
    HarmonicSumSpec,
    SeriesValue,
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
from .spectral import (
    BuiltinState,
    PiecewisePolynomial,
    SpectralCoefficients,
    builtin_coefficients,
    decay_exponent_fit,
    decompose_piecewise,
    evaluate_state,
    piecewise_coefficients,
)

__version__ = "0.1.0"
