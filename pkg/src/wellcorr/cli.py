"""Command-line front end: ``wellcorr <command> [options]``.

Every command writes CSV or JSON (to ``--output`` or stdout). Floats are
printed with 17 significant digits, so identical invocations give identical
bytes. Failures print a JSON object on stderr and exit with the code listed
in ``wellcorr --help``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import errors
from .errors import ParameterDomainError, StateFileError, WellcorrError
from .fractal import (
    box_count_dimension,
    channel_values,
    period_graph,
    power_law_fit,
    sample_graph,
    slope_plateaus,
    SampledGraph,
)
from .mellin import DEFAULT_DEPTH, IM, RE, autocorr_expansion, eval_expansion, harmonic_form
from .series import DEFAULT_TOL, bloch_closed, eval_autocorr, eval_d, eval_riemann, sweep_autocorr
from .spectral import (
    STATE_TAGS,
    BuiltinState,
    PiecewisePolynomial,
    builtin_coefficients,
    coefficients_csv,
    decay_exponent_fit,
    evaluate_state,
    format_float,
    piecewise_coefficients,
)

COMMANDS = ("decompose", "autocorr", "asymptote", "fractal", "scaling", "bloch")

# user-facing channel -> positive short-time defect fitted by `scaling`
SCALING_CHANNELS = {"re": "1-re", "im": "-im", "abs2": "1-abs2"}

DEFAULT_FRACTAL_SAMPLES = 2**18 + 1
DEFAULT_FRACTAL_TOL = 1e-7
DEFAULT_SCALING_POINTS = 13
# relative accuracy of each scaling sample against its leading asymptotic term
SCALING_REL_TOL = 1e-2
# just above the summation rounding floor
SCALING_MIN_TOL = 1e-14


@dataclass(frozen=True)
class TRange:
    start: float
    stop: float
    count: int
    log: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise ParameterDomainError(f"range count must be >= 1, got {self.count}")
        if self.count > 1 and not self.start < self.stop:
            raise ParameterDomainError(f"range needs start < stop, got {self.start}:{self.stop}")
        if self.log and not self.start > 0:
            raise ParameterDomainError("log spacing needs a positive start")

    @classmethod
    def parse(cls, text, log=False):
        parts = text.split(":")
        try:
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ParameterDomainError(f"range {text!r} is not of the form start:stop:count") from None
        return cls(start, stop, count, log)

    def points(self):
        if self.count == 1:
            return np.array([self.start])
        if self.log:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


def parse_window(text):
    parts = text.split(":")
    try:
        if len(parts) != 2:
            raise ValueError
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise ParameterDomainError(f"window {text!r} is not of the form a:b") from None
    if not 0 < a < b:
        raise ParameterDomainError(f"window needs 0 < a < b, got {text!r}")
    return a, b


@dataclass(frozen=True)
class RunConfig:
    command: str
    state: Optional[str] = None
    beta: Optional[float] = None
    alpha: Optional[float] = None
    state_file: Optional[str] = None
    t_range: Optional[TRange] = None
    tol: Optional[float] = None
    depth: float = DEFAULT_DEPTH
    output: Optional[str] = None
    fmt: Optional[str] = None
    channel: str = "re"
    window: Optional[tuple] = None
    samples: int = DEFAULT_FRACTAL_SAMPLES
    count: int = 64
    fit_range: Optional[tuple] = None
    x_range: Optional[TRange] = None
    series: str = "A"
    plateaus: bool = False

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise ParameterDomainError(f"tol must be positive, got {self.tol}")
        if self.count < 1:
            raise ParameterDomainError(f"count must be >= 1, got {self.count}")


# ------------------------------------------------------------------ states


def resolve_state(cfg: RunConfig):
    """(label, BuiltinState | PiecewisePolynomial, SpectralCoefficients)."""
    if cfg.state_file is not None:
        if cfg.state is not None:
            raise ParameterDomainError("give either --state or --state-file, not both")
        try:
            with open(cfg.state_file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise StateFileError(f"cannot read state file: {exc}") from exc
        psi = PiecewisePolynomial.from_json(text)
        return cfg.state_file, psi, piecewise_coefficients(psi)
    if cfg.state is None:
        raise ParameterDomainError("a state is required (--state or --state-file)")
    st = BuiltinState(cfg.state, beta=cfg.beta, alpha=cfg.alpha)
    return st.tag, st, builtin_coefficients(st)


def _with_params(label, st):
    out = {"state": label}
    if isinstance(st, BuiltinState):
        if st.beta is not None:
            out["beta"] = st.beta
        if st.alpha is not None:
            out["alpha"] = st.alpha
    return out


# --------------------------------------------------------------- emitters


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, (int, str)) else format_float(v) for v in row])
    return buf.getvalue()


def _json(doc):
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def _require_fmt(cfg, default, allowed=("csv", "json")):
    fmt = cfg.fmt or default
    if fmt not in allowed:
        raise ParameterDomainError(f"{cfg.command} supports --format {' or '.join(allowed)}")
    return fmt


# --------------------------------------------------------------- commands


def cmd_decompose(cfg: RunConfig):
    label, st, coeffs = resolve_state(cfg)
    fmt = _require_fmt(cfg, "csv")
    if cfg.x_range is not None:
        xs = cfg.x_range.points()
        tol = cfg.tol or DEFAULT_TOL
        if isinstance(st, BuiltinState):
            vals = [evaluate_state(st, x, tol=tol) for x in xs]
        else:
            vals = [st(x) for x in xs]
        if fmt == "json":
            return _json({**_with_params(label, st), "x": list(map(float, xs)), "psi": list(map(float, vals))})
        return _csv(["x", "psi"], zip(xs, vals))
    if fmt == "csv":
        return coefficients_csv(coeffs, cfg.count)
    n_min, n_max = cfg.fit_range or (10, 10000)
    slope = decay_exponent_fit(coeffs, n_min, n_max)
    return _json({**_with_params(label, st), "decay_exponent": slope, "n_min": n_min, "n_max": n_max})


def _need_t(cfg):
    if cfg.t_range is None:
        raise ParameterDomainError(f"{cfg.command} needs --t start:stop:count")
    return cfg.t_range.points()


def cmd_autocorr(cfg: RunConfig):
    ts = _need_t(cfg)
    tol = cfg.tol or DEFAULT_TOL
    fmt = _require_fmt(cfg, "csv")
    if cfg.series == "A":
        _, _, coeffs = resolve_state(cfg)
        vals, _, bound = sweep_autocorr(coeffs, ts, tol)
        bounds = np.full(ts.size, bound)
        names = ("t", "re_A", "im_A", "abs2_A", "trunc_bound")
    elif cfg.series == "D":
        svs = [eval_d(t, tol) for t in ts]
        vals = np.array([sv.value for sv in svs])
        bounds = np.array([sv.truncation_bound for sv in svs])
        names = ("t", "re_D", "im_D", "abs2_D", "trunc_bound")
    else:
        vals = np.array([eval_riemann(t, tol) for t in ts], dtype=complex)
        rows = zip(ts, vals.real, np.full(ts.size, tol))
        if fmt == "json":
            return _json({"t": list(map(float, ts)), "R": list(map(float, vals.real)), "trunc_bound": tol})
        return _csv(["t", "R", "trunc_bound"], rows)
    abs2 = np.abs(vals) ** 2
    if fmt == "json":
        return _json({
            names[0]: list(map(float, ts)),
            names[1]: list(map(float, vals.real)),
            names[2]: list(map(float, vals.imag)),
            names[3]: list(map(float, abs2)),
            names[4]: list(map(float, bounds)),
        })
    return _csv(names, zip(ts, vals.real, vals.imag, abs2, bounds))


def cmd_asymptote(cfg: RunConfig):
    label, st, coeffs = resolve_state(cfg)
    if not isinstance(st, BuiltinState):
        raise ParameterDomainError("asymptotic expansions exist only for the builtin series states")
    harmonic_form(st)  # domain check before any work
    fmt = _require_fmt(cfg, "json")
    exps = {part: autocorr_expansion(st, part, cfg.depth) for part in (RE, IM)}
    if fmt == "json":
        return _json({**_with_params(label, st), "re": exps[RE].to_dict(), "im": exps[IM].to_dict()})
    # side-by-side table: series, leading term and full expansion
    ts = _need_t(cfg)
    tol = cfg.tol or DEFAULT_TOL
    lead = {part: exps[part].leading() for part in (RE, IM)}
    for part, lt in lead.items():
        if lt is None:
            raise ParameterDomainError(
                f"no nonconstant {part} term up to depth {cfg.depth:g}; increase --depth"
            )
    rows = []
    for t in ts:
        sv = eval_autocorr(coeffs, t, tol)
        row = [t]
        for part, pick in ((RE, lambda z: z.real), (IM, lambda z: z.imag)):
            e = exps[part]
            # constant term plus leading nonconstant term; both expansions are real-valued
            lt = lead[part]
            head = e.coefficient(0.0) + lt.coeff * t**lt.power * math.log(t) ** lt.log_power
            row += [pick(sv.value), head.real, complex(eval_expansion(e, t)).real]
        row.append(sv.truncation_bound)
        rows.append(row)
    return _csv(
        ["t", "re_series", "re_leading", "re_expansion", "im_series", "im_leading", "im_expansion", "trunc_bound"],
        rows,
    )


def cmd_fractal(cfg: RunConfig):
    _, _, coeffs = resolve_state(cfg)
    if cfg.channel not in ("re", "im", "abs2"):
        raise errors.ChannelError(f"fractal channel must be re, im or abs2, got {cfg.channel!r}")
    tol = cfg.tol or DEFAULT_FRACTAL_TOL
    fmt = _require_fmt(cfg, "json")
    if cfg.t_range is None:
        g = period_graph(coeffs, cfg.samples, cfg.channel, tol)
    else:
        ts = cfg.t_range.points()
        if cfg.t_range.log:
            raise ParameterDomainError("box counting needs linearly spaced samples")
        vals, defects, _ = sweep_autocorr(coeffs, ts, tol)
        g = SampledGraph(ts, channel_values(vals, defects, cfg.channel), cfg.channel)
    report = box_count_dimension(g)
    if fmt == "csv":
        return report.to_csv()
    return _json({"fitted_dimension": report.fitted_dimension, "fit_residual": report.fit_residual,
                  "samples": int(g.t.size), "channel": cfg.channel})


def scaling_tol(st, channel, t_min, cap=DEFAULT_TOL, rel=SCALING_REL_TOL):
    """Absolute tol giving every sample >= t_min a relative accuracy ``rel``.

    Uses the leading short-time term of the channel where an expansion is
    available; otherwise returns ``cap``.
    """
    if not isinstance(st, BuiltinState):
        return cap
    try:
        harmonic_form(st)
    except ParameterDomainError:
        return cap
    part = IM if channel == "-im" else RE
    # psi3's Re part has no nonconstant term below the default depth
    for depth in (DEFAULT_DEPTH, DEFAULT_DEPTH + 2):
        lt = autocorr_expansion(st, part, depth).leading()
        if lt is not None:
            break
    else:
        return cap
    size = abs(lt.coeff) * t_min**lt.power * abs(math.log(t_min)) ** lt.log_power
    # 1 - |A|^2 is about twice 1 - Re A at short times
    if channel == "1-abs2":
        size *= 2.0
    return min(cap, max(SCALING_MIN_TOL, rel * size))


def cmd_scaling(cfg: RunConfig):
    label, st, coeffs = resolve_state(cfg)
    if cfg.channel not in SCALING_CHANNELS:
        raise errors.ChannelError(f"scaling channel must be re, im or abs2, got {cfg.channel!r}")
    channel = SCALING_CHANNELS[cfg.channel]
    fmt = _require_fmt(cfg, "json")
    if cfg.t_range is not None:
        ts = cfg.t_range.points()
    elif cfg.window is not None:
        ts = np.geomspace(cfg.window[0], cfg.window[1], DEFAULT_SCALING_POINTS)
    else:
        raise ParameterDomainError("scaling needs --window a:b or --t start:stop:count")
    tol = cfg.tol or scaling_tol(st, channel, float(ts.min()))
    g = sample_graph(coeffs, ts, channel, tol)
    if fmt == "csv":
        return _csv(["t", channel], zip(g.t, g.values))
    doc = {**_with_params(label, st), "channel": channel, "tol": tol}
    if cfg.window is not None:
        p, c = power_law_fit(g, cfg.window)
        doc.update({"window": list(cfg.window), "exponent": p, "prefactor": c})
    if cfg.plateaus:
        doc["plateaus"] = [{"t_start": pl.t_start, "t_end": pl.t_end, "slope": pl.slope} for pl in slope_plateaus(g)]
    return _json(doc)


def cmd_bloch(cfg: RunConfig):
    if cfg.alpha is None:
        raise ParameterDomainError("bloch needs --alpha")
    st = BuiltinState("bloch", alpha=cfg.alpha)
    coeffs = builtin_coefficients(st)
    tol = cfg.tol or DEFAULT_TOL
    fmt = _require_fmt(cfg, "csv")
    if cfg.t_range is None:
        # 1000 interior points of the first period
        ts = 2.0 * np.pi * np.arange(1, 1001) / 1001
    else:
        ts = cfg.t_range.points()
    vals, _, bound = sweep_autocorr(coeffs, ts, tol)
    closed = np.array([bloch_closed(cfg.alpha, t) for t in ts])
    diff = np.abs(vals - closed)
    if fmt == "json":
        return _json({"alpha": cfg.alpha, "points": int(ts.size), "max_deviation": float(diff.max()),
                      "trunc_bound": bound})
    rows = zip(ts, vals.real, vals.imag, closed.real, closed.imag, diff, np.full(ts.size, bound))
    return _csv(["t", "re_series", "im_series", "re_closed", "im_closed", "abs_diff", "trunc_bound"], rows)


HANDLERS = {
    "decompose": cmd_decompose,
    "autocorr": cmd_autocorr,
    "asymptote": cmd_asymptote,
    "fractal": cmd_fractal,
    "scaling": cmd_scaling,
    "bloch": cmd_bloch,
}


def run(cfg: RunConfig) -> str:
    """Execute a command and return the artifact text."""
    return HANDLERS[cfg.command](cfg)


# ----------------------------------------------------------------- parsing


def _exit_code_table():
    rows = ["  0  success", "  1  unexpected internal error", "  2  command-line usage error"]
    classes = sorted(
        (c for c in vars(errors).values() if isinstance(c, type) and issubclass(c, WellcorrError) and c is not WellcorrError),
        key=lambda c: c.exit_code,
    )
    rows += [f"  {c.exit_code:<2} {c.__name__}" for c in classes]
    return "exit codes:\n" + "\n".join(rows)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", help=f"builtin state: {', '.join(STATE_TAGS)}")
    common.add_argument("--state-file", help="JSON piecewise-polynomial state")
    common.add_argument("--beta", type=float, help="chibeta parameter, 0 < beta < 1/2")
    common.add_argument("--alpha", type=float, help="bloch parameter, not an integer")
    common.add_argument("--t", dest="t", metavar="START:STOP:COUNT", help="time samples")
    common.add_argument("--log", action="store_true", help="log-spaced time samples")
    common.add_argument("--tol", type=float, help="absolute truncation tolerance")
    common.add_argument("--depth", type=float, default=DEFAULT_DEPTH, help="Mellin contour depth (in x)")
    common.add_argument("-o", "--output", help="output path (default stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"))

    parser = argparse.ArgumentParser(
        prog="wellcorr",
        description="Autocorrelation functions of square-well states: series, asymptotics, dimensions.",
        epilog=_exit_code_table(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="coefficient table or decay-exponent fit")
    p.add_argument("--count", type=int, default=64, help="rows of the coefficient table")
    p.add_argument("--fit-range", metavar="NMIN:NMAX", help="n range of the decay fit (json output)")
    p.add_argument("--x", dest="x", metavar="START:STOP:COUNT", help="tabulate psi(x) instead")

    p = sub.add_parser("autocorr", parents=[common], help="A(t) sweep")
    p.add_argument("--series", choices=("A", "D", "R"), default="A", help="A(t), D(t) or Riemann's R(t)")

    sub.add_parser("asymptote", parents=[common], help="short-time expansion (json) or comparison (csv)")

    p = sub.add_parser("fractal", parents=[common], help="box-counting dimension of a channel")
    p.add_argument("--channel", default="re", help="re, im or abs2")
    p.add_argument("--samples", type=int, default=DEFAULT_FRACTAL_SAMPLES, help="samples over [0, 2 pi]")

    p = sub.add_parser("scaling", parents=[common], help="short-time power-law fit")
    p.add_argument("--channel", default="re", help="re (1-Re A), im (-Im A) or abs2 (1-|A|^2)")
    p.add_argument("--window", metavar="A:B", help="fit window")
    p.add_argument("--plateaus", action="store_true", help="report sliding-slope plateaus")

    sub.add_parser("bloch", parents=[common], help="Bloch series against its closed form")
    return parser


def config_from_args(ns) -> RunConfig:
    kw = dict(
        command=ns.command,
        state=ns.state,
        beta=ns.beta,
        alpha=ns.alpha,
        state_file=ns.state_file,
        t_range=TRange.parse(ns.t, ns.log) if ns.t else None,
        tol=ns.tol,
        depth=ns.depth,
        output=ns.output,
        fmt=ns.fmt,
    )
    if ns.command in ("fractal", "scaling"):
        kw["channel"] = ns.channel
    if ns.command == "fractal":
        kw["samples"] = ns.samples
    if ns.command == "scaling":
        kw["window"] = parse_window(ns.window) if ns.window else None
        kw["plateaus"] = ns.plateaus
    if ns.command == "decompose":
        kw["count"] = ns.count
        kw["x_range"] = TRange.parse(ns.x) if ns.x else None
        if ns.fit_range:
            try:
                a, b = (int(v) for v in ns.fit_range.split(":"))
            except ValueError:
                raise ParameterDomainError(f"fit range {ns.fit_range!r} is not of the form NMIN:NMAX") from None
            kw["fit_range"] = (a, b)
    if ns.command == "autocorr":
        kw["series"] = ns.series
    return RunConfig(**kw)


def _fail(exc, code):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text = run(cfg)
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except WellcorrError as exc:
        return _fail(exc, exc.exit_code)
    except Exception as exc:  # noqa: BLE001 - reported as JSON with the generic code
        return _fail(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
