"""Command-line front end.

Exit status: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure (a diagnostics file is written next to the output).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import traceback

import numpy as np

from . import __version__
from .core import (DomainConfigurationError, ModelError, TieredGaussianModel, cdf, log_sum_eval,
                   moments, pdf, sample_variates)
from .density import ConvergenceError, DensityError, TailWeightConfig
from .fit import FitError
from .quadrature import QuadratureError
from .serialization import dumps, format_columns, write_columns

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# input / output
# ---------------------------------------------------------------------------

def read_values(path):
    """One number per line; blank lines and '#' comments are skipped."""
    if path is None:
        raise UsageError("--input is required")
    if not os.path.exists(path):
        raise DataError(f"input file not found: {path}")
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise DataError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}:{lineno}: non-finite value")
            out.append(v)
    if not out:
        raise DataError(f"{path}: no data")
    return np.array(out)


def log_returns(values):
    if np.any(values <= 0):
        raise DataError("log returns need strictly positive values")
    if values.size < 2:
        raise DataError("log returns need at least two values")
    return np.diff(np.log(values))


def load_model(path):
    if path is None:
        raise UsageError("--model is required")
    if not os.path.exists(path):
        raise DataError(f"model file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: {exc}") from None
    if isinstance(doc, dict) and "components" not in doc and "model" in doc:
        doc = doc["model"]
    try:
        return TieredGaussianModel.from_dict(doc, monotone_weights=False)
    except (KeyError, TypeError, ModelError) as exc:
        raise DataError(f"{path}: invalid model: {exc}") from None


def emit(text, path):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _svg_plot(path, x, series, log_y=False, title=""):
    """Self-contained SVG line plot; ``series`` maps a label to y values."""
    width, height, pad = 720, 440, 50
    ys = []
    for y in series.values():
        y = np.asarray(y, float)
        ys.append(np.log10(np.where(y > 0, y, np.nan)) if log_y else y)
    lo = min(np.nanmin(y) for y in ys)
    hi = max(np.nanmax(y) for y in ys)
    if not hi > lo:
        hi = lo + 1.0
    x0, x1 = float(np.min(x)), float(np.max(x))

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - lo) / (hi - lo) * (height - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
             'stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{pad}" y="{height - pad + 16}" font-size="11">{x0:.4g}</text>',
             f'<text x="{width - pad}" y="{height - pad + 16}" font-size="11" '
             f'text-anchor="end">{x1:.4g}</text>',
             f'<text x="{pad - 4}" y="{height - pad}" font-size="11" text-anchor="end">'
             f'{"1e%.3g" % lo if log_y else "%.4g" % lo}</text>',
             f'<text x="{pad - 4}" y="{pad + 4}" font-size="11" text-anchor="end">'
             f'{"1e%.3g" % hi if log_y else "%.4g" % hi}</text>']
    for k, (label, y) in enumerate(zip(series, ys)):
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(np.asarray(x)[ok], y[ok]))
        color = colors[k % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{width - pad - 4}" y="{pad + 16 * (k + 1)}" font-size="12" '
                     f'text-anchor="end" fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_fit(args):
    from .validation import run_pipeline

    x = read_values(args.input)
    if args.log_returns:
        x = log_returns(x)
    if x.size < 10:
        raise DataError("need at least 10 values to fit")
    if np.ptp(x) == 0:
        raise DataError("degenerate data: all values are equal")
    tail = TailWeightConfig(alpha=args.alpha)
    if args.tail is not None:
        if not 0 < args.tail < 50:
            raise UsageError("--tail must be a percentile in (0, 50)")
        lo, hi = np.percentile(x, [args.tail, 100.0 - args.tail])
        tail = TailWeightConfig(alpha=args.alpha, onset_low=float(lo), onset_high=float(hi))
    if args.max_components < 1:
        raise UsageError("--max-components must be >= 1")
    if args.bins is not None and args.bins < 7:
        raise UsageError("--bins must be >= 7")
    res = run_pipeline(x, symmetric=args.symmetric, tail=tail,
                       max_components=args.max_components, bins=args.bins)
    rep = res.report
    out = args.output or "fit_output"
    os.makedirs(out, exist_ok=True)
    doc = rep.to_dict()
    doc["histogram"] = {k: v for k, v in res.histogram.info.items()}
    doc["sample_count"] = int(x.size)
    doc["log_returns"] = bool(args.log_returns)
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps(doc) + "\n")
    with open(os.path.join(out, "model.json"), "w", encoding="utf-8") as fh:
        fh.write(rep.model.dumps() + "\n")
    with open(os.path.join(out, "histogram.csv"), "w", encoding="utf-8") as fh:
        fh.write(res.histogram.to_text())
    h = res.histogram
    c = h.centers
    fitted = pdf(rep.model, c)
    write_columns(os.path.join(out, "transformed.csv"), ["center", "ordinate", "fitted"],
                  [c, res.transformed.ordinates, rep.fitted])
    write_columns(os.path.join(out, "plot_linear.csv"), ["x", "histogram", "fit"],
                  [c, h.densities, fitted])
    with np.errstate(divide="ignore"):
        write_columns(os.path.join(out, "plot_semilog.csv"), ["x", "log10_histogram", "log10_fit"],
                      [c, np.log10(h.densities), np.log10(fitted)])
    if args.svg:
        series = {"histogram": h.densities, "fit": fitted}
        _svg_plot(os.path.join(out, "plot_linear.svg"), c, series, title="density")
        _svg_plot(os.path.join(out, "plot_semilog.svg"), c, series, log_y=True,
                  title="density (log scale)")
    print(f"{rep.n_components} components, r2 = {rep.r2:.6f}, F = {rep.f_statistic:.6g}; "
          f"written to {out}")
    return EXIT_OK


def cmd_eval(args):
    model = load_model(args.model)
    x = read_values(args.input)
    text = format_columns(["x", "log_sum", "pdf", "cdf"],
                          [x, log_sum_eval(model, x), pdf(model, x), cdf(model, x)], 17)
    emit(text, args.output)
    return EXIT_OK


def cmd_sample(args):
    model = load_model(args.model)
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    draws = sample_variates(model, args.count, args.seed)
    emit("\n".join("%.17g" % v for v in draws), args.output)
    return EXIT_OK


def cmd_moments(args):
    m = moments(load_model(args.model))
    emit(dumps({"mean": m.mean, "std_dev": m.std_dev, "skew": m.skew,
                "kurtosis": m.kurtosis if m.kurtosis_defined else "undefined"}), args.output)
    return EXIT_OK


def cmd_risk(args):
    from .risk import risk_report

    model = load_model(args.model)
    if not 0 < args.alpha < 0.5:
        raise UsageError("--alpha must lie in (0, 0.5)")
    sides = ("lower", "upper") if args.tail == "both" else (args.tail,)
    reports = [risk_report(model, args.alpha, side).to_dict() for side in sides]
    emit(dumps(reports[0] if len(reports) == 1 else reports), args.output)
    return EXIT_OK


def cmd_simulate(args):
    from .stochastic import ensemble_to_text, sde_from_model, simulate_ensemble

    model = load_model(args.model)
    if args.paths < 1 or args.steps < 1 or not args.dt > 0 or not args.x0 > 0:
        raise UsageError("--paths and --steps must be >= 1, --dt and --x0 > 0")
    spec = sde_from_model(model, x0=args.x0, dt=args.dt, steps=args.steps)
    paths = simulate_ensemble(spec, args.paths, args.seed, method=args.method,
                              corrected=not args.literal)
    emit(ensemble_to_text(spec.times, paths), args.output)
    return EXIT_OK


def cmd_validate(args):
    from .validation import validate

    if args.samples < 1000:
        raise UsageError("--samples must be >= 1000")
    rep = validate(args.samples, args.seed, symmetric=args.symmetric, kde_tails=args.kde_tails,
                   replicates=args.replicates)
    emit(dumps(rep), args.output)
    for e in rep["entries"]:
        print(f"[{e['status']:>6}] {e['name']}: {e['value']}", file=sys.stderr)
    print("all checks passed" if rep["passed"] else "some checks failed; see the report",
          file=sys.stderr)
    return EXIT_OK


def cmd_benchmark(args):
    from .validation import amise_benchmark, benchmark_table

    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError("--sizes must be comma-separated integers") from None
    if not sizes or min(sizes) < 10 or args.trials < 1:
        raise UsageError("need sizes >= 10 and --trials >= 1")
    rows = amise_benchmark(sizes, args.trials, args.seed)
    emit(benchmark_table(rows), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="tiered-gaussian", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, model=False, data=False, seed=False):
        sp.add_argument("--output", help="output file (directory for fit); stdout if omitted")
        if model:
            sp.add_argument("--model", required=True, help="model JSON (or a fit report)")
        if data:
            sp.add_argument("--input", required=True, help="one number per line")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("fit", help="fit a model to data")
    common(sp, data=True)
    sp.add_argument("--log-returns", action="store_true",
                    help="difference the logs of successive values first")
    sym = sp.add_mutually_exclusive_group()
    sym.add_argument("--symmetric", dest="symmetric", action="store_true", default=True,
                     help="hold all means at the data median (default)")
    sym.add_argument("--free-means", dest="symmetric", action="store_false")
    sp.add_argument("--max-components", type=int, default=10)
    sp.add_argument("--alpha", type=float, default=None, help="tail exponent for the penalty")
    sp.add_argument("--tail", type=float, default=None,
                    help="tail onset percentile per side (default 1)")
    sp.add_argument("--bins", type=int, default=None, help="fixed histogram bin count")
    sp.add_argument("--svg", action="store_true", help="also write SVG plots")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("eval", help="evaluate a model at the given points")
    common(sp, model=True, data=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sample", help="draw variates from a model")
    common(sp, model=True, seed=True)
    sp.add_argument("--count", type=int, required=True)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("moments", help="mean, std_dev, skew, kurtosis")
    common(sp, model=True)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("risk", help="value-at-risk and expected shortfall")
    common(sp, model=True)
    sp.add_argument("--alpha", type=float, default=0.01)
    sp.add_argument("--tail", choices=("lower", "upper", "both"), default="lower")
    sp.set_defaults(func=cmd_risk)

    sp = sub.add_parser("simulate", help="paths of the model's SDE")
    common(sp, model=True, seed=True)
    sp.add_argument("--paths", type=int, default=1)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--x0", type=float, default=1.0)
    sp.add_argument("--method", choices=("euler", "closed"), default="euler")
    sp.add_argument("--literal", action="store_true",
                    help="closed form with the step size outside the exponential")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="synthetic-law validation run")
    common(sp)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--samples", type=int, default=750_000)
    sym = sp.add_mutually_exclusive_group()
    sym.add_argument("--symmetric", dest="symmetric", action="store_true", default=True)
    sym.add_argument("--free-means", dest="symmetric", action="store_false")
    sp.add_argument("--kde-tails", action="store_true",
                    help="replace histogram tails with the model-kernel estimator")
    sp.add_argument("--replicates", type=int, default=20,
                    help="bootstrap replicates for the chi-square scale")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("benchmark", help="mean ISE of three estimators by sample size")
    common(sp, seed=True)
    sp.add_argument("--sizes", default="100,1000")
    sp.add_argument("--trials", type=int, default=20)
    sp.set_defaults(func=cmd_benchmark)
    return p


def _diagnostics_path(args):
    out = getattr(args, "output", None)
    if out is None:
        return "diagnostics.json"
    if getattr(args, "command", None) == "fit":
        os.makedirs(out, exist_ok=True)
        return os.path.join(out, "diagnostics.json")
    return out + ".diagnostics.json"


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required; see --help")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DensityError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FitError, QuadratureError, ConvergenceError, DomainConfigurationError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        path = _diagnostics_path(args)
        doc = {"command": args.command, "error": type(exc).__name__, "message": str(exc),
               "traceback": traceback.format_exc()}
        for attr in ("value", "error", "chain"):
            if hasattr(exc, attr):
                doc[attr] = getattr(exc, attr)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(doc, indent=2) + "\n")
        print(f"numerical failure: {exc} (diagnostics in {path})", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
