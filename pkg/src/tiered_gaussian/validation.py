"""Known-answer validation against a synthetic heavy-tailed law.

The reference law has a Gaussian-like center and x^(-7/2) tails:

    g(x) = C (1 + x^2)^(-7/4),   C = Gamma(7/4) / (sqrt(pi) Gamma(5/4)),

i.e. a Student t with 5/2 degrees of freedom scaled by 1/sqrt(5/2). Samples
come from rejection sampling under a Cauchy(0, 1/2) envelope. The pipeline
(penalized histogram, log transform, component ladder) is run on those
samples and its result compared with g by ISE and a pointwise chi-square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize, special, stats

from . import core
from .core import (PRINTED_TRUNCATED_CONSTANT, density_moments, moments, normalization_constant,
                   pdf, truncated_constant)
from .density import (KdeConfig, SheatherJonesKde, TailWeightConfig, ZeroBiasKde,
                      DensityHistogram, optimized_histogram, plain_histogram)
from .fit import FitReport, TransformedHistogram, auto_fit, transform_histogram
from .quadrature import QuadratureError, gk21, integrate
from .serialization import format_columns

SYNTHETIC_CONSTANT = special.gamma(1.75) / (math.sqrt(math.pi) * special.gamma(1.25))
ENVELOPE_SCALE = 0.5

# Reference figures the validation report compares against.
PRINTED_THRESHOLD = 1.798
PRINTED_CHI_SQUARE = 2.26
PRINTED_ISE = 5.33e-5
PRINTED_R2 = 0.999959
PRINTED_ISE_TRANSFORMED = 0.1370
PRINTED_COMPONENTS = 6
PRINTED_TABLE = np.array([
    [2.41381, 0.767862], [12.2881, 1.80448], [41.7928, 4.80233],
    [96.2524, 12.35919], [203.2462, 28.50726], [517.6616, 64.59965],
])
PRINTED_T_RANGE = (10.45, 79.22)
PRINTED_ERROR_LEVELS = {100: 0.0763, 1000: 0.0241, 10000: 0.0076}
DAILY_POINTS = [(0.98951, 8.6495), (4.9413, 63.184), (18.165, 253.60)]
MINUTE_POINTS = [(0.75463, 1.8916), (1.5102, 3.7854), (4.1436, 10.386)]
PRINTED_SEGMENT_RATIO = 3.488


def synthetic_pdf(x):
    x = np.asarray(x, dtype=float)
    return SYNTHETIC_CONSTANT * (1.0 + x * x) ** -1.75


_SYN_EDGES = np.concatenate([[0.0], np.geomspace(0.05, 1e6, 200)])
_SYN_TABLE = {}


def _synthetic_table():
    if "cum" not in _SYN_TABLE:
        # each piece adaptively, so the table is exact to ~1e-15
        pieces = np.array([integrate(synthetic_pdf, a, b, epsabs=1e-17, epsrel=1e-13).value
                           for a, b in zip(_SYN_EDGES[:-1], _SYN_EDGES[1:])])
        beyond = integrate(synthetic_pdf, _SYN_EDGES[-1], np.inf, epsabs=1e-20,
                           epsrel=1e-10, tail_scale=_SYN_EDGES[-1]).value
        _SYN_TABLE["cum"] = np.concatenate([[0.0], np.cumsum(pieces)])
        _SYN_TABLE["pieces"] = pieces
        _SYN_TABLE["half"] = _SYN_TABLE["cum"][-1] + beyond
    return _SYN_TABLE


def synthetic_cdf(x):
    """CDF of the synthetic law by cumulative quadrature (GK21 inside each table piece)."""
    xs = np.asarray(x, dtype=float)
    flat = np.abs(xs.ravel())
    tab = _synthetic_table()
    out = np.empty(flat.size)
    inside = flat <= _SYN_EDGES[-1]
    if inside.any():
        a = flat[inside]
        k = np.clip(np.searchsorted(_SYN_EDGES, a, side="right") - 1, 0, _SYN_EDGES.size - 2)
        part, _ = gk21(synthetic_pdf, _SYN_EDGES[k], a)
        out[inside] = tab["cum"][k] + np.clip(part, 0.0, tab["pieces"][k])
    for j in np.flatnonzero(~inside):
        out[j] = tab["half"] - integrate(synthetic_pdf, flat[j], np.inf, epsabs=1e-25,
                                         epsrel=1e-10, tail_scale=flat[j]).value
    upper = 0.5 + out / (2.0 * tab["half"])
    res = np.where(xs.ravel() >= 0, upper, 1.0 - upper)
    return res.reshape(xs.shape) if xs.ndim else float(res[0])


def synthetic_moments():
    """Mean, standard deviation, skew and kurtosis (undefined) by quadrature."""
    return density_moments(synthetic_pdf, -50.0, 50.0, breakpoints=[-10.0, -1.0, 1.0, 10.0],
                           tail_scale=1.0, total=1.0)


def tail_slope(f, lo=20.0, hi=200.0, points=200):
    """Least-squares slope of ln f against ln x over [lo, hi]."""
    x = np.geomspace(lo, hi, points)
    return float(np.polyfit(np.log(x), np.log(f(x)), 1)[0])


# ---------------------------------------------------------------------------
# rejection sampling
# ---------------------------------------------------------------------------

def cauchy_pdf(x, loc=0.0, scale=ENVELOPE_SCALE):
    z = (np.asarray(x, dtype=float) - loc) / scale
    return 1.0 / (math.pi * scale * (1.0 + z * z))


def envelope_threshold(scale=ENVELOPE_SCALE):
    """sup f/g over x; for scale 1/2 the maximizer is at x^2 = 3/4.

    With u = x^2 the ratio is proportional to (1 + u)^(-7/4) (u + s^2),
    stationary at u = (4 - 7 s^2) / 3 (or u = 0 when that is negative).
    """
    u = max((4.0 - 7.0 * scale * scale) / 3.0, 0.0)
    x = math.sqrt(u)
    return float(synthetic_pdf(x) / cauchy_pdf(x, 0.0, scale)), x


class EnvelopeViolation(ArithmeticError):
    pass


class RejectionSampler:
    """Accept/reject sampler for ``target`` under a Cauchy envelope.

    ``threshold`` is inflated by ``inflate`` (relative) over the supplied or
    computed bound. The bound is checked on a 10^5-point grid at
    construction, and every proposal is checked again while sampling.
    """

    def __init__(self, target: Callable = synthetic_pdf, envelope_location=0.0,
                 envelope_scale=ENVELOPE_SCALE, threshold: Optional[float] = None,
                 inflate=1e-9, maximizer: Optional[float] = None):
        if not envelope_scale > 0:
            raise ValueError("envelope_scale must be > 0")
        self.target = target
        self.loc = float(envelope_location)
        self.scale = float(envelope_scale)
        if threshold is None:
            if target is not synthetic_pdf or self.loc != 0.0:
                raise ValueError("threshold must be given for a custom target")
            threshold, maximizer = envelope_threshold(self.scale)
        self.bound = float(threshold)
        self.threshold = self.bound * (1.0 + inflate)
        self.proposals = 0
        self.accepted = 0
        probe = self.loc + self.scale * np.tan(np.pi * (np.linspace(0, 1, 100_001)[1:-1] - 0.5))
        if maximizer is not None:
            probe = np.concatenate([probe, [self.loc + maximizer, self.loc - maximizer]])
        ratio = self.target(probe) / self.envelope(probe)
        if np.max(ratio) > self.threshold:
            raise EnvelopeViolation(f"target exceeds threshold*envelope: max ratio "
                                    f"{np.max(ratio)!r} > {self.threshold!r}")

    def envelope(self, x):
        return cauchy_pdf(x, self.loc, self.scale)

    @property
    def acceptance_rate(self):
        return self.accepted / self.proposals if self.proposals else float("nan")

    def sample(self, count, seed, batch=65536):
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = np.random.default_rng(seed)
        out = np.empty(int(count))
        filled = 0
        while filled < count:
            x = self.loc + self.scale * rng.standard_cauchy(batch)
            u = rng.random(batch)
            fx = self.target(x)
            mg = self.threshold * self.envelope(x)
            bad = fx > mg
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise EnvelopeViolation(f"proposal x={x[i]!r}: f={fx[i]!r} > M g={mg[i]!r}")
            acc = x[u * mg <= fx]
            take = min(acc.size, int(count) - filled)
            if take < acc.size:
                # count proposals only up to the last one used
                last = np.flatnonzero(u * mg <= fx)[take - 1] if take else -1
                self.proposals += last + 1
            else:
                self.proposals += batch
            self.accepted += take
            out[filled:filled + take] = acc[:take]
            filled += take
        return out


def synthetic_sample(count, seed):
    return RejectionSampler().sample(count, seed)


# ---------------------------------------------------------------------------
# comparison measures
# ---------------------------------------------------------------------------

def ise(f: Callable, g: Callable, *, breakpoints: Sequence[float] = (), tail_scale=1.0,
        epsabs=1e-14, epsrel=1e-8):
    """Integral of (f - g)^2 over the line; infinite ends go through the tail map."""
    pts = sorted(set(float(p) for p in breakpoints) | {0.0})

    def d2(x):
        diff = f(x) - g(x)
        return diff * diff

    r = integrate(d2, -np.inf, np.inf, breakpoints=pts, epsabs=epsabs, epsrel=epsrel,
                  tail_scale=tail_scale, tail_power=2)
    return max(r.value, 0.0)


def support_above(g: Callable, floor=1e-9, start=0.0, reach=1e8):
    """Interval around ``start`` where g exceeds ``floor`` (g assumed unimodal-ish)."""
    if not g(np.array([start]))[0] > floor:
        raise ValueError("g does not exceed the floor at the start point")
    ends = []
    for sign in (-1.0, 1.0):
        steps = start + sign * np.geomspace(1e-6, reach, 400)
        vals = g(steps)
        below = np.flatnonzero(vals <= floor)
        if below.size == 0:
            raise ValueError("g stays above the floor over the whole search range")
        j = below[0]
        inner = start if j == 0 else steps[j - 1]
        ends.append(optimize.brentq(lambda v: g(np.array([v]))[0] - floor,
                                    min(inner, steps[j]), max(inner, steps[j]), xtol=1e-12))
    return ends[0], ends[1]


@dataclass
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    abscissae: np.ndarray
    scale: float
    verdicts: dict

    def to_dict(self):
        return {"statistic": self.statistic, "dof": self.dof, "p_value": self.p_value,
                "scale": self.scale, "abscissae": self.abscissae, "verdicts": self.verdicts}


def chi_square_gof(f: Callable, g: Callable, points=21, *, scale=1.0, floor=1e-9, start=0.0,
                   region=None):
    """Pointwise chi-square of f against g at ``points`` equally spaced abscissae.

    The abscissae span the region where g > ``floor``; each term is
    scale * (f - g)^2 / g. The densities carry no sample size of their own,
    so the common ``scale`` has to come from outside; see
    :func:`resampling_scale`.
    """
    if points < 2:
        raise ValueError("points must be >= 2")
    lo, hi = support_above(g, floor, start) if region is None else region
    if not hi > lo:
        raise ValueError("degenerate comparison region")
    x = np.linspace(lo, hi, points)
    gx = g(x)
    fx = f(x)
    stat = float(scale * np.sum((fx - gx) ** 2 / gx))
    dof = points - 1
    p = float(stats.chi2.sf(stat, dof))
    verdicts = {f"{int(a * 100)}%": ("not rejected" if stat <= stats.chi2.isf(a, dof) else "rejected")
                for a in (0.10, 0.05, 0.01)}
    return ChiSquareResult(stat, dof, p, x, float(scale), verdicts)


def resampling_scale(data, estimator: Callable, abscissae, replicates=20, seed=0):
    """Common factor that gives the chi-square terms unit variance under resampling.

    ``estimator(sample)`` returns a density callable. It is rerun on
    ``replicates`` bootstrap resamples of ``data``, and the factor is the
    number of degrees of freedom divided by the mean of
    sum (f* - f)^2 / f over the replicates, f being the full-sample
    estimate. A statistic near the degrees of freedom then means a gap of
    the size sampling noise alone would produce.
    """
    x = np.asarray(data, dtype=float)
    pts = np.asarray(abscissae, dtype=float)
    base = estimator(x)(pts)
    if np.any(~(base > 0)):
        raise ValueError("reference estimate must be positive at every abscissa")
    rng = np.random.default_rng(seed)
    sums = []
    for _ in range(int(replicates)):
        boot = x[rng.integers(0, x.size, x.size)]
        fb = estimator(boot)(pts)
        sums.append(float(np.sum((fb - base) ** 2 / base)))
    mean = float(np.mean(sums))
    if not mean > 0:
        raise ValueError("resampled estimates do not vary")
    return (pts.size - 1) / mean


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

@dataclass
class PipelineResult:
    histogram: DensityHistogram
    transformed: TransformedHistogram
    report: FitReport
    pilot: Optional[FitReport] = None

    @property
    def model(self):
        return self.report.model

    def density(self, x):
        return pdf(self.report.model, x)


def kde_tail_histogram(data, hist: DensityHistogram, *, symmetric=True, centre=None,
                       bias_tolerance=0.05, core_fraction=0.98):
    """Replace the histogram beyond its tail onsets with a model-kernel KDE.

    The pilot is the ladder fit to a histogram of the central
    ``core_fraction`` of the data; the result is renormalized.
    """
    x = np.asarray(data, dtype=float)
    lo_q, hi_q = np.quantile(x, [(1 - core_fraction) / 2, 1 - (1 - core_fraction) / 2])
    core_data = x[(x >= lo_q) & (x <= hi_q)]
    pilot = auto_fit(transform_histogram(optimized_histogram(core_data)), symmetric=symmetric,
                     centre=centre)
    kde = ZeroBiasKde(x, KdeConfig(pilot.model, bias_tolerance=bias_tolerance))
    c = hist.centers
    on_lo = hist.info.get("onset_low", lo_q)
    on_hi = hist.info.get("onset_high", hi_q)
    tail = (c < on_lo) | (c > on_hi)
    dens = hist.densities.copy()
    if tail.any():
        dens[tail] = kde(c[tail])
    dens /= np.sum(dens * hist.widths)
    info = dict(hist.info, tails="zero-bias-kde", kde_bias_tolerance=bias_tolerance)
    return DensityHistogram(hist.edges, dens, hist.sample_count, True, info), pilot


def run_pipeline(data, *, symmetric=True, centre=None, tail: Optional[TailWeightConfig] = None,
                 kde_tails=False, max_components=10, bins=None) -> PipelineResult:
    """Optimized histogram, log transform and the component ladder on one data set.

    ``bins`` fixes the histogram's bin count instead of the default policy.
    """
    x = np.asarray(data, dtype=float)
    if centre is None:
        centre = float(np.median(x))
    hist = (optimized_histogram(x, tail) if bins is None
            else optimized_histogram(x, tail, min_bins=int(bins), max_bins=int(bins)))
    pilot = None
    if kde_tails:
        hist, pilot = kde_tail_histogram(x, hist, symmetric=symmetric, centre=centre)
    th = transform_histogram(hist)
    report = auto_fit(th, symmetric=symmetric, centre=centre, max_components=max_components)
    return PipelineResult(hist, th, report, pilot)


def model_breakpoints(model):
    pts = []
    for c in model.components:
        pts.extend(c.mean + c.width * np.array([-3.0, -1.0, 0.0, 1.0, 3.0]))
    return pts


# ---------------------------------------------------------------------------
# the validation report
# ---------------------------------------------------------------------------

def _entry(name, value, reference=None, status="record", bound=None, note=None):
    out = {"name": name, "value": value, "status": status}
    if reference is not None:
        out["reference"] = reference
    if bound is not None:
        out["bound"] = bound
    if note:
        out["note"] = note
    return out


def _check(ok):
    return "pass" if ok else "fail"


def validate(samples=750_000, seed=42, *, symmetric=True, kde_tails=False, ise_bound=None,
             r2_bound=None, replicates=20):
    """Run the five validation steps and return a structured report.

    Bounds default to the desk-scale targets (ISE <= 1e-3, r^2 >= 0.999,
    4 to 7 components) below 750,000 samples and to ISE <= 5e-4,
    r^2 >= 0.9995 at or above, where the component count is only recorded:
    a smoother histogram from a larger sample supports more components.
    Entries compared against reference values without a tolerance have
    status "record".
    """
    full = samples >= 750_000
    ise_bound = ise_bound if ise_bound is not None else (5e-4 if full else 1e-3)
    r2_bound = r2_bound if r2_bound is not None else (0.9995 if full else 0.999)
    entries = []

    ct = truncated_constant()
    entries.append(_entry("truncated constant (quadrature)", ct, PRINTED_TRUNCATED_CONSTANT,
                          note="amplitude-1 variant: %.15g" % truncated_constant(1.0)))
    sm = synthetic_moments()
    entries.append(_entry("synthetic mean", sm.mean, 0.0, _check(abs(sm.mean) <= 1e-9), 1e-9))
    entries.append(_entry("synthetic variance", sm.std_dev ** 2, 2.0,
                          _check(abs(sm.std_dev ** 2 - 2.0) <= 1e-6), 1e-6))
    entries.append(_entry("synthetic kurtosis defined", sm.kurtosis_defined, False,
                          _check(not sm.kurtosis_defined)))
    slope = tail_slope(synthetic_pdf)
    entries.append(_entry("synthetic tail slope on [20, 200]", slope, -3.5,
                          _check(abs(slope + 3.5) <= 0.05), 0.05))

    sampler = RejectionSampler()
    entries.append(_entry("envelope threshold M", sampler.bound, PRINTED_THRESHOLD,
                          note="bound for a unit-scale Cauchy envelope: pi * C = %.10g"
                          % (math.pi * SYNTHETIC_CONSTANT)))
    data = sampler.sample(samples, seed)
    rate = sampler.acceptance_rate
    status = (_check(abs(rate * sampler.threshold - 1.0) <= 0.002)
              if sampler.proposals >= 1_000_000 else "record")
    entries.append(_entry("acceptance rate", rate, 1.0 / sampler.threshold, status, 0.002,
                          note=f"{sampler.proposals} proposals"))

    res = run_pipeline(data, symmetric=symmetric, kde_tails=kde_tails)
    rep = res.report
    model = rep.model
    entries.append(_entry("selected components", rep.n_components, PRINTED_COMPONENTS,
                          "record" if full else _check(4 <= rep.n_components <= 7), [4, 7]))
    entries.append(_entry("r2", rep.r2, PRINTED_R2, _check(rep.r2 >= r2_bound), r2_bound))
    entries.append(_entry("adjusted r2", rep.r2_adjusted))
    entries.append(_entry("standard error", rep.std_error, 0.0330))
    entries.append(_entry("F statistic", rep.f_statistic, 680225.0))
    entries.append(_entry("transformed-scale ISE", rep.ise_transformed, PRINTED_ISE_TRANSFORMED,
                          "record"))
    entries.append(_entry("residual normality", rep.normality.verdict, "normal"))
    if rep.t_stats is not None:
        tmin = float(np.nanmin(rep.t_stats[:, [0, 2]]))
        entries.append(_entry("min weight/width t-statistic", tmin, list(PRINTED_T_RANGE),
                              "record"))
    six = rep.stages.get(PRINTED_TABLE.shape[0])
    if six is not None:
        if six.t_stats is not None:
            tmin6 = float(np.nanmin(six.t_stats[:, [0, 2]]))
            entries.append(_entry("six-component min weight/width t-statistic", tmin6,
                                  list(PRINTED_T_RANGE), "record"))
        ours = np.column_stack([six.model.weights, six.model.widths])
        rel = float(np.max(np.abs(ours / PRINTED_TABLE - 1.0)))
        entries.append(_entry("six-component max relative deviation from reference table", rel,
                              0.0, "record"))
    mono = bool(np.all(np.diff(model.weights) > 0))
    entries.append(_entry("weights increase with width", mono, True, "record"))

    fit_pdf = res.density
    pts = model_breakpoints(model)
    n_fit = normalization_constant(model) * rep.d_min
    entries.append(_entry("back-transformed mass before renormalization", n_fit, 1.0))
    e_fit = ise(fit_pdf, synthetic_pdf, breakpoints=pts, tail_scale=float(model.widths[-1]))
    entries.append(_entry("ISE fit vs synthetic", e_fit, PRINTED_ISE, _check(e_fit <= ise_bound),
                          ise_bound))
    hist = res.histogram
    e_hist = ise(hist, synthetic_pdf, breakpoints=list(hist.edges), tail_scale=10.0)
    entries.append(_entry("ISE histogram vs synthetic", e_hist, note="for comparison with the fit"))
    entries.append(_entry("fit closer to synthetic than the histogram", e_fit < e_hist, True,
                          "pass" if e_fit < e_hist else "record"))
    lo, hi = support_above(synthetic_pdf, 1e-9)
    grid = np.linspace(lo, hi, 21)

    def estimator(sample):
        m = run_pipeline(sample, symmetric=symmetric, kde_tails=kde_tails).report.model
        return lambda z: pdf(m, z)

    scale = resampling_scale(data, estimator, grid, replicates=replicates, seed=seed + 1)
    chi = chi_square_gof(fit_pdf, synthetic_pdf, 21, scale=scale, region=(lo, hi))
    entries.append(_entry("chi-square statistic", chi.statistic, PRINTED_CHI_SQUARE,
                          note=f"scale {scale:.6g} from {replicates} bootstrap replicates"))
    for level, verdict in chi.verdicts.items():
        entries.append(_entry(f"chi-square not rejected at {level}", verdict, "not rejected",
                              _check(verdict == "not rejected")))

    geo = core.analyze_component_geometry(DAILY_POINTS)
    geo_m = core.analyze_component_geometry(MINUTE_POINTS)
    entries.append(_entry("daily segment ratio", geo.geometry.segment_ratio, PRINTED_SEGMENT_RATIO,
                          _check(abs(geo.geometry.segment_ratio / PRINTED_SEGMENT_RATIO - 1) <= 5e-3),
                          5e-3))
    rel = geo_m.geometry.segment_ratio / geo.geometry.segment_ratio - 1.0
    entries.append(_entry("minute vs daily segment ratio", rel, 0.0016, _check(abs(rel) <= 2e-3),
                          2e-3))

    return {
        "samples": int(samples),
        "seed": int(seed),
        "symmetric": bool(symmetric),
        "kde_tails": bool(kde_tails),
        "entries": entries,
        "passed": all(e["status"] != "fail" for e in entries),
        "fit": rep.to_dict(),
        "chi_square": chi.to_dict(),
        "histogram": {"bins": int(hist.densities.size), **{k: v for k, v in hist.info.items()
                                                           if isinstance(v, (int, float, str))}},
    }


# ---------------------------------------------------------------------------
# sample-size benchmark
# ---------------------------------------------------------------------------

ESTIMATORS = ("tiered", "sheather_jones", "histogram")


def _estimate(name, data):
    """(density callable, breakpoints, tail scale) for one estimator on one sample."""
    if name == "tiered":
        res = run_pipeline(data, symmetric=True)
        m = res.report.model
        return (lambda x: pdf(m, x)), model_breakpoints(m), float(m.widths[-1])
    if name == "sheather_jones":
        kde = SheatherJonesKde(data)
        lo, hi = float(np.min(data)), float(np.max(data))
        pts = list(np.linspace(lo, hi, 41))
        return kde, pts, max(kde.bandwidth, 1.0)
    if name == "histogram":
        h = plain_histogram(data)
        return h, list(h.edges), 1.0
    raise ValueError(f"unknown estimator {name!r}")


@dataclass
class BenchmarkRow:
    estimator_name: str
    sample_size: int
    amise: float
    root_error: float
    standard_error: float
    trials: int
    failures: int
    points_ratio_vs_tiered: float = float("nan")
    errors: list = field(default_factory=list, repr=False)


def _points_needed(sizes, errors, target):
    """Sample size at which the log-log interpolated error curve reaches ``target``."""
    ls = np.log(np.asarray(sizes, float))
    le = np.log(np.asarray(errors, float))
    ok = np.isfinite(le)
    ls, le = ls[ok], le[ok]
    if ls.size < 2:
        return float("nan")
    lt = math.log(target)
    # piecewise-linear in log-log, extended linearly past the ends
    order = np.argsort(ls)
    ls, le = ls[order], le[order]
    for i in range(ls.size - 1):
        lo_e, hi_e = le[i], le[i + 1]
        if (lo_e - lt) * (hi_e - lt) <= 0 and lo_e != hi_e:
            return float(math.exp(ls[i] + (lt - lo_e) * (ls[i + 1] - ls[i]) / (hi_e - lo_e)))
    if lt > le[0]:
        i = 0
    else:
        i = ls.size - 2
    s = (le[i + 1] - le[i]) / (ls[i + 1] - ls[i])
    if s == 0:
        return float("nan")
    return float(math.exp(ls[i] + (lt - le[i]) / s))


def amise_benchmark(sizes, trials, seed, estimators=ESTIMATORS):
    """Mean ISE (and its square root) per estimator and sample size over ``trials`` samples.

    Every trial draws one sample from the synthetic law (seeded by
    (seed, size, trial)) and hands the same sample to each estimator. A
    failing estimator is recorded for that trial and skipped. The points
    ratio says how many more samples a baseline needs to reach the tiered
    pipeline's root error at each size, by log-log interpolation across
    sizes.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or trials < 1:
        raise ValueError("need at least one size and one trial")
    errs = {(e, n): [] for e in estimators for n in sizes}
    fails = {(e, n): 0 for e in estimators for n in sizes}
    sampler = RejectionSampler()
    for n in sizes:
        for t in range(trials):
            ss = np.random.SeedSequence([int(seed), n, t])
            data = sampler.sample(n, ss)
            for name in estimators:
                try:
                    f, pts, ts = _estimate(name, data)
                    errs[(name, n)].append(ise(f, synthetic_pdf, breakpoints=pts, tail_scale=ts,
                                               epsrel=1e-6))
                except (ArithmeticError, ValueError):
                    fails[(name, n)] += 1
    rows = []
    for name in estimators:
        for n in sizes:
            e = np.array(errs[(name, n)])
            mean = float(e.mean()) if e.size else float("nan")
            se = float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else float("nan")
            rows.append(BenchmarkRow(name, n, mean, math.sqrt(mean) if mean >= 0 else float("nan"),
                                     se, trials, fails[(name, n)], errors=list(e)))
    if "tiered" in estimators:
        ref = {r.sample_size: r.root_error for r in rows if r.estimator_name == "tiered"}
        for name in estimators:
            mine = [r for r in rows if r.estimator_name == name]
            sz = [r.sample_size for r in mine]
            er = [r.root_error for r in mine]
            for r in mine:
                if name == "tiered":
                    r.points_ratio_vs_tiered = 1.0
                elif len(sz) >= 2:
                    r.points_ratio_vs_tiered = _points_needed(sz, er, ref[r.sample_size]) / r.sample_size
    return rows


def benchmark_table(rows, delimiter=","):
    header = ["estimator", "size", "error", "mean_ise", "ise_standard_error", "ratio",
              "trials", "failures"]
    cols = [[r.estimator_name for r in rows], [r.sample_size for r in rows],
            [r.root_error for r in rows], [r.amise for r in rows],
            [r.standard_error for r in rows], [r.points_ratio_vs_tiered for r in rows],
            [r.trials for r in rows], [r.failures for r in rows]]
    return format_columns(header, cols, digits=15, delimiter=delimiter)


__all__ = [
    "SYNTHETIC_CONSTANT", "synthetic_pdf", "synthetic_cdf", "synthetic_moments", "tail_slope",
    "cauchy_pdf", "envelope_threshold", "RejectionSampler", "EnvelopeViolation",
    "synthetic_sample", "ise", "support_above", "ChiSquareResult", "chi_square_gof",
    "resampling_scale",
    "PipelineResult", "run_pipeline", "kde_tail_histogram", "validate", "BenchmarkRow",
    "amise_benchmark", "benchmark_table", "ESTIMATORS",
]
