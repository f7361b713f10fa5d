"""The exponentiated Gaussian-sum density family.

A model with components (w_i, mu_i, sigma_i) has the log-domain sum

    S(x) = sum_i w_i / (sigma_i sqrt(2 pi)) exp(-(x - mu_i)^2 / (2 sigma_i^2))

and density f(x) = (exp(S(x)) - 1) / N, where N integrates the numerator
over the real line. Nothing here has a closed form beyond S itself, so
normalization, the CDF, quantiles and moments are all adaptive quadrature
over a window chosen from the components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from . import _kernels
from .quadrature import QuadratureError, gk21, integrate
from .serialization import dumps, loads

SQRT_2PI = math.sqrt(2.0 * math.pi)
MAX_LOG_SUM = math.log(np.finfo(float).max)

#: Reference value for the truncated form's constant. Kept for
#: comparison only; :func:`truncated_constant` is always computed.
PRINTED_TRUNCATED_CONSTANT = 3.697252480597963

SCHEMA_VERSION = 1

_PEAK_FRACTION = 1e-15
_NORM_EPSREL = 1e-12


class ModelError(ValueError):
    """Invalid model parameters."""


class DomainConfigurationError(OverflowError):
    """The log-domain sum exceeds the floating-point exponent range."""


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr.reshape(-1), arr.ndim == 0, arr.shape


def _restore(values, scalar, shape):
    if scalar:
        return float(values[0])
    return values.reshape(shape)


@dataclass(frozen=True)
class ComponentGaussian:
    weight: float
    mean: float
    width: float

    def __post_init__(self):
        for name in ("weight", "mean", "width"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ModelError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.weight <= 0:
            raise ModelError(f"weight must be > 0, got {self.weight!r}")
        if self.width <= 0:
            raise ModelError(f"width must be > 0, got {self.width!r}")


class TieredGaussianModel:
    """Ordered components plus a lazily computed normalization divisor.

    Components are stored sorted by width and widths must be strictly
    increasing. With ``monotone_weights`` (the default) weights must increase
    with width as well; switch it off for exploratory fits.

    Instances are immutable; derived quantities (normalization, CDF table,
    support window) are cached on first use. Concurrent first use computes
    the same value, and the first stored copy wins.
    """

    __slots__ = ("components", "monotone_weights", "_cache", "_arrays")

    def __init__(self, components: Sequence[ComponentGaussian], *, monotone_weights=True,
                 normalization: Optional[float] = None):
        comps = tuple(sorted(components, key=lambda c: c.width))
        if not comps:
            raise ModelError("a model needs at least one component")
        widths = [c.width for c in comps]
        for i in range(1, len(comps)):
            if not widths[i] > widths[i - 1]:
                raise ModelError(f"widths must be strictly increasing; components {i - 1} and {i} "
                                 f"share width {widths[i]!r}")
            if monotone_weights and not comps[i].weight > comps[i - 1].weight:
                raise ModelError(f"weights must increase with width (component {i}: "
                                 f"{comps[i].weight!r} <= {comps[i - 1].weight!r}); "
                                 "pass monotone_weights=False to allow this")
        self.components = comps
        self.monotone_weights = bool(monotone_weights)
        self._cache = {}
        w = np.array([c.weight for c in comps])
        mu = np.array([c.mean for c in comps])
        sig = np.array(widths)
        for a in (w, mu, sig):
            a.setflags(write=False)
        self._arrays = (w, mu, sig)
        if normalization is not None:
            n = float(normalization)
            if not n > 0:
                raise ModelError(f"normalization must be > 0, got {n!r}")
            self._cache["normalization"] = n

    @classmethod
    def from_arrays(cls, weights, means, widths, **kwargs):
        comps = [ComponentGaussian(w, m, s) for w, m, s in zip(weights, means, widths)]
        return cls(comps, **kwargs)

    @property
    def weights(self):
        return self._arrays[0]

    @property
    def means(self):
        return self._arrays[1]

    @property
    def widths(self):
        return self._arrays[2]

    @property
    def n_components(self):
        return len(self.components)

    @property
    def is_symmetric(self):
        return bool(np.all(self.means == self.means[0]))

    @property
    def normalization(self):
        """The cached divisor, or None if it has not been computed yet."""
        return self._cache.get("normalization")

    def shifted(self, c):
        """Same shape translated by ``c``."""
        return TieredGaussianModel(
            [ComponentGaussian(k.weight, k.mean + c, k.width) for k in self.components],
            monotone_weights=self.monotone_weights)

    def scaled(self, lam):
        """The model of ``lam * X``: means, widths and weights all scale by ``lam``.

        The weight has to scale too, because S(x) carries 1/sigma_i; with it,
        the new sum is S(x / lam) and the density is f(x / lam) / lam.
        """
        if not lam > 0:
            raise ModelError("scale factor must be > 0")
        return TieredGaussianModel(
            [ComponentGaussian(k.weight * lam, k.mean * lam, k.width * lam)
             for k in self.components],
            monotone_weights=self.monotone_weights)

    def __eq__(self, other):
        return (isinstance(other, TieredGaussianModel)
                and self.components == other.components)

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        body = ", ".join(f"({c.weight:.6g}, {c.mean:.6g}, {c.width:.6g})" for c in self.components)
        return f"TieredGaussianModel([{body}])"

    # -- serialization -----------------------------------------------------

    def to_dict(self, include_normalization=True):
        return {
            "schema_version": SCHEMA_VERSION,
            "components": [{"weight": c.weight, "mean": c.mean, "width": c.width}
                           for c in self.components],
            "normalization": self.normalization if include_normalization else None,
        }

    @classmethod
    def from_dict(cls, doc, monotone_weights=None):
        version = doc.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ModelError(f"unsupported schema_version {version!r}")
        comps = [ComponentGaussian(c["weight"], c["mean"], c["width"]) for c in doc["components"]]
        if monotone_weights is None:
            ws = [c.weight for c in sorted(comps, key=lambda c: c.width)]
            monotone_weights = all(b > a for a, b in zip(ws, ws[1:]))
        return cls(comps, monotone_weights=monotone_weights,
                   normalization=doc.get("normalization"))

    def dumps(self):
        return dumps(self.to_dict())

    @classmethod
    def loads(cls, text):
        return cls.from_dict(loads(text))


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------

def log_sum_eval(model: TieredGaussianModel, x):
    """The weighted Gaussian sum S(x), i.e. log(f_unnormalized(x) + 1)."""
    xs, scalar, shape = _as_array(x)
    return _restore(_kernels.log_sum(xs, *model._arrays), scalar, shape)


def _log_sum(model, xs):
    return _kernels.log_sum(xs, *model._arrays)


def _expm1_checked(s):
    if s.size and np.max(s) > MAX_LOG_SUM:
        raise DomainConfigurationError(
            f"log-domain sum reaches {np.max(s):.6g}, beyond the exponent range "
            f"({MAX_LOG_SUM:.6g}); the component weights are too large for these widths")
    return np.expm1(s)


def pdf_unnormalized(model, x):
    """exp(S(x)) - 1, which is >= 0 and zero exactly where S(x) is."""
    xs, scalar, shape = _as_array(x)
    return _restore(_expm1_checked(_log_sum(model, xs)), scalar, shape)


def _unnorm(model):
    w, mu, sig = model._arrays
    return lambda xs: _expm1_checked(_kernels.log_sum(xs, w, mu, sig))


def support_window(model):
    """Finite window [lo, hi] outside of which the integrand is below 1e-15 of its peak.

    Starts 8 widest-widths beyond the extreme means and steps outward one
    widest-width at a time until both endpoints satisfy the bound.
    """
    cached = model._cache.get("window")
    if cached is not None:
        return cached
    f = _unnorm(model)
    w, mu, sig = model._arrays
    smax = sig[-1]
    grid = np.concatenate([mu, np.linspace(mu.min() - 3 * smax, mu.max() + 3 * smax, 4001)])
    for m, s in zip(mu, sig):
        grid = np.concatenate([grid, m + s * np.linspace(-3, 3, 61)])
    peak = float(np.max(f(grid)))
    if not peak > 0:
        raise ModelError("model density underflows everywhere")
    lo = mu.min() - 8 * smax
    hi = mu.max() + 8 * smax
    while f(np.array([lo]))[0] > _PEAK_FRACTION * peak:
        lo -= smax
    while f(np.array([hi]))[0] > _PEAK_FRACTION * peak:
        hi += smax
    out = (float(lo), float(hi), peak)
    return model._cache.setdefault("window", out)


def _breakpoints(model, lo, hi):
    w, mu, sig = model._arrays
    offsets = np.array([-6.0, -3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0, 6.0])
    pts = (mu[:, None] + sig[:, None] * offsets[None, :]).ravel()
    pts = pts[(pts > lo) & (pts < hi)]
    return np.unique(np.concatenate([[lo, hi], pts]))


@dataclass(frozen=True)
class _CdfTable:
    edges: np.ndarray      # partition of [lo, hi]
    cum: np.ndarray        # unnormalized integral from -inf to each edge
    pieces: np.ndarray
    total: float
    error: float


def _cdf_table(model) -> _CdfTable:
    cached = model._cache.get("cdf_table")
    if cached is not None:
        return cached
    lo, hi, peak = support_window(model)
    f = _unnorm(model)
    smax = float(model.widths[-1])
    core = integrate(f, lo, hi, breakpoints=_breakpoints(model, lo, hi), epsrel=_NORM_EPSREL,
                     epsabs=1e-300)
    tail_tol = 1e-6 * _NORM_EPSREL * abs(core.value)
    left = integrate(f, -np.inf, lo, epsabs=tail_tol, epsrel=1e-8, tail_scale=smax)
    right = integrate(f, hi, np.inf, epsabs=tail_tol, epsrel=1e-8, tail_scale=smax)
    cum = left.value + np.concatenate([[0.0], np.cumsum(core.pieces)])
    total = float(left.value + core.value + right.value)
    if not (total > 0 and math.isfinite(total)):
        raise QuadratureError("normalization integral is not finite and positive", total,
                              core.error)
    table = _CdfTable(core.edges, cum, core.pieces, total,
                      float(core.error + left.error + right.error))
    return model._cache.setdefault("cdf_table", table)


def normalization_constant(model):
    """N, the integral of exp(S(x)) - 1 over the real line.

    Computed once per model (relative tolerance 1e-12, well inside the 1e-9
    contract) and cached. A divisor supplied at construction is returned as
    is.
    """
    n = model._cache.get("normalization")
    if n is not None:
        return n
    table = _cdf_table(model)
    if table.error > 1e-9 * table.total:
        raise QuadratureError("normalization did not converge", table.total, table.error)
    return model._cache.setdefault("normalization", table.total)


def normalization_error(model):
    """Absolute error estimate of the quadrature behind :func:`normalization_constant`."""
    return _cdf_table(model).error


def pdf(model, x):
    xs, scalar, shape = _as_array(x)
    n = normalization_constant(model)
    return _restore(_expm1_checked(_log_sum(model, xs)) / n, scalar, shape)


def pdf_derivatives(model, x):
    """(f, f', f'') of the normalized density at ``x``."""
    xs, scalar, shape = _as_array(x)
    n = normalization_constant(model)
    s0, s1, s2 = _kernels.log_sum_derivs(xs, *model._arrays)
    e = np.exp(s0)
    f0 = np.expm1(s0) / n
    f1 = e * s1 / n
    f2 = e * (s2 + s1 * s1) / n
    return tuple(_restore(v, scalar, shape) for v in (f0, f1, f2))


# ---------------------------------------------------------------------------
# CDF and quantile
# ---------------------------------------------------------------------------

def _tail_integral(model, x, side):
    f = _unnorm(model)
    smax = float(model.widths[-1])
    if side < 0:
        r = integrate(f, -np.inf, x, epsabs=1e-300, epsrel=1e-10, tail_scale=smax)
    else:
        r = integrate(f, x, np.inf, epsabs=1e-300, epsrel=1e-10, tail_scale=smax)
    return r.value


def _in_piece(model, table, k, xs):
    """Unnormalized integral from -inf to xs, where xs lies in piece k."""
    f = _unnorm(model)
    part, _ = gk21(f, table.edges[k], xs)
    part = np.clip(part, 0.0, table.pieces[k])
    return table.cum[k] + part


def _cdf_unnormalized(model, xs):
    table = _cdf_table(model)
    edges = table.edges
    out = np.empty(xs.size)
    inside = (xs >= edges[0]) & (xs <= edges[-1])
    if inside.any():
        xi = xs[inside]
        k = np.clip(np.searchsorted(edges, xi, side="right") - 1, 0, edges.size - 2)
        out[inside] = _in_piece(model, table, k, xi)
    for j in np.flatnonzero(~inside):
        if xs[j] < edges[0]:
            out[j] = _tail_integral(model, xs[j], -1)
        else:
            out[j] = table.total - _tail_integral(model, xs[j], +1)
    return out, table.total


def cdf(model, x):
    """Probability below ``x``, by cumulative adaptive quadrature."""
    xs, scalar, shape = _as_array(x)
    if np.isnan(xs).any():
        raise ValueError("cdf argument contains NaN")
    num, total = _cdf_unnormalized(model, xs)
    out = np.clip(num / total, 0.0, 1.0)
    out = np.where(np.isposinf(xs), 1.0, np.where(np.isneginf(xs), 0.0, out))
    return _restore(out, scalar, shape)


def quantile(model, p, tol=1e-12):
    """Inverse CDF, accurate to |cdf(x) - p| < 1e-9 (``tol`` is the working target).

    The CDF table brackets each p inside one quadrature piece; safeguarded
    Newton steps (falling back to bisection) refine within the piece.
    """
    ps, scalar, shape = _as_array(p)
    if np.any(~((ps > 0) & (ps < 1))):
        raise ValueError("quantile levels must lie strictly between 0 and 1")
    table = _cdf_table(model)
    total = table.total
    target = ps * total
    edges, cum = table.edges, table.cum
    out = np.empty(ps.size)

    inside = (target >= cum[0]) & (target <= cum[-1])
    if inside.any():
        t = target[inside]
        k = np.clip(np.searchsorted(cum, t, side="right") - 1, 0, edges.size - 2)
        a = edges[k].copy()
        b = edges[k + 1].copy()
        span = table.pieces[k]
        frac = np.where(span > 0, (t - cum[k]) / np.where(span > 0, span, 1.0), 0.5)
        x = a + np.clip(frac, 0.0, 1.0) * (b - a)
        active = np.arange(t.size)
        for _ in range(200):
            xa = x[active]
            F = (_in_piece(model, table, k[active], xa) - t[active]) / total
            lo_move = F < 0
            a[active] = np.where(lo_move, xa, a[active])
            b[active] = np.where(lo_move, b[active], xa)
            dens = _expm1_checked(_log_sum(model, xa)) / total
            with np.errstate(divide="ignore", invalid="ignore"):
                dx = F / dens
                step = xa - dx
            # where the density is small a tiny residual in p is a large one in x
            done = (np.abs(F) <= tol) & (np.abs(dx) <= 1e-11 * np.maximum(1.0, np.abs(xa)))
            done |= F == 0
            bad = ~np.isfinite(step) | (step <= a[active]) | (step >= b[active])
            step = np.where(bad, 0.5 * (a[active] + b[active]), step)
            narrow = (b[active] - a[active]) <= 4 * np.finfo(float).eps * np.maximum(
                1.0, np.abs(xa))
            done |= narrow
            x[active] = np.where(done, xa, step)
            active = active[~done]
            if active.size == 0:
                break
        out[inside] = x

    smax = float(model.widths[-1])
    for j in np.flatnonzero(~inside):
        pj = ps[j]
        if target[j] < cum[0]:
            hi = edges[0]
            lo = hi - smax
            while cdf(model, lo) > pj:
                lo -= smax
            out[j] = optimize.brentq(lambda v: cdf(model, v) - pj, lo, hi, xtol=1e-14, rtol=1e-14)
        else:
            lo = edges[-1]
            hi = lo + smax
            while cdf(model, hi) < pj:
                hi += smax
            out[j] = optimize.brentq(lambda v: cdf(model, v) - pj, lo, hi, xtol=1e-14, rtol=1e-14)
    return _restore(out, scalar, shape)


def sample_variates(model, count, seed):
    """``count`` draws by inverse-CDF sampling; the same seed gives the same draws."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(int(count))
    u = np.where(u > 0, u, np.finfo(float).tiny)
    return quantile(model, u)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentSummary:
    mean: float
    std_dev: float
    skew: float
    kurtosis: Optional[float]

    @property
    def kurtosis_defined(self):
        return self.kurtosis is not None


KURTOSIS_DIVERGENCE_RTOL = 1e-3


def density_moments(density, lo, hi, *, breakpoints=(), tail_scale=1.0, total=1.0):
    """Mean, standard deviation, skew and kurtosis of a vectorized density.

    Mean and variance integrate over the whole line (algebraic tail map, so
    slowly decaying densities still converge). The third moment is taken
    over the symmetric window around the mean that covers [lo, hi]. The
    fourth is integrated over that window and over a window twice as wide;
    if the two differ by more than 1e-3 relative the kurtosis is reported
    as undefined.
    """
    def moment(k, centre, a, b, scale):
        def g(x):
            return (x - centre) ** k * density(x)
        pts = [p for p in breakpoints if a < p < b]
        return integrate(g, a, b, breakpoints=pts + ([centre] if a < centre < b else []),
                         epsabs=1e-12 * scale ** k * total, epsrel=1e-11,
                         tail_scale=tail_scale, tail_power=2).value / total

    mean = moment(1, 0.0, -np.inf, np.inf, tail_scale)
    var = moment(2, mean, -np.inf, np.inf, tail_scale)
    if not var > 0:
        raise QuadratureError("variance is not positive", var)
    sd = math.sqrt(var)
    half = max(hi - mean, mean - lo)
    third = moment(3, mean, mean - half, mean + half, sd)
    m4 = moment(4, mean, mean - half, mean + half, sd)
    m4_wide = moment(4, mean, mean - 2 * half, mean + 2 * half, sd)
    kurt = None
    if m4_wide > 0 and abs(m4_wide - m4) <= KURTOSIS_DIVERGENCE_RTOL * m4_wide:
        kurt = m4_wide / var ** 2
    return MomentSummary(float(mean), float(math.sqrt(var)), float(third / var ** 1.5),
                         None if kurt is None else float(kurt))


def moments(model):
    """Mean, standard deviation, skew and kurtosis, all central moments about the mean."""
    cached = model._cache.get("moments")
    if cached is not None:
        return cached
    lo, hi, _ = support_window(model)
    n = normalization_constant(model)
    summary = density_moments(_unnorm(model), lo, hi, breakpoints=list(_breakpoints(model, lo, hi)),
                              tail_scale=float(model.widths[-1]), total=n)
    return model._cache.setdefault("moments", summary)


# ---------------------------------------------------------------------------
# single-component truncated form
# ---------------------------------------------------------------------------

_CT_CACHE = {}


def truncated_constant(amplitude=1.0 / SQRT_2PI):
    """Integral over the line of exp(amplitude * exp(-z^2/2)) - 1.

    With the default amplitude 1/sqrt(2 pi) this normalizes the
    single-component (truncated) density. Relative accuracy 1e-13; the
    integrand is below 1e-300 beyond |z| = 40.
    """
    key = float(amplitude)
    if key not in _CT_CACHE:
        def f(z):
            return np.expm1(key * np.exp(-0.5 * z * z))
        r = integrate(f, -40.0, 40.0, breakpoints=[-6, -3, -1, 0, 1, 3, 6], epsrel=1e-13)
        _CT_CACHE[key] = r.value
    return _CT_CACHE[key]


@dataclass(frozen=True)
class TruncatedModel:
    mean: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ModelError("width must be > 0")

    @property
    def constant(self):
        return truncated_constant()


def truncated_pdf(t: TruncatedModel, x):
    xs, scalar, shape = _as_array(x)
    z = (xs - t.mean) / t.width
    out = np.expm1(np.exp(-0.5 * z * z) / SQRT_2PI) / (t.constant * t.width)
    return _restore(out, scalar, shape)


# ---------------------------------------------------------------------------
# weight/width geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentGeometry:
    """Components on the line weight = slope*width + intercept.

    Successive (width, weight) points are spaced so that each segment is
    ``segment_ratio`` times longer than the previous one. ``first_step`` is
    the width increment of the first segment; slope, intercept, base width
    and ratio alone do not fix the spacing.
    """

    slope: float
    intercept: float
    base_width: float
    segment_ratio: float
    first_step: float

    def __post_init__(self):
        if not self.segment_ratio > 0:
            raise ModelError("segment_ratio must be > 0")
        if not self.base_width > 0:
            raise ModelError("base_width must be > 0")

    @classmethod
    def from_seed_points(cls, first, second, segment_ratio):
        """Geometry through two (width, weight) points."""
        (s1, w1), (s2, w2) = first, second
        if s1 == s2:
            raise ModelError("seed points need distinct widths")
        slope = (w2 - w1) / (s2 - s1)
        return cls(slope, w1 - slope * s1, s1, segment_ratio, s2 - s1)


def generate_components(geom: ComponentGeometry, n: int, means=None):
    """Components 1..n along the geometry's line (all means 0 unless ``means`` given)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if means is None:
        means = [0.0] * n
    if len(means) != n:
        raise ValueError("need one mean per component")
    widths = [geom.base_width]
    step = geom.first_step
    for _ in range(n - 1):
        widths.append(widths[-1] + step)
        step *= geom.segment_ratio
    out = []
    for i, (s, m) in enumerate(zip(widths, means)):
        w = geom.slope * s + geom.intercept
        if not (s > 0 and w > 0):
            raise ModelError(f"component {i} has nonpositive width or weight "
                             f"(width={s!r}, weight={w!r})")
        out.append(ComponentGaussian(w, m, s))
    return out


@dataclass(frozen=True)
class GeometryFit:
    geometry: ComponentGeometry
    r2: float
    segment_lengths: np.ndarray
    segment_ratios: np.ndarray


def analyze_component_geometry(points):
    """Least-squares line through (width, weight) points plus consecutive segment ratios.

    Points are taken in order of increasing width. The reported
    ``segment_ratio`` is the geometric mean of the consecutive length ratios.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three (width, weight) points")
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    lengths = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    if np.any(lengths == 0):
        raise ModelError("degenerate geometry: repeated points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise ModelError("degenerate geometry: all widths equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / sst if sst > 0 else 1.0
    ratios = lengths[1:] / lengths[:-1]
    geom = ComponentGeometry(float(slope), float(intercept), float(x[0]),
                             float(np.exp(np.mean(np.log(ratios)))), float(x[1] - x[0]))
    return GeometryFit(geom, float(r2), lengths, ratios)
