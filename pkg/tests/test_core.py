import math
import threading

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from tiered_gaussian import core
from tiered_gaussian.core import (ComponentGaussian, ComponentGeometry, DomainConfigurationError,
                                  ModelError, TieredGaussianModel, TruncatedModel,
                                  analyze_component_geometry, cdf, generate_components,
                                  log_sum_eval, moments, normalization_constant, pdf,
                                  pdf_unnormalized, quantile, sample_variates, truncated_constant,
                                  truncated_pdf)
from tiered_gaussian.validation import DAILY_POINTS, MINUTE_POINTS

from conftest import models, random_model, table_model

UNIT = TieredGaussianModel([ComponentGaussian(1.0, 0.0, 1.0)])

# extended-precision oracles (mpmath, 40 digits)
TABLE_S0 = 16.59075704655957579666720413464791809066
TABLE_N = 28513241.42622895036189795
UNIT_PDFU0 = 0.4902475996317194159264381759670575844827
CT_SERIES = 1.157785318828836994145667220907690948317
CT_AMPLITUDE_ONE = 3.697252480599020399885520188774040477543


def _quad(f, a, b, points=None):
    return integrate.quad(f, a, b, points=points, limit=500, epsabs=1e-13, epsrel=1e-11)[0]


# ---------------------------------------------------------------------------
# model type
# ---------------------------------------------------------------------------

def test_component_rejects_nonpositive_weight_and_width():
    with pytest.raises(ModelError):
        ComponentGaussian(0.0, 0.0, 1.0)
    with pytest.raises(ModelError):
        ComponentGaussian(1.0, 0.0, -1.0)
    with pytest.raises(ModelError):
        ComponentGaussian(float("nan"), 0.0, 1.0)


def test_model_sorts_by_width_and_requires_strict_increase():
    m = TieredGaussianModel([ComponentGaussian(2.0, 0.0, 3.0), ComponentGaussian(1.0, 0.0, 1.0)])
    assert list(m.widths) == [1.0, 3.0]
    with pytest.raises(ModelError):
        TieredGaussianModel([ComponentGaussian(1.0, 0.0, 1.0), ComponentGaussian(2.0, 0.0, 1.0)])


def test_monotone_weight_flag():
    comps = [ComponentGaussian(3.0, 0.0, 1.0), ComponentGaussian(2.0, 0.0, 2.0)]
    with pytest.raises(ModelError):
        TieredGaussianModel(comps)
    assert TieredGaussianModel(comps, monotone_weights=False).n_components == 2


@given(models())
def test_serialization_round_trip_is_bit_exact(m):
    normalization_constant(m)
    back = TieredGaussianModel.loads(m.dumps())
    assert back == m
    assert back.normalization == m.normalization
    assert np.array_equal(back.weights, m.weights) and np.array_equal(back.widths, m.widths)


# ---------------------------------------------------------------------------
# log-domain sum and unnormalized density
# ---------------------------------------------------------------------------

def test_log_sum_vanishes_far_from_the_centre():
    assert log_sum_eval(UNIT, 50.0) < 1e-300
    assert log_sum_eval(UNIT, -50.0) < 1e-300
    assert pdf_unnormalized(UNIT, 50.0) == 0.0


@given(models())
def test_log_sum_at_least_the_narrowest_summand(m):
    c = m.components[0]
    assert log_sum_eval(m, c.mean) >= c.weight / (c.width * math.sqrt(2 * math.pi)) * (1 - 1e-15)


def test_log_sum_of_table_model_matches_extended_precision():
    mp.mp.dps = 40
    oracle = mp.fsum(mp.mpf(c.weight) / (mp.mpf(c.width) * mp.sqrt(2 * mp.pi))
                     for c in table_model().components)
    assert float(oracle) == pytest.approx(TABLE_S0, rel=1e-15)
    assert log_sum_eval(table_model(), 0.0) == pytest.approx(TABLE_S0, rel=1e-14)


def test_unit_component_unnormalized_density_at_centre():
    assert pdf_unnormalized(UNIT, 0.0) == pytest.approx(UNIT_PDFU0, rel=1e-15)


@given(models(), st.lists(st.floats(-200, 200), min_size=1, max_size=50))
def test_log_identity(m, xs):
    x = np.array(xs)
    s = log_sum_eval(m, x)
    assert np.all(s >= 0)
    assert np.max(np.abs(np.log1p(pdf_unnormalized(m, x)) - s)) < 1e-12


def test_exponent_overflow_is_a_domain_error():
    m = TieredGaussianModel([ComponentGaussian(2000.0, 0.0, 1.0)])
    with pytest.raises(DomainConfigurationError):
        pdf_unnormalized(m, 0.0)


@given(models())
def test_tail_reverts_to_the_gaussian_sum(m):
    lo, hi, _ = core.support_window(m)
    x = np.linspace(lo, hi, 4001)
    s = log_sum_eval(m, x)
    sel = (s < 1e-3) & (s > 0)
    if sel.any():
        assert np.max(np.abs(pdf_unnormalized(m, x[sel]) / s[sel] - 1.0)) < 1e-3


# ---------------------------------------------------------------------------
# normalization and pdf
# ---------------------------------------------------------------------------

@given(models(), st.floats(-50, 50))
def test_normalization_is_translation_invariant(m, c):
    assert normalization_constant(m.shifted(c)) == pytest.approx(normalization_constant(m),
                                                                 rel=1e-9)


def test_unit_component_normalization_is_the_truncated_constant():
    assert normalization_constant(UNIT) == pytest.approx(truncated_constant(), rel=1e-11)


def test_table_model_normalization_two_schemes():
    m = table_model()
    n = normalization_constant(m)
    assert n == pytest.approx(TABLE_N, rel=1e-9)
    pts = [-300, -100, -30, -10, -3, 0, 3, 10, 30, 100, 300]
    f = lambda x: math.expm1(float(log_sum_eval(m, x)))
    other = sum(_quad(f, a, b) for a, b in zip(pts[:-1], pts[1:]))
    other += 2 * _quad(f, 300, np.inf)
    assert other == pytest.approx(n, rel=1e-8)


def test_normalization_is_cached_once_under_concurrency():
    m = table_model()
    out = []
    threads = [threading.Thread(target=lambda: out.append(normalization_constant(m)))
               for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(out)) == 1 and m.normalization == out[0]


def test_pdf_integrates_to_one_for_random_models(rng):
    for _ in range(10):
        m = random_model(rng)
        lo, hi, _ = core.support_window(m)
        pts = sorted({float(c.mean + k * c.width) for c in m.components for k in (-3, 0, 3)})
        total = _quad(lambda x: float(pdf(m, x)), -np.inf, lo) + _quad(lambda x: float(pdf(m, x)), hi, np.inf)
        total += _quad(lambda x: float(pdf(m, x)), lo, hi, points=[p for p in pts if lo < p < hi])
        assert abs(total - 1.0) < 1e-6


@given(models(symmetric=True), st.floats(0, 100))
def test_symmetric_pdf_is_even(m, d):
    c = m.means[0]
    assert pdf(m, c + d) == pytest.approx(pdf(m, c - d), rel=1e-12, abs=1e-300)


def test_pdf_nonnegative_on_random_grid(rng):
    m = table_model()
    x = rng.uniform(-500, 500, 10_000)
    assert np.all(pdf(m, x) >= 0)


# ---------------------------------------------------------------------------
# cdf and quantile
# ---------------------------------------------------------------------------

def test_cdf_limits(leptokurtic):
    far = 1e6 * leptokurtic.widths[-1]
    assert cdf(leptokurtic, -far) < 1e-9
    assert cdf(leptokurtic, far) > 1 - 1e-9


@given(models(symmetric=True))
def test_symmetric_cdf_at_the_centre(m):
    assert cdf(m, m.means[0]) == pytest.approx(0.5, abs=1e-8)


def test_cdf_difference_matches_interval_quadrature(leptokurtic, rng):
    m = leptokurtic
    for x1, x2 in np.sort(rng.uniform(-30, 30, (10, 2)), axis=1):
        ref = _quad(lambda x: float(pdf(m, x)), x1, x2, points=[p for p in (-8, -2, 0, 2, 8)
                                                               if x1 < p < x2])
        assert cdf(m, x2) - cdf(m, x1) == pytest.approx(ref, abs=1e-8)


@given(models())
def test_cdf_nondecreasing_and_quantile_round_trip(m):
    lo, hi, _ = core.support_window(m)
    x = np.linspace(lo, hi, 501)
    F = cdf(m, x)
    assert np.all(np.diff(F) >= -1e-15)
    inner = x[(F > 1e-6) & (F < 1 - 1e-6)]
    if inner.size:
        assert np.max(np.abs(quantile(m, cdf(m, inner)) - inner)) < 1e-6


@given(models(symmetric=True), st.floats(1e-6, 0.5))
def test_symmetric_quantiles(m, p):
    c = m.means[0]
    assert quantile(m, 0.5) == pytest.approx(c, abs=1e-6)
    assert quantile(m, p) + quantile(m, 1 - p) == pytest.approx(2 * c, abs=1e-6)


def test_quantile_accuracy(leptokurtic):
    for p in (1e-8, 1e-4, 0.01, 0.3, 0.77, 1 - 1e-7):
        assert abs(cdf(leptokurtic, quantile(leptokurtic, p)) - p) < 1e-9


def test_quantile_rejects_out_of_range(leptokurtic):
    for p in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            quantile(leptokurtic, p)


def test_leptokurtic_extreme_quantile_beyond_gaussian(leptokurtic):
    ms = moments(leptokurtic)
    z = (ms.mean - quantile(leptokurtic, 1e-4)) / ms.std_dev
    assert z > -stats.norm.ppf(1e-4)
    assert -stats.norm.ppf(1e-4) == pytest.approx(3.719, abs=1e-3)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------

@given(models(max_components=4, symmetric=True))
def test_symmetric_skew_is_zero(m):
    assert abs(moments(m).skew) < 1e-8


@given(st.floats(-10, 10), st.floats(0.1, 10))
def test_single_component_mean(mu, s):
    m = TieredGaussianModel([ComponentGaussian(s, mu, s)])
    assert moments(m).mean == pytest.approx(mu, abs=1e-8 * max(1.0, s))


def test_single_component_is_mildly_leptokurtic():
    k = moments(UNIT).kurtosis
    assert k is not None and k > 3.0
    # oracle: direct quadrature of the fourth and second moments
    c = truncated_constant()
    f = lambda z: math.expm1(math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)) / c
    m2 = _quad(lambda z: z * z * f(z), -40, 40)
    m4 = _quad(lambda z: z ** 4 * f(z), -40, 40)
    assert k == pytest.approx(m4 / m2 ** 2, rel=1e-8)


def test_moments_match_direct_quadrature(leptokurtic):
    m = leptokurtic
    f = lambda x: float(pdf(m, x))
    pts = [-24, -8, -2, 0, 2, 8, 24]
    mean = _quad(lambda x: x * f(x), -200, 200, points=pts)
    var = _quad(lambda x: (x - mean) ** 2 * f(x), -200, 200, points=pts)
    ms = moments(m)
    assert ms.mean == pytest.approx(mean, abs=1e-9)
    assert ms.std_dev == pytest.approx(math.sqrt(var), rel=1e-8)


# ---------------------------------------------------------------------------
# truncated single-component form
# ---------------------------------------------------------------------------

def test_truncated_constant_series_oracle():
    mp.mp.dps = 40
    series = mp.nsum(lambda k: (2 * mp.pi) ** ((1 - k) / 2) / mp.sqrt(k) / mp.factorial(k),
                     [1, mp.inf])
    assert float(series) == pytest.approx(CT_SERIES, rel=1e-15)
    assert truncated_constant() == pytest.approx(CT_SERIES, rel=1e-10)


def test_truncated_constant_stable_under_domain_doubling():
    a = 1 / math.sqrt(2 * math.pi)
    f = lambda z: math.expm1(a * math.exp(-0.5 * z * z))
    narrow = _quad(f, -40, 40, points=[0])
    wide = _quad(f, -80, 80, points=[0])
    assert wide == pytest.approx(narrow, rel=1e-12)
    assert truncated_constant() == pytest.approx(narrow, rel=1e-12)


def test_reference_truncated_constant_is_the_amplitude_one_integral():
    # recorded, not asserted equal: the reference figure matches the unit-amplitude variant
    assert truncated_constant() != pytest.approx(core.PRINTED_TRUNCATED_CONSTANT, rel=1e-3)
    assert truncated_constant(1.0) == pytest.approx(CT_AMPLITUDE_ONE, rel=1e-12)
    assert truncated_constant(1.0) == pytest.approx(core.PRINTED_TRUNCATED_CONSTANT, rel=1e-11)


@given(st.floats(-5, 5), st.floats(0.05, 20))
def test_truncated_pdf_properties(mu, s):
    t = TruncatedModel(mu, s)
    total = _quad(lambda x: float(truncated_pdf(t, x)), mu - 40 * s, mu + 40 * s, points=[mu])
    assert total == pytest.approx(1.0, abs=1e-8)
    for d in (0.1 * s, s, 3 * s):
        assert truncated_pdf(t, mu + d) == pytest.approx(truncated_pdf(t, mu - d), rel=1e-13)
        assert truncated_pdf(t, mu + d) < truncated_pdf(t, mu)
    assert truncated_pdf(t, mu) == pytest.approx(truncated_pdf(TruncatedModel(0, 1), 0) / s,
                                                 rel=1e-13)


# ---------------------------------------------------------------------------
# weight/width geometry
# ---------------------------------------------------------------------------

@given(st.floats(0.5, 20), st.floats(-5, 5), st.floats(0.1, 3), st.floats(1.2, 5),
       st.floats(0.1, 5), st.integers(3, 8))
def test_generate_then_analyze_round_trip(a, b, s1, rho, step, n):
    geom = ComponentGeometry(a, b, s1, rho, step)
    if a * s1 + b <= 0:
        with pytest.raises(ModelError):
            generate_components(geom, n)
        return
    comps = generate_components(geom, n)
    w = np.array([c.weight for c in comps])
    s = np.array([c.width for c in comps])
    assert np.max(np.abs(w - (a * s + b))) <= 1e-12 * np.max(np.abs(w))
    seg = np.hypot(np.diff(s), np.diff(w))
    assert np.allclose(seg[1:] / seg[:-1], rho, rtol=1e-12)
    fit = analyze_component_geometry(list(zip(s, w)))
    g = fit.geometry
    assert g.slope == pytest.approx(a, rel=1e-9)
    assert g.intercept == pytest.approx(b, rel=1e-9, abs=1e-9 * abs(a))
    assert g.segment_ratio == pytest.approx(rho, rel=1e-9)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_nonpositive_generated_component_reported_with_index():
    geom = ComponentGeometry(-1.0, 3.0, 1.0, 2.0, 1.0)
    with pytest.raises(ModelError, match="component 2"):
        generate_components(geom, 4)


def test_daily_segment_ratio():
    fit = analyze_component_geometry(DAILY_POINTS)
    p = np.array(DAILY_POINTS)
    seg = np.hypot(np.diff(p[:, 0]), np.diff(p[:, 1]))
    assert fit.geometry.segment_ratio == pytest.approx(seg[1] / seg[0], rel=1e-14)
    assert fit.geometry.segment_ratio == pytest.approx(3.488, rel=5e-3)
    assert fit.r2 > 0.999


def test_minute_ratio_close_to_daily():
    daily = analyze_component_geometry(DAILY_POINTS).geometry.segment_ratio
    minute = analyze_component_geometry(MINUTE_POINTS).geometry.segment_ratio
    assert abs(minute / daily - 1.0) <= 2e-3


@pytest.mark.xfail(strict=True, reason="regenerated third daily point is 3.1% off in width; "
                   "the reference triple is not exactly ratio-3.488 spaced")
def test_seeded_generation_reproduces_third_daily_point():
    geom = ComponentGeometry.from_seed_points(DAILY_POINTS[0], DAILY_POINTS[1], 3.488)
    third = generate_components(geom, 3)[2]
    assert third.width == pytest.approx(DAILY_POINTS[2][0], rel=0.02)
    assert third.weight == pytest.approx(DAILY_POINTS[2][1], rel=0.02)


def test_degenerate_geometry_rejected():
    with pytest.raises(ModelError):
        analyze_component_geometry([(1.0, 2.0), (1.0, 2.0), (3.0, 4.0)])
    with pytest.raises(ValueError):
        analyze_component_geometry([(1.0, 2.0), (2.0, 3.0)])


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sampling_is_deterministic(leptokurtic):
    a = sample_variates(leptokurtic, 1000, 99)
    assert np.array_equal(a, sample_variates(leptokurtic, 1000, 99))
    assert not np.array_equal(a, sample_variates(leptokurtic, 1000, 100))


def test_sample_mean_and_ks(leptokurtic):
    n = 100_000
    x = sample_variates(leptokurtic, n, 5)
    ms = moments(leptokurtic)
    assert abs(x.mean() - ms.mean) < 4 * ms.std_dev / math.sqrt(n)
    ks = stats.kstest(x, lambda v: cdf(leptokurtic, v)).statistic
    assert ks < 0.01
