import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from conftest import models
from tiered_gaussian.core import TieredGaussianModel, cdf, moments, pdf
from tiered_gaussian.risk import (expected_shortfall, max_drawdown_distribution, max_drawdowns,
                                  risk_report, value_at_risk)


def test_alpha_and_tail_validation(leptokurtic):
    for a in (0.0, 0.5, -0.1, 0.7):
        with pytest.raises(ValueError):
            value_at_risk(leptokurtic, a)
    with pytest.raises(ValueError):
        expected_shortfall(leptokurtic, 0.05, tail="both")


def test_var_monotone_in_alpha(leptokurtic):
    alphas = [0.001, 0.01, 0.05, 0.1, 0.25, 0.45]
    lower = [value_at_risk(leptokurtic, a) for a in alphas]
    upper = [value_at_risk(leptokurtic, a, "upper") for a in alphas]
    assert np.all(np.diff(lower) > 0) and np.all(np.diff(upper) < 0)


def test_var_near_half_is_the_common_centre():
    m = TieredGaussianModel.from_arrays([0.5, 2.0], [1.5, 1.5], [0.7, 3.0])
    assert value_at_risk(m, 0.4999999) == pytest.approx(1.5, abs=1e-5)
    assert value_at_risk(m, 0.4999999, "upper") == pytest.approx(1.5, abs=1e-5)


def test_var_against_bisection():
    m = TieredGaussianModel.from_arrays([0.05], [0.2], [1.3])
    root = optimize.bisect(lambda x: cdf(m, x) - 0.01, -20.0, 20.0, xtol=1e-13, rtol=1e-15)
    assert value_at_risk(m, 0.01) == pytest.approx(root, abs=1e-6)


def test_expected_shortfall_beyond_var(leptokurtic):
    for a in (0.001, 0.01, 0.05, 0.2):
        assert expected_shortfall(leptokurtic, a) <= value_at_risk(leptokurtic, a)
        assert expected_shortfall(leptokurtic, a, "upper") >= value_at_risk(leptokurtic, a, "upper")


def test_expected_shortfall_is_the_tail_integral(leptokurtic):
    a = 0.01
    var = value_at_risk(leptokurtic, a)
    pts = sorted(p for p in (-24.0, -8.0, -2.0) if p < var)
    edges = [-np.inf] + pts + [var]
    q = sum(integrate.quad(lambda x: x * pdf(leptokurtic, x), lo, hi, epsabs=1e-14,
                           epsrel=1e-12, limit=400)[0] for lo, hi in zip(edges[:-1], edges[1:]))
    assert a * expected_shortfall(leptokurtic, a) == pytest.approx(q, abs=1e-8)


def test_leptokurtic_shortfall_exceeds_gaussian(leptokurtic):
    a = 0.01
    mo = moments(leptokurtic)
    gaussian = mo.mean - mo.std_dev * stats.norm.pdf(stats.norm.ppf(a)) / a
    assert abs(expected_shortfall(leptokurtic, a)) > abs(gaussian)


def test_translation_equivariance(leptokurtic):
    c = 3.75
    moved = leptokurtic.shifted(c)
    for tail in ("lower", "upper"):
        assert value_at_risk(moved, 0.02, tail) == pytest.approx(
            value_at_risk(leptokurtic, 0.02, tail) + c, abs=1e-8)
        assert expected_shortfall(moved, 0.02, tail) == pytest.approx(
            expected_shortfall(leptokurtic, 0.02, tail) + c, abs=1e-8)


def test_positive_homogeneity(leptokurtic):
    base = leptokurtic.shifted(0.4)
    for lam in (0.3, 2.5):
        s = base.scaled(lam)
        for tail in ("lower", "upper"):
            assert value_at_risk(s, 0.01, tail) == pytest.approx(
                lam * value_at_risk(base, 0.01, tail), rel=1e-6)
            assert expected_shortfall(s, 0.01, tail) == pytest.approx(
                lam * expected_shortfall(base, 0.01, tail), rel=1e-6)


def test_two_sided_average_near_half(leptokurtic):
    m = leptokurtic.shifted(-0.8)
    avg = 0.5 * (expected_shortfall(m, 0.49) + expected_shortfall(m, 0.49, "upper"))
    assert avg == pytest.approx(moments(m).mean, abs=1e-6)


@settings(max_examples=15)
@given(model=models(max_components=4, symmetric=True), a=st.floats(0.002, 0.3))
def test_shortfall_ordering_property(model, a):
    r = risk_report(model, a)
    mean = moments(model).mean
    assert r.expected_shortfall <= r.var <= mean + 1e-9
    assert abs(r.expected_shortfall - mean) >= abs(r.var - mean)


def test_report_serialization(leptokurtic):
    r = risk_report(leptokurtic, 0.05, "upper")
    d = r.to_dict()
    assert d["tail"] == "upper" and d["level"] == 0.05
    assert repr(r.var) in r.dumps()


def test_max_drawdowns():
    paths = np.array([[1.0, 2.0, 1.0, 3.0, 2.4], [1.0, 1.1, 1.2, 1.3, 1.4]])
    np.testing.assert_allclose(max_drawdowns(paths), [0.5, 0.0])


def test_max_drawdown_distribution_is_deterministic(leptokurtic):
    small = TieredGaussianModel.from_arrays([0.2, 0.8], [0.0, 0.0], [0.1, 0.3])
    a = max_drawdown_distribution(small, 200, 50, 0.01, seed=4)
    b = max_drawdown_distribution(small, 200, 50, 0.01, seed=4)
    assert a == b
    assert 0 <= a["quantiles"]["0.5"] <= a["quantiles"]["0.99"] <= 1
