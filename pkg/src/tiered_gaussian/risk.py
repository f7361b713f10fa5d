"""Value-at-Risk and Expected Shortfall from a fitted model's tails.

Losses are the variate itself. For the lower tail VaR is the alpha-quantile
and ES the mean of the variate below it; the upper tail mirrors this at
1 - alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TieredGaussianModel, normalization_constant, pdf_unnormalized, quantile
from .quadrature import QuadratureError, integrate
from .serialization import dumps


def _check(alpha, tail):
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    if tail not in ("lower", "upper"):
        raise ValueError("tail must be 'lower' or 'upper'")


def value_at_risk(model: TieredGaussianModel, alpha, tail="lower"):
    _check(alpha, tail)
    return float(quantile(model, alpha if tail == "lower" else 1.0 - alpha))


def tail_first_moment(model: TieredGaussianModel, var, tail="lower"):
    """Integral of x f(x) over the tail beyond ``var``."""
    n = normalization_constant(model)
    smax = float(model.widths[-1])
    pts = [c.mean + k * c.width for c in model.components for k in (-3, -1, 0, 1, 3)]

    def g(x):
        return x * pdf_unnormalized(model, x) / n

    if tail == "lower":
        r = integrate(g, -np.inf, var, breakpoints=[p for p in pts if p < var],
                      epsabs=1e-15, epsrel=1e-11, tail_scale=smax)
    else:
        r = integrate(g, var, np.inf, breakpoints=[p for p in pts if p > var],
                      epsabs=1e-15, epsrel=1e-11, tail_scale=smax)
    if not math.isfinite(r.value):
        raise QuadratureError("tail integral is not finite", r.value, r.error)
    return float(r.value)


def expected_shortfall(model: TieredGaussianModel, alpha, tail="lower"):
    """Mean of the variate beyond VaR: (1 / alpha) times the tail integral of x f(x)."""
    _check(alpha, tail)
    var = value_at_risk(model, alpha, tail)
    return tail_first_moment(model, var, tail) / alpha


@dataclass(frozen=True)
class RiskReport:
    level: float
    var: float
    expected_shortfall: float
    tail: str

    def to_dict(self):
        return {"level": self.level, "tail": self.tail, "var": self.var,
                "expected_shortfall": self.expected_shortfall}

    def dumps(self):
        return dumps(self.to_dict())


def risk_report(model, alpha, tail="lower"):
    return RiskReport(float(alpha), value_at_risk(model, alpha, tail),
                      expected_shortfall(model, alpha, tail), tail)


def max_drawdowns(paths):
    """Largest peak-to-trough fall, relative to the running peak, of each path."""
    p = np.asarray(paths, float)
    peak = np.maximum.accumulate(p, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        dd = np.where(peak > 0, 1.0 - p / peak, np.nan)
    return np.nanmax(dd, axis=-1)


def max_drawdown_distribution(model, n_paths, steps, dt, seed, x0=1.0, method="euler",
                              quantiles=(0.5, 0.9, 0.95, 0.99)):
    """Empirical max-drawdown distribution over simulated paths of the model's SDE."""
    from .stochastic import sde_from_model, simulate_ensemble

    spec = sde_from_model(model, x0=x0, dt=dt, steps=steps)
    dd = max_drawdowns(simulate_ensemble(spec, n_paths, seed, method=method))
    return {"paths": int(n_paths), "steps": int(steps), "dt": float(dt),
            "mean": float(np.mean(dd)),
            "quantiles": {str(q): float(np.quantile(dd, q)) for q in quantiles}}


__all__ = ["value_at_risk", "tail_first_moment", "expected_shortfall", "RiskReport",
           "risk_report", "max_drawdowns", "max_drawdown_distribution"]
