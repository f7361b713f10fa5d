"""Exponentiated Gaussian-sum densities for heavy-tailed data.

The density is f(x) = (exp(S(x)) - 1) / N, where S is a sum of weighted
Gaussians and N normalizes. The package fits S to a log-transformed
penalized histogram, samples and integrates the resulting density, drives
paths of the matching SDE and reports tail risk.
"""

from .core import (ComponentGaussian, ComponentGeometry, DomainConfigurationError, GeometryFit,
                   ModelError, MomentSummary, TieredGaussianModel, TruncatedModel,
                   analyze_component_geometry, cdf, generate_components, log_sum_eval, moments,
                   normalization_constant, pdf, pdf_unnormalized, quantile, sample_variates,
                   truncated_constant, truncated_pdf)
from .density import (DensityHistogram, KdeConfig, TailWeightConfig, optimized_histogram,
                      plain_histogram, sheather_jones_bandwidth, sheather_jones_density,
                      zero_bias_kde)
from .fit import (FitError, FitReport, TransformedHistogram, auto_fit, back_transform,
                  fit_fixed_n, transform_histogram)
from .quadrature import QuadratureError
from .risk import RiskReport, expected_shortfall, value_at_risk
from .stochastic import SamplePath, SdeSpec, simulate_closed_form, simulate_euler

__version__ = "0.1.0"
