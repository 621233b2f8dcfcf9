"""Coverage probability of soft frequency reuse in K-tier PPP cellular
networks under Rayleigh-lognormal fading: closed-form quadrature expressions,
an adaptive-integration oracle and a Monte Carlo simulator."""

__version__ = "0.1.0"

from .quadrature import QuadratureRule, gauss_hermite, gauss_legendre, validate_rule
from .channel import FadingParams, cdf_approx, gamma_at, mean_gain, normalize, sample_gain
from .model import (
    ConfigError,
    NetworkConfig,
    TierConfig,
    UnsupportedConfigurationError,
    association_probability,
    nearest_distance_pdf,
    subband_densities,
    table1,
    validate,
)
from .analytic import (
    CoverageQuery,
    Mode,
    Rules,
    average_coverage,
    average_coverage_nonoise,
    conditional_ccu_coverage,
    conditional_ceu_coverage,
    conditional_user_coverage,
    oracle_average_coverage,
    oracle_conditional_coverage,
)
from .montecarlo import CoverageEstimate, SimParams, estimate, estimate_sweep, estimates_from_trials
