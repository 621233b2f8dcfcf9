"""Composite Rayleigh-lognormal fading.

The power gain is ``g = h * 10**(Z/10)`` with ``h ~ Exp(1)`` and
``Z ~ N(mu_z, sigma_z**2)`` (dB). Conditioned on the shadowing term the gain
is exponential, so every expectation over ``g`` reduces to a Gauss-Hermite
sum over the shadowing, with effective exponential mean ``gamma_at(a_n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import QuadratureRule

__all__ = [
    "FadingParams",
    "gamma_at",
    "cdf_approx",
    "mean_gain",
    "normalize",
    "sample_gain",
    "RAYLEIGH",
]

_LN10_OVER_10 = math.log(10.0) / 10.0


@dataclass(frozen=True)
class FadingParams:
    """Shadowing mean and standard deviation, both in dB."""

    mu_z: float = 0.0
    sigma_z: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu_z) and math.isfinite(self.sigma_z)):
            raise ValueError("fading parameters must be finite")
        if self.sigma_z < 0:
            raise ValueError(f"sigma_z must be non-negative, got {self.sigma_z}")


RAYLEIGH = FadingParams(0.0, 0.0)


def gamma_at(node, params: FadingParams):
    """Effective exponential mean ``10**((sqrt(2)*sigma_z*node + mu_z)/10)``.

    Accepts scalars or arrays of Hermite nodes.
    """
    exponent = (math.sqrt(2.0) * params.sigma_z * np.asarray(node, dtype=float) + params.mu_z) / 10.0
    out = np.power(10.0, exponent)
    return float(out) if out.ndim == 0 else out


def cdf_approx(g, params: FadingParams, hermite: QuadratureRule):
    """Gauss-Hermite approximation of ``P(gain <= g)``."""
    g_arr = np.asarray(g, dtype=float)
    if np.any(g_arr < 0) or np.any(np.isnan(g_arr)):
        raise ValueError("gain argument must be non-negative")
    gam = gamma_at(hermite.nodes, params)
    w = hermite.weights / math.sqrt(math.pi)
    terms = -np.expm1(-g_arr[..., None] / gam)
    out = np.clip(terms @ w, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def mean_gain(params: FadingParams) -> float:
    """Exact first moment of the composite gain."""
    s = params.sigma_z * _LN10_OVER_10
    return 10.0 ** (params.mu_z / 10.0) * math.exp(0.5 * s * s)


def normalize(sigma_z: float) -> FadingParams:
    """Fading parameters with unit mean gain for the given shadowing spread."""
    if sigma_z < 0:
        raise ValueError(f"sigma_z must be non-negative, got {sigma_z}")
    return FadingParams(mu_z=-sigma_z * sigma_z * math.log(10.0) / 20.0, sigma_z=float(sigma_z))


def sample_gain(params: FadingParams, rng: np.random.Generator, size=None):
    """Draw composite gains from ``rng``; a scalar when ``size`` is None."""
    h = rng.standard_exponential(size)
    if params.sigma_z == 0.0:
        return h * 10.0 ** (params.mu_z / 10.0)
    z = rng.normal(params.mu_z, params.sigma_z, size)
    return h * np.power(10.0, z / 10.0)
