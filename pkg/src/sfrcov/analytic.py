"""Closed-form coverage probabilities and their adaptive-integration oracle.

All expressions average the Rayleigh part of every link in closed form and
the lognormal part with Gauss-Hermite sums. For a serving-link node ``a_n``
and an interferer node ``a_n1`` the interference coefficient is::

    C = t_hat * gamma(a_n1) / gamma(a_n) * (phi_j P_j) / (phi_i P_i) * r**(alpha_i - alpha_j)

and the per-pair kernel is ``f_I = sum_n1 w_n1/sqrt(pi) * K(C)`` with
``K(C) = int_1^inf C / (C + u**(alpha_j/2)) du``.

The radial average uses Gauss-Legendre on ``r = (1 + x) / (1 - x)``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate

from .channel import gamma_at
from .model import (
    NetworkConfig,
    UnsupportedConfigurationError,
    association_probability,
    subband_densities,
)
from .quadrature import (
    DEFAULT_HERMITE_ORDER,
    DEFAULT_LEGENDRE_ORDER,
    QuadratureRule,
    gauss_hermite,
    gauss_legendre,
)

__all__ = [
    "Mode",
    "Rules",
    "CoverageQuery",
    "InterferenceKernelArgs",
    "NumericalError",
    "interference_kernel",
    "f_I",
    "conditional_ceu_coverage",
    "conditional_ccu_coverage",
    "conditional_user_coverage",
    "conditional_coverage",
    "average_coverage",
    "average_coverage_nonoise",
    "oracle_kernel",
    "oracle_f_I",
    "oracle_conditional_coverage",
    "oracle_average_coverage",
]

log = logging.getLogger(__name__)

_SQRT_PI = math.sqrt(math.pi)
# raw probabilities outside [-_RANGE_TOL, 1 + _RANGE_TOL] are a numerical failure
_RANGE_TOL = 1e-9


class NumericalError(ArithmeticError):
    """A coverage expression evaluated to a non-finite or out-of-range value."""


class Mode(str, enum.Enum):
    CEU = "CEU"
    CCU = "CCU"
    USER = "RandomUser"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, Mode):
            return value
        for m in cls:
            if str(value).lower() in (m.value.lower(), m.name.lower()):
                return m
        raise ValueError(f"unknown mode {value!r}")


@dataclass(frozen=True)
class Rules:
    """The Hermite and Legendre rules used by every closed form."""

    hermite: QuadratureRule = field(default_factory=lambda: gauss_hermite(DEFAULT_HERMITE_ORDER))
    legendre: QuadratureRule = field(default_factory=lambda: gauss_legendre(DEFAULT_LEGENDRE_ORDER))

    @classmethod
    def of_order(cls, hermite_order=DEFAULT_HERMITE_ORDER, legendre_order=DEFAULT_LEGENDRE_ORDER):
        return cls(gauss_hermite(hermite_order), gauss_legendre(legendre_order))


@dataclass(frozen=True)
class CoverageQuery:
    """What to evaluate: user class, tier (``None`` for all) and an optional
    linear coverage threshold overriding every tier's ``t_cover``."""

    mode: Mode = Mode.CEU
    tier: Optional[int] = None
    t_cover_override: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))


@dataclass(frozen=True)
class InterferenceKernelArgs:
    t_hat: float
    phi_serving: float
    phi_interferer: float
    i: int
    j: int
    r: float = 1.0


def _clamp(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise NumericalError(f"{what} evaluated to {value}")
    if value < -_RANGE_TOL or value > 1.0 + _RANGE_TOL:
        raise NumericalError(f"{what} = {value!r} lies outside [0, 1]")
    if value < 0.0 or value > 1.0:
        log.debug("%s clamped from %r", what, value)
        return min(max(value, 0.0), 1.0)
    return value


# ---------------------------------------------------------------------------
# interference kernel
# ---------------------------------------------------------------------------


def interference_kernel(c, alpha: float, legendre: QuadratureRule):
    """Gauss-Legendre evaluation of ``int_1^inf c / (c + u**(alpha/2)) du``.

    For ``c > 1`` this is the closed-form integral over ``[0, inf)`` minus a
    Legendre sum over ``[0, 1]``. For ``c <= 1`` that difference cancels
    catastrophically, so the tail is integrated directly after the change of
    variables ``u = t**(-1/(b-1))`` (``b = alpha/2``), which turns it into
    ``c/(b-1) * int_0^1 dt / (1 + c t**(b/(b-1)))``.
    """
    if not alpha > 2:
        raise ValueError(f"interference integral diverges for alpha={alpha} <= 2")
    c = np.asarray(c, dtype=float)
    b = alpha / 2.0
    x = legendre.nodes
    half_w = legendre.weights / 2.0
    u = (x + 1.0) / 2.0
    cc = c[..., None]

    closed = 2.0 * math.pi * np.power(c, 2.0 / alpha) / (alpha * math.sin(math.pi * (alpha - 2.0) / alpha))
    head = (cc / (cc + u ** b)) @ half_w
    large = closed - head

    p = b / (b - 1.0)
    small = (cc / ((b - 1.0) * (1.0 + cc * u ** p))) @ half_w

    out = np.where(c > 1.0, large, small)
    out = np.where(c > 0.0, out, 0.0)
    return float(out) if out.ndim == 0 else out


def _coefficient(t_hat, gamma_serving, gamma_interf, config, i, j, phi_s, phi_j, r):
    ti, tj = config.tiers[i], config.tiers[j]
    scale = t_hat * (phi_j * tj.power) / (phi_s * ti.power)
    if ti.alpha != tj.alpha:
        scale *= r ** (ti.alpha - tj.alpha)
    return scale * np.multiply.outer(1.0 / np.asarray(gamma_serving), gamma_interf)


def f_I(args: InterferenceKernelArgs, config: NetworkConfig, rules: Rules, gamma_an: float) -> float:
    """Hermite-averaged interference kernel for one (serving, interferer) pair."""
    tj = config.tiers[args.j]
    gam = gamma_at(rules.hermite.nodes, config.fading)
    c = _coefficient(args.t_hat, gamma_an, gam, config, args.i, args.j,
                     args.phi_serving, args.phi_interferer, args.r)
    k = interference_kernel(c, tj.alpha, rules.legendre)
    return float(k @ (rules.hermite.weights / _SQRT_PI))


def _exponent_terms(t_hat, phi_s, i, r, config: NetworkConfig, rules: Rules, kernel=None):
    """``sum_j eps_j (lam_c f_I(.,phi_s,1) + lam_e f_I(.,phi_s,phi_j))`` per serving node."""
    if kernel is None:
        kernel = lambda c, alpha: interference_kernel(c, alpha, rules.legendre)
    gam = gamma_at(rules.hermite.nodes, config.fading)
    w = rules.hermite.weights / _SQRT_PI
    total = np.zeros(len(gam))
    if t_hat == 0:
        return total
    for j, tj in enumerate(config.tiers):
        sub = subband_densities(tj)
        for dens, phi_j in ((sub.center, 1.0), (sub.edge, tj.phi)):
            if dens == 0:
                continue
            c = _coefficient(t_hat, gam, gam, config, i, j, phi_s, phi_j, r)
            total += tj.epsilon * dens * (kernel(c, tj.alpha) @ w)
    return total


def _conditional_raw(r, i, t_hat, phi_s, config: NetworkConfig, rules: Rules, kernel=None):
    if not r > 0:
        raise ValueError(f"serving distance must be positive, got {r}")
    ti = config.tiers[i]
    gam = gamma_at(rules.hermite.nodes, config.fading)
    w = rules.hermite.weights / _SQRT_PI
    snr = config.snr(i)
    log_noise = np.zeros(len(gam)) if math.isinf(snr) else -t_hat * r ** ti.alpha / (gam * phi_s * snr)
    expo = _exponent_terms(t_hat, phi_s, i, r, config, rules, kernel)
    return float(w @ np.exp(log_noise - math.pi * r * r * expo))


def conditional_ceu_coverage(r: float, i: int, config: NetworkConfig, rules: Rules = None,
                             t_hat: Optional[float] = None) -> float:
    """Coverage of a cell-edge user at serving distance ``r`` from a tier-``i`` BS."""
    rules = rules or Rules()
    t_hat = config.tiers[i].t_cover if t_hat is None else t_hat
    raw = _conditional_raw(r, i, t_hat, config.tiers[i].phi, config, rules)
    return _clamp(raw, "CEU conditional coverage")


def conditional_ccu_coverage(r: float, i: int, config: NetworkConfig, rules: Rules = None,
                             t_hat: Optional[float] = None) -> float:
    """Coverage of a cell-center user: the serving BS transmits at ``P_i``."""
    rules = rules or Rules()
    t_hat = config.tiers[i].t_cover if t_hat is None else t_hat
    raw = _conditional_raw(r, i, t_hat, 1.0, config, rules)
    return _clamp(raw, "CCU conditional coverage")


def _mix(p_cc_cover, p_cc_class, p_ce_cover):
    return p_cc_cover * p_cc_class + p_ce_cover * (1.0 - p_cc_class)


def conditional_user_coverage(r: float, i: int, config: NetworkConfig, rules: Rules = None,
                              t_hat: Optional[float] = None) -> float:
    """Random-user coverage: classified as CCU with probability ``P_c(T | r)``.

    The classification and service SINRs are treated as independent draws.
    """
    rules = rules or Rules()
    ti = config.tiers[i]
    t_hat = ti.t_cover if t_hat is None else t_hat
    p_class = conditional_ccu_coverage(r, i, config, rules, ti.t_classify)
    raw = _mix(conditional_ccu_coverage(r, i, config, rules, t_hat), p_class,
               conditional_ceu_coverage(r, i, config, rules, t_hat))
    return _clamp(raw, "random-user conditional coverage")


_CONDITIONALS = {
    Mode.CEU: conditional_ceu_coverage,
    Mode.CCU: conditional_ccu_coverage,
    Mode.USER: conditional_user_coverage,
}


def conditional_coverage(mode, r, i, config, rules=None, t_hat=None) -> float:
    return _CONDITIONALS[Mode.parse(mode)](r, i, config, rules, t_hat)


def _tiers_of(query: CoverageQuery, config: NetworkConfig):
    if query.tier is None:
        return range(config.k)
    if not 0 <= query.tier < config.k:
        raise IndexError(f"tier {query.tier} out of range for K={config.k}")
    return (query.tier,)


def _require_equal_alpha(config):
    if not config.equal_alpha:
        raise UnsupportedConfigurationError("analytic averages need equal path-loss exponents")


def average_coverage(query: CoverageQuery, config: NetworkConfig, rules: Rules = None) -> float:
    """Coverage averaged over the serving distance (and over tiers when
    ``query.tier`` is None); a single-tier query is conditioned on association."""
    rules = rules or Rules()
    _require_equal_alpha(config)
    cond = _CONDITIONALS[query.mode]
    x, c = rules.legendre.nodes, rules.legendre.weights
    r_nodes = (x + 1.0) / (1.0 - x)
    jac = 4.0 * math.pi * c * (x + 1.0) / (1.0 - x) ** 3
    lam = config.densities
    void = np.exp(-math.pi * lam.sum() * r_nodes ** 2)
    total = 0.0
    for i in _tiers_of(query, config):
        t_hat = config.tiers[i].t_cover if query.t_cover_override is None else query.t_cover_override
        vals = np.array([cond(rm, i, config, rules, t_hat) if v > 0 else 0.0
                         for rm, v in zip(r_nodes, void)])
        total += lam[i] * float(np.sum(jac * void * vals))
    if query.tier is not None:
        total /= association_probability(query.tier, config)
    return _clamp(total, f"average {query.mode.value} coverage")


def average_coverage_nonoise(query: CoverageQuery, config: NetworkConfig, rules: Rules = None) -> float:
    """Interference-limited closed form (no radial quadrature).

    With zero noise and equal exponents the conditional coverage is
    ``sum_n w_n exp(-pi r^2 S_n)``, and the radial average of each term is
    ``lam_i / (sum_j lam_j + S_n)``. CEU and CCU modes are supported for any
    reuse factor; the random user only for reuse 1 with unit power ratio.
    """
    rules = rules or Rules()
    _require_equal_alpha(config)
    if config.noise_power > 0:
        raise UnsupportedConfigurationError("closed form requires an interference-limited network")
    if query.mode is Mode.USER and any(t.delta != 1 or t.phi != 1 for t in config.tiers):
        raise UnsupportedConfigurationError(
            "random-user closed form exists only for delta = 1 and phi = 1 in every tier"
        )
    w = rules.hermite.weights / _SQRT_PI
    lam = config.densities
    lam_total = lam.sum()
    total = 0.0
    for i in _tiers_of(query, config):
        ti = config.tiers[i]
        t_hat = ti.t_cover if query.t_cover_override is None else query.t_cover_override
        phi_s = ti.phi if query.mode is Mode.CEU else 1.0
        s = _exponent_terms(t_hat, phi_s, i, 1.0, config, rules)
        total += float(w @ (lam[i] / (lam_total + s)))
    if query.tier is not None:
        total /= association_probability(query.tier, config)
    return _clamp(total, f"interference-limited {query.mode.value} coverage")


# ---------------------------------------------------------------------------
# adaptive-integration oracle
# ---------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def oracle_kernel(c: float, alpha: float) -> float:
    """``int_1^inf c / (c + u**(alpha/2)) du`` by adaptive quadrature alone.

    Split at the knee ``u0 = max(1, c**(2/alpha))``; the tail is mapped to
    ``[0, 1]`` with ``u = u0 / t``.
    """
    if not alpha > 2:
        raise ValueError(f"interference integral diverges for alpha={alpha} <= 2")
    if c <= 0:
        return 0.0
    b = alpha / 2.0
    u0 = max(1.0, c ** (1.0 / b))
    head = 0.0
    if u0 > 1.0:
        head = integrate.quad(lambda u: c / (c + u ** b), 1.0, u0,
                              epsabs=0.0, epsrel=1e-11, limit=500)[0]
    u0b = u0 ** b
    tail = integrate.quad(lambda t: c * u0 * t ** (b - 2.0) / (c * t ** b + u0b), 0.0, 1.0,
                          epsabs=0.0, epsrel=1e-11, limit=500)[0]
    return head + tail


def _oracle_kernel_array(c, alpha):
    c = np.asarray(c, dtype=float)
    return np.vectorize(lambda v: oracle_kernel(float(v), float(alpha)))(c)


def oracle_f_I(args: InterferenceKernelArgs, config: NetworkConfig, hermite: QuadratureRule,
               gamma_an: float) -> float:
    """``f_I`` with the inner integral done adaptively (no Legendre rule)."""
    gam = gamma_at(hermite.nodes, config.fading)
    c = _coefficient(args.t_hat, gamma_an, gam, config, args.i, args.j,
                     args.phi_serving, args.phi_interferer, args.r)
    return float(_oracle_kernel_array(c, config.tiers[args.j].alpha) @ (hermite.weights / _SQRT_PI))


def oracle_conditional_coverage(r: float, i: int, config: NetworkConfig, mode=Mode.CEU,
                                hermite: Optional[QuadratureRule] = None,
                                t_hat: Optional[float] = None) -> float:
    """Conditional coverage with every interference integral done adaptively.

    The Hermite sums over the shadowing are kept; no Legendre rule and no
    closed-form integral is used.
    """
    mode = Mode.parse(mode)
    rules = Rules(hermite or gauss_hermite(DEFAULT_HERMITE_ORDER), gauss_legendre(2))
    ti = config.tiers[i]
    t_hat = ti.t_cover if t_hat is None else t_hat

    def cond(th, phi_s):
        return _conditional_raw(r, i, th, phi_s, config, rules, kernel=_oracle_kernel_array)

    if mode is Mode.CEU:
        return cond(t_hat, ti.phi)
    if mode is Mode.CCU:
        return cond(t_hat, 1.0)
    return _mix(cond(t_hat, 1.0), cond(ti.t_classify, 1.0), cond(t_hat, ti.phi))


def oracle_average_coverage(query: CoverageQuery, config: NetworkConfig,
                            hermite: Optional[QuadratureRule] = None) -> float:
    """Radial average by adaptive integration of the distance PDF times the
    oracle conditional coverage."""
    _require_equal_alpha(config)
    lam = config.densities
    total = 0.0
    for i in _tiers_of(query, config):
        t_hat = config.tiers[i].t_cover if query.t_cover_override is None else query.t_cover_override

        def integrand(r):
            if r == 0:
                return 0.0
            return (2.0 * math.pi * lam[i] * r * math.exp(-math.pi * lam.sum() * r * r)
                    * oracle_conditional_coverage(r, i, config, query.mode, hermite, t_hat))

        total += integrate.quad(integrand, 0.0, np.inf, epsabs=1e-10, epsrel=1e-9, limit=200)[0]
    if query.tier is not None:
        total /= association_probability(query.tier, config)
    return total
