"""Network configuration for a K-tier soft frequency reuse PPP network.

Tier indices are zero-based throughout the API.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .channel import FadingParams, RAYLEIGH

__all__ = [
    "ConfigError",
    "UnsupportedConfigurationError",
    "TierConfig",
    "NetworkConfig",
    "SubbandDensities",
    "subband_densities",
    "association_probability",
    "nearest_distance_pdf",
    "validate",
    "db_to_linear",
    "linear_to_db",
    "table1",
]


class ConfigError(ValueError):
    """Invalid configuration values."""


class UnsupportedConfigurationError(ConfigError):
    """A valid configuration that the analytic expressions do not cover."""


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class TierConfig:
    """Physical and frequency-reuse parameters of one tier.

    ``density`` is the BS density, ``power`` the linear transmit power on a
    cell-center RB, ``phi`` the edge/center power ratio, ``epsilon`` the mean
    RB occupancy, ``t_classify`` and ``t_cover`` linear SINR thresholds.
    """

    density: float
    power: float
    alpha: float
    delta: int = 1
    phi: float = 1.0
    epsilon: float = 1.0
    t_classify: float = 1.0
    t_cover: float = 1.0

    @classmethod
    def from_counts(cls, *, users_center, rbs_center, users_edge, rbs_edge, **kwargs):
        """Build a tier from Round-Robin user/RB counts of both groups.

        The center and edge occupancy ratios must be equal; their common value
        becomes ``epsilon``.
        """
        if min(rbs_center, rbs_edge) <= 0:
            raise ConfigError("RB group sizes must be positive")
        eps_c = users_center / rbs_center
        eps_e = users_edge / rbs_edge
        if abs(eps_c - eps_e) > 1e-9:
            raise ConfigError(
                f"center occupancy {eps_c:g} and edge occupancy {eps_e:g} must be equal"
            )
        return cls(epsilon=eps_c, **kwargs)

    def violations(self) -> list[str]:
        out = []
        if not (self.density > 0 and math.isfinite(self.density)):
            out.append(f"density: must be positive and finite, got {self.density}")
        if not (self.power > 0 and math.isfinite(self.power)):
            out.append(f"power: must be positive and finite, got {self.power}")
        if not self.alpha > 2:
            out.append(f"alpha: must exceed 2 for the interference to converge, got {self.alpha}")
        if isinstance(self.delta, bool) or int(self.delta) != self.delta or self.delta < 1:
            out.append(f"delta: must be an integer >= 1, got {self.delta}")
        if not self.phi >= 1:
            out.append(f"phi: must be >= 1, got {self.phi}")
        if not 0 < self.epsilon <= 1:
            out.append(f"epsilon: occupancy must lie in (0, 1], got {self.epsilon}")
        if not self.t_classify > 0:
            out.append(f"t_classify: must be positive, got {self.t_classify}")
        if not self.t_cover > 0:
            out.append(f"t_cover: must be positive, got {self.t_cover}")
        return out


@dataclass(frozen=True)
class NetworkConfig:
    """K tiers, noise and fading.

    ``snr_ref_db`` is ``P_1 / sigma^2`` in dB for tier 0; ``None`` (or +inf)
    means an interference-limited network with zero noise.
    """

    tiers: tuple[TierConfig, ...]
    snr_ref_db: Optional[float] = None
    fading: FadingParams = field(default=RAYLEIGH)

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))

    @property
    def k(self) -> int:
        return len(self.tiers)

    @property
    def noise_power(self) -> float:
        if self.snr_ref_db is None or self.snr_ref_db == math.inf:
            return 0.0
        return self.tiers[0].power / db_to_linear(self.snr_ref_db)

    def snr(self, i: int) -> float:
        """Linear ``P_i / sigma^2`` (inf when noiseless)."""
        n = self.noise_power
        return math.inf if n == 0 else self.tiers[i].power / n

    @property
    def densities(self) -> np.ndarray:
        return np.array([t.density for t in self.tiers])

    @property
    def equal_alpha(self) -> bool:
        return len({t.alpha for t in self.tiers}) <= 1

    def with_tiers(self, **changes) -> "NetworkConfig":
        """Copy with the given field values applied to every tier.

        A sequence value is applied element-wise, one entry per tier.
        """
        tiers = []
        for idx, t in enumerate(self.tiers):
            kw = {}
            for name, value in changes.items():
                if isinstance(value, (list, tuple, np.ndarray)):
                    if len(value) != self.k:
                        raise ConfigError(f"{name}: expected {self.k} values, got {len(value)}")
                    kw[name] = value[idx]
                else:
                    kw[name] = value
            tiers.append(replace(t, **kw))
        return replace(self, tiers=tuple(tiers))


@dataclass(frozen=True)
class SubbandDensities:
    center: float
    edge: float


def subband_densities(tier: TierConfig) -> SubbandDensities:
    """Densities of cells using the tagged RB as a center and as an edge RB."""
    edge = tier.density / tier.delta
    return SubbandDensities(center=tier.density - edge, edge=edge)


def _require_equal_alpha(config: NetworkConfig):
    if not config.equal_alpha:
        raise UnsupportedConfigurationError(
            "analytic association and distance laws need equal path-loss exponents across tiers"
        )


def association_probability(i: int, config: NetworkConfig) -> float:
    """Probability that the typical user's nearest BS belongs to tier ``i``."""
    _require_equal_alpha(config)
    lam = config.densities
    return float(lam[i] / lam.sum())


def nearest_distance_pdf(r, i: int, config: NetworkConfig):
    """PDF of the serving distance given association with tier ``i``."""
    _require_equal_alpha(config)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("distance must be non-negative")
    lam = config.densities
    total = lam.sum()
    p_a = lam[i] / total
    out = 2.0 * math.pi * lam[i] / p_a * r * np.exp(-math.pi * total * r * r)
    return float(out) if out.ndim == 0 else out


def validate(config: NetworkConfig, analytic: bool = True) -> list[str]:
    """List every violated invariant; empty when the config is usable.

    With ``analytic`` set, unequal path-loss exponents are also reported.
    """
    out = []
    if config.k < 1:
        out.append("tiers: at least one tier is required")
    for idx, tier in enumerate(config.tiers):
        out.extend(f"tiers[{idx}].{v}" for v in tier.violations())
    if config.snr_ref_db is not None and math.isnan(config.snr_ref_db):
        out.append("noise.snr_ref_db: must be a number")
    elif config.snr_ref_db == -math.inf:
        out.append("noise.snr_ref_db: -inf gives infinite noise")
    if analytic and config.k and not config.equal_alpha:
        out.append("tiers[].alpha: analytic evaluation requires equal alpha across tiers")
    return out


def table1(
    delta: Sequence[int] | int = 3,
    phi: Sequence[float] | float = 4.0,
    epsilon: Sequence[float] = (0.1, 0.2),
    t_cover_db: float = 0.0,
    t_classify_db: float = 0.0,
    snr_ref_db: Optional[float] = None,
) -> NetworkConfig:
    """Two-tier reference network: densities 0.25 and 0.5, power ratio 100,
    path-loss exponent 3.5, shadowing mu_z = -7.3683 dB and sigma_z = 8 dB.

    The reuse parameters, thresholds and noise are free arguments.
    """
    base = (
        TierConfig(density=0.25, power=100.0, alpha=3.5),
        TierConfig(density=0.5, power=1.0, alpha=3.5),
    )
    cfg = NetworkConfig(base, snr_ref_db=snr_ref_db, fading=FadingParams(-7.3683, 8.0))
    return cfg.with_tiers(
        delta=delta,
        phi=phi,
        epsilon=tuple(epsilon),
        t_cover=db_to_linear(t_cover_db),
        t_classify=db_to_linear(t_classify_db),
    )
