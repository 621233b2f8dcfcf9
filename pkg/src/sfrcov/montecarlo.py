"""Monte Carlo estimation of coverage on a truncated PPP layout.

Every trial owns independent counter-based random streams keyed by
``(master_seed, purpose)`` with the trial index in the Philox counter, so an
estimate depends only on the seed and the trial count, never on how the trials
are split over workers.

The user sits at the origin and is served by the nearest BS over all tiers.
For the tagged RB each other BS independently takes the edge role with
probability ``1/delta`` and occupies the RB with probability ``epsilon``;
occupied BSs interfere with power ``P`` (center role) or ``phi * P`` (edge
role). The serving BS always transmits on the tagged RB.
"""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .analytic import Mode
from .channel import mean_gain, sample_gain
from .model import NetworkConfig

__all__ = [
    "SimParams",
    "BsRealization",
    "CoverageEstimate",
    "TrialOutcome",
    "default_region_radius",
    "trial_generator",
    "sample_ppp",
    "sample_layout",
    "realize_rb",
    "realize",
    "far_field_interference",
    "simulate_trial_ceu",
    "simulate_trial_ccu",
    "simulate_trial_user",
    "simulate_trials",
    "estimate",
    "estimate_sweep",
    "estimates_from_trials",
]

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1

# stream purposes; layouts are shared by all per-RB draws of a trial
LAYOUT = 1
CLASSIFY = 2
SERVE_CCU = 3
SERVE_CEU = 4


@dataclass(frozen=True)
class SimParams:
    trials: int = 10_000
    region_radius: Optional[float] = None
    master_seed: int = 0
    workers: int = 1
    far_field: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.region_radius is not None and not self.region_radius > 0:
            raise ValueError("region_radius must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def radius_for(self, config: NetworkConfig) -> float:
        if self.region_radius is not None:
            return float(self.region_radius)
        return default_region_radius(config)


@dataclass(frozen=True)
class BsRealization:
    """Per-BS state for one trial, for the tagged RB.

    ``edge_role`` and ``occupied`` are meaningless for the serving BS, which
    always transmits on the tagged RB.
    """

    tier: np.ndarray
    position: np.ndarray
    edge_role: np.ndarray
    occupied: np.ndarray
    gain: np.ndarray

    @property
    def distance(self) -> np.ndarray:
        return np.hypot(self.position[:, 0], self.position[:, 1])


@dataclass(frozen=True)
class CoverageEstimate:
    p_hat: float
    std_error: float
    trials: int
    mode: Mode
    seed: int
    covered: int = 0

    @classmethod
    def from_count(cls, covered: int, trials: int, mode: Mode, seed: int) -> "CoverageEstimate":
        p = covered / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, Mode.parse(mode), seed, covered)


@dataclass(frozen=True)
class TrialOutcome:
    """SINRs of one trial. ``sinr_classify`` is the first-stage center-power
    SINR used to classify a random user; the service SINRs are fresh draws."""

    tier: int
    sinr_classify: float
    sinr_ccu: float
    sinr_ceu: float


def default_region_radius(config: NetworkConfig) -> float:
    """Disk radius holding >= 500 BSs of the sparsest tier on average and at
    least 20 mean serving distances."""
    lam = config.densities
    mean_serving = 1.0 / (2.0 * math.sqrt(lam.sum()))
    return max(math.sqrt(500.0 / (math.pi * lam.min())), 20.0 * mean_serving)


def trial_generator(master_seed: int, trial_index: int, purpose: int) -> np.random.Generator:
    """Independent Philox stream for ``(master_seed, trial_index, purpose)``."""
    key = (int(purpose) << 64) | (int(master_seed) & _MASK64)
    counter = int(trial_index) << 128
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def sample_ppp(lam: float, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP of density ``lam`` on the disk of ``radius``, shape (n, 2)."""
    if lam < 0 or not radius > 0:
        raise ValueError("need lam >= 0 and radius > 0")
    n = rng.poisson(lam * math.pi * radius * radius) if lam > 0 else 0
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_layout(config: NetworkConfig, radius: float, rng: np.random.Generator):
    """Tier index and distance to the origin of every BS, resampled until at
    least one BS exists.

    Only distances matter for the SINR at the origin, so angles are not drawn.
    """
    while True:
        counts = [rng.poisson(t.density * math.pi * radius * radius) for t in config.tiers]
        if sum(counts):
            break
    tier = np.repeat(np.arange(config.k), counts)
    return tier, radius * np.sqrt(rng.random(len(tier)))


def _split_uniform(u, eps, inv_delta):
    """Independent occupancy ~ Bernoulli(eps) and edge role ~ Bernoulli(1/delta)
    from a single uniform: the rescaled position of ``u`` within its occupancy
    interval is again uniform."""
    occupied = u < eps
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(occupied, u / eps, (u - eps) / (1.0 - eps))
    return occupied, rel < inv_delta


def realize_rb(config: NetworkConfig, tier: np.ndarray, rng: np.random.Generator):
    """Edge roles, occupancy and composite gains for every BS."""
    eps = np.array([t.epsilon for t in config.tiers])[tier]
    inv_delta = np.array([1.0 / t.delta for t in config.tiers])[tier]
    occupied, edge = _split_uniform(rng.random(len(tier)), eps, inv_delta)
    gain = sample_gain(config.fading, rng, len(tier))
    return edge, occupied, gain


def realize(config: NetworkConfig, radius: float, layout_rng: np.random.Generator,
            rb_rng: np.random.Generator) -> BsRealization:
    """Full per-BS realization with planar positions."""
    pts = []
    while not pts or not sum(len(p) for p in pts):
        pts = [sample_ppp(t.density, radius, layout_rng) for t in config.tiers]
    tier = np.concatenate([np.full(len(p), j, dtype=np.int64) for j, p in enumerate(pts)])
    edge, occupied, gain = realize_rb(config, tier, rb_rng)
    return BsRealization(tier, np.concatenate(pts), edge, occupied, gain)


def far_field_interference(config: NetworkConfig, radius: float) -> float:
    """Mean interference from BSs beyond ``radius``.

    ``sum_j eps_j lam_j P_j E[boost_j] E[g] 2 pi R**(2-alpha_j) / (alpha_j - 2)``
    """
    total = 0.0
    g = mean_gain(config.fading)
    for t in config.tiers:
        boost = (t.delta - 1) / t.delta + t.phi / t.delta
        total += (t.epsilon * t.density * t.power * boost * g
                  * 2.0 * math.pi * radius ** (2.0 - t.alpha) / (t.alpha - 2.0))
    return total


class _Geometry:
    """One layout, shared by the per-RB draws of a trial."""

    def __init__(self, config: NetworkConfig, tier, dist, floor: float):
        self.config = config
        serving = int(np.argmin(dist))
        self.serving_tier = int(tier[serving])
        ts = config.tiers[self.serving_tier]
        self.serving_path = ts.power * dist[serving] ** (-ts.alpha)
        keep = np.ones(len(tier), dtype=bool)
        keep[serving] = False
        self.tier = tier[keep]
        self.dist = dist[keep]
        self.eps = np.array([t.epsilon for t in config.tiers])[self.tier]
        self.inv_delta = np.array([1.0 / t.delta for t in config.tiers])[self.tier]
        self.alpha = np.array([t.alpha for t in config.tiers])
        self.power = np.array([t.power for t in config.tiers])
        self.phi = np.array([t.phi for t in config.tiers])
        self.floor = floor + config.noise_power

    def sinr(self, rng: np.random.Generator, serving_phi: float) -> float:
        g_serve = sample_gain(self.config.fading, rng)
        u = rng.random(len(self.tier))
        occupied, edge = _split_uniform(u, self.eps, self.inv_delta)
        idx = np.flatnonzero(occupied)
        tj = self.tier[idx]
        boost = np.where(edge[idx], self.phi[tj], 1.0)
        gain = sample_gain(self.config.fading, rng, len(idx))
        interference = float(np.sum(self.power[tj] * boost * gain * self.dist[idx] ** (-self.alpha[tj])))
        signal = serving_phi * self.serving_path * g_serve
        denom = interference + self.floor
        # zero interference and zero noise: covered at any threshold
        return math.inf if denom == 0.0 else signal / denom


def _geometry(config, params: SimParams, trial_index: int) -> _Geometry:
    rng = trial_generator(params.master_seed, trial_index, LAYOUT)
    radius = params.radius_for(config)
    tier, dist = sample_layout(config, radius, rng)
    floor = far_field_interference(config, radius) if params.far_field else 0.0
    return _Geometry(config, tier, dist, floor)


def _outcome(config, params, trial_index, modes) -> TrialOutcome:
    g = _geometry(config, params, trial_index)
    seed = params.master_seed
    phi_i = config.tiers[g.serving_tier].phi
    nan = math.nan
    s_class = g.sinr(trial_generator(seed, trial_index, CLASSIFY), 1.0) if Mode.USER in modes else nan
    s_ccu = (g.sinr(trial_generator(seed, trial_index, SERVE_CCU), 1.0)
             if (Mode.CCU in modes or Mode.USER in modes) else nan)
    s_ceu = (g.sinr(trial_generator(seed, trial_index, SERVE_CEU), phi_i)
             if (Mode.CEU in modes or Mode.USER in modes) else nan)
    return TrialOutcome(g.serving_tier, s_class, s_ccu, s_ceu)


def simulate_trial_ceu(config: NetworkConfig, params: SimParams, trial_index: int,
                       t_hat: Optional[float] = None) -> bool:
    """One cell-edge trial: is the boosted-power SINR above the threshold?"""
    out = _outcome(config, params, trial_index, (Mode.CEU,))
    th = config.tiers[out.tier].t_cover if t_hat is None else t_hat
    return bool(out.sinr_ceu >= th)


def simulate_trial_ccu(config: NetworkConfig, params: SimParams, trial_index: int,
                       t_hat: Optional[float] = None) -> bool:
    out = _outcome(config, params, trial_index, (Mode.CCU,))
    th = config.tiers[out.tier].t_cover if t_hat is None else t_hat
    return bool(out.sinr_ccu >= th)


def simulate_trial_user(config: NetworkConfig, params: SimParams, trial_index: int,
                        t_hat: Optional[float] = None) -> bool:
    """One random-user trial.

    A center-power SINR classifies the user; the service SINR is then a fresh
    draw over the same layout, at center power for a CCU and at boosted power
    for a CEU.
    """
    out = _outcome(config, params, trial_index, (Mode.USER,))
    return bool(_covered(config, out, Mode.USER, t_hat))


def _covered(config, out: TrialOutcome, mode: Mode, t_hat):
    tier = config.tiers[out.tier]
    th = tier.t_cover if t_hat is None else t_hat
    if mode is Mode.CEU:
        return out.sinr_ceu >= th
    if mode is Mode.CCU:
        return out.sinr_ccu >= th
    if out.sinr_classify >= tier.t_classify:
        return out.sinr_ccu >= th
    return out.sinr_ceu >= th


def _run_chunk(args):
    config, params, start, stop, modes = args
    rows = np.empty((stop - start, 4))
    for k, idx in enumerate(range(start, stop)):
        o = _outcome(config, params, idx, modes)
        rows[k] = (o.tier, o.sinr_classify, o.sinr_ccu, o.sinr_ceu)
    return rows


def simulate_trials(config: NetworkConfig, params: SimParams, modes: Sequence[Mode] = tuple(Mode)) -> np.ndarray:
    """Outcomes of all trials as rows ``(tier, sinr_classify, sinr_ccu, sinr_ceu)``.

    Chunks run in ``params.workers`` processes; rows are always in trial order.
    """
    modes = tuple(Mode.parse(m) for m in modes)
    lam = config.densities
    radius = params.radius_for(config)
    if np.min(lam) * math.pi * radius * radius < 50:
        warnings.warn(f"region radius {radius:g} holds fewer than 50 BSs of some tier on average")
    n = params.trials
    n_chunks = max(1, min(n, 4 * params.workers))
    bounds = np.linspace(0, n, n_chunks + 1).astype(int)
    jobs = [(config, params, int(a), int(b), modes) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if params.workers == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=params.workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    return np.concatenate(parts)


def _count(config, rows: np.ndarray, mode: Mode, t_hat) -> int:
    tier = rows[:, 0].astype(int)
    t_cover = np.array([t.t_cover for t in config.tiers])[tier] if t_hat is None else t_hat
    s_class, s_ccu, s_ceu = rows[:, 1], rows[:, 2], rows[:, 3]
    if mode is Mode.CEU:
        hit = s_ceu >= t_cover
    elif mode is Mode.CCU:
        hit = s_ccu >= t_cover
    else:
        t_class = np.array([t.t_classify for t in config.tiers])[tier]
        hit = np.where(s_class >= t_class, s_ccu >= t_cover, s_ceu >= t_cover)
    return int(np.count_nonzero(hit))


def estimates_from_trials(config: NetworkConfig, rows: np.ndarray, mode, t_covers: Sequence[Optional[float]],
                          seed: int) -> list[CoverageEstimate]:
    """Estimates at several thresholds from the output of :func:`simulate_trials`."""
    mode = Mode.parse(mode)
    return [CoverageEstimate.from_count(_count(config, rows, mode, th), len(rows), mode, seed)
            for th in t_covers]


def estimate_sweep(config: NetworkConfig, params: SimParams, mode,
                   t_covers: Sequence[Optional[float]]) -> list[CoverageEstimate]:
    """Estimates at several coverage thresholds from one shared set of trials."""
    mode = Mode.parse(mode)
    if params.trials < 100:
        raise ValueError("at least 100 trials are required")
    rows = simulate_trials(config, params, (mode,))
    return estimates_from_trials(config, rows, mode, t_covers, params.master_seed)


def estimate(config: NetworkConfig, params: SimParams, mode=Mode.CEU,
             t_cover: Optional[float] = None) -> CoverageEstimate:
    """Coverage estimate for one mode; ``t_cover`` overrides every tier's threshold."""
    return estimate_sweep(config, params, mode, [t_cover])[0]
