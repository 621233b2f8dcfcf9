"""Gauss-Hermite and Gauss-Legendre rules.

Nodes are found by Newton iteration on the three-term recurrence of the
orthogonal polynomials, starting from asymptotic approximations. Only the
non-negative half is computed; the negative half is mirrored so the rules are
exactly symmetric.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "RuleKind",
    "QuadratureRule",
    "QuadratureError",
    "gauss_hermite",
    "gauss_legendre",
    "validate_rule",
    "DEFAULT_HERMITE_ORDER",
    "DEFAULT_LEGENDRE_ORDER",
]

DEFAULT_HERMITE_ORDER = 20
DEFAULT_LEGENDRE_ORDER = 40

_NEWTON_TOL = 1e-14
_NEWTON_MAXITER = 100


class QuadratureError(ValueError):
    """Raised for an unsupported rule order."""


class RuleKind(str, enum.Enum):
    HERMITE = "hermite"
    LEGENDRE = "legendre"


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Ordered node/weight pairs.

    Hermite rules integrate against ``exp(-x**2)`` on the real line, Legendre
    rules against 1 on ``[-1, 1]``.
    """

    kind: RuleKind
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        # freeze the arrays so a shared rule cannot be mutated by a caller
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, QuadratureRule):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.order == other.order
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def __hash__(self):
        return hash((self.kind, self.order, self.nodes.tobytes(), self.weights.tobytes()))

    def integrate(self, f) -> float:
        """Apply the rule to a vectorised callable."""
        return float(np.dot(self.weights, f(self.nodes)))


def _mirror(half_nodes, half_weights, order):
    """Assemble a symmetric rule from the non-negative nodes (descending)."""
    half_nodes = np.asarray(half_nodes, dtype=float)
    half_weights = np.asarray(half_weights, dtype=float)
    nodes = np.empty(order)
    weights = np.empty(order)
    m = (order + 1) // 2
    # half_nodes[k] is the k-th largest node
    nodes[order - m:] = half_nodes[::-1]
    weights[order - m:] = half_weights[::-1]
    nodes[: order // 2] = -half_nodes[: order // 2]
    weights[: order // 2] = half_weights[: order // 2]
    if order % 2:
        nodes[order // 2] = 0.0
    return nodes, weights


def _check_order(order, lo, hi, name):
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise QuadratureError(f"{name} order must be an integer, got {order!r}")
    if not lo <= order <= hi:
        raise QuadratureError(f"{name} order must lie in [{lo}, {hi}], got {order}")
    return int(order)


def _hermite_eval(x, n):
    """Orthonormal Hermite p_n(x) and its derivative, by recurrence."""
    p0 = math.pi ** -0.25
    p1 = 0.0
    for j in range(1, n + 1):
        p2 = p1
        p1 = p0
        p0 = x * math.sqrt(2.0 / j) * p1 - math.sqrt((j - 1.0) / j) * p2
    return p0, math.sqrt(2.0 * n) * p1


@lru_cache(maxsize=None)
def _hermite(order):
    n = order
    m = (n + 1) // 2
    xs, ws = [], []
    z = 0.0
    for i in range(m):
        # asymptotic guesses for the largest roots, then extrapolation
        if i == 0:
            z = math.sqrt(2 * n + 1) - 1.85575 * (2 * n + 1) ** (-1.0 / 6.0)
        elif i == 1:
            z -= 1.14 * n ** 0.426 / z
        elif i == 2:
            z = 1.86 * z - 0.86 * xs[0]
        elif i == 3:
            z = 1.91 * z - 0.91 * xs[1]
        else:
            z = 2.0 * z - xs[i - 2]
        for _ in range(_NEWTON_MAXITER):
            p, dp = _hermite_eval(z, n)
            dz = p / dp
            z -= dz
            if abs(dz) <= _NEWTON_TOL:
                break
        p, dp = _hermite_eval(z, n)
        xs.append(z)
        ws.append(2.0 / (dp * dp))
    return _mirror(xs, ws, n)


def _legendre_eval(x, n):
    p0, p1 = 1.0, 0.0
    for j in range(1, n + 1):
        p2 = p1
        p1 = p0
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j
    dp = n * (x * p0 - p1) / (x * x - 1.0)
    return p0, dp


@lru_cache(maxsize=None)
def _legendre(order):
    n = order
    m = (n + 1) // 2
    xs, ws = [], []
    for i in range(m):
        z = math.cos(math.pi * (i + 0.75) / (n + 0.5))
        for _ in range(_NEWTON_MAXITER):
            p, dp = _legendre_eval(z, n)
            dz = p / dp
            z -= dz
            if abs(dz) <= _NEWTON_TOL:
                break
        p, dp = _legendre_eval(z, n)
        xs.append(z)
        ws.append(2.0 / ((1.0 - z * z) * dp * dp))
    return _mirror(xs, ws, n)


def gauss_hermite(order: int = DEFAULT_HERMITE_ORDER) -> QuadratureRule:
    """Gauss-Hermite rule for weight ``exp(-x**2)``, ``2 <= order <= 64``."""
    order = _check_order(order, 2, 64, "Hermite")
    nodes, weights = _hermite(order)
    return QuadratureRule(RuleKind.HERMITE, order, nodes.copy(), weights.copy())


def gauss_legendre(order: int = DEFAULT_LEGENDRE_ORDER) -> QuadratureRule:
    """Gauss-Legendre rule on ``[-1, 1]``, ``2 <= order <= 128``."""
    order = _check_order(order, 2, 128, "Legendre")
    nodes, weights = _legendre(order)
    return QuadratureRule(RuleKind.LEGENDRE, order, nodes.copy(), weights.copy())


def validate_rule(rule: QuadratureRule) -> list[str]:
    """Return the list of violated rule invariants (empty when valid)."""
    problems = []
    nodes = np.asarray(rule.nodes, dtype=float)
    weights = np.asarray(rule.weights, dtype=float)
    if not (len(nodes) == len(weights) == rule.order):
        problems.append(
            f"length: nodes={len(nodes)}, weights={len(weights)}, order={rule.order}"
        )
        return problems
    if np.any(np.diff(nodes) <= 0):
        problems.append("ordering: nodes are not strictly increasing")
    elif np.max(np.abs(nodes + nodes[::-1])) > 1e-12:
        problems.append("symmetry: nodes are not symmetric about 0")
    if np.any(weights <= 0):
        problems.append("positivity: weights must be positive")
    else:
        target = math.sqrt(math.pi) if rule.kind == RuleKind.HERMITE else 2.0
        if abs(weights.sum() - target) > 1e-10:
            problems.append(f"normalisation: weights sum to {weights.sum()!r}, expected {target!r}")
    if rule.kind == RuleKind.LEGENDRE and np.any(np.abs(nodes) >= 1):
        problems.append("domain: Legendre nodes must lie in (-1, 1)")
    return problems
