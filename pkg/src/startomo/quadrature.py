"""Quadrature rules on intervals and on d-spheres.

Sphere rules are product rules in hyperspherical coordinates: the last
angular factor is a uniform rule on the circle, each polar angle theta
carries the measure sin^m(theta) d(theta) and is handled, after the
substitution x = cos(theta), by a Gauss-Jacobi rule with weight
(1 - x^2)^((m-1)/2).  The Jacobi rules make the total weight equal to the
surface measure s_d to machine precision for every level, which a plain
Gauss-Legendre rule times an explicit sqrt factor would not achieve.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .geom import OrthoBasis, sphere_area

MAX_SPHERE_DIM = 7
DEFAULT_LEVEL = 32


@dataclass(frozen=True)
class Quadrature1D:
    """Nodes and weights on an interval, exact for polynomials up to ``degree``."""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int


def gauss_rule(m: int, a: float, b: float) -> Quadrature1D:
    """Gauss-Legendre rule with ``m`` nodes on [a, b].

    Exact for polynomials of degree up to 2m - 1.
    """
    if m < 1:
        raise ValueError(f"node count must be >= 1, got {m}")
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    x, w = roots_legendre(int(m))
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return Quadrature1D(nodes=mid + half * x, weights=half * w, degree=2 * m - 1)


@dataclass(frozen=True)
class SphereRule:
    """Quadrature nodes (unit vectors) and positive weights on a d-sphere.

    ``nodes`` has shape (N, k) with k = d + 1 for an intrinsic rule, or
    k = n for a rule embedded into a subsphere of S^(n-1).  The weights
    sum to the surface measure s_d.
    """

    d: int
    nodes: np.ndarray
    weights: np.ndarray
    level: int

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, f) -> float:
        """Integrate a vectorized function of the node coordinates."""
        return float(np.dot(self.weights, np.asarray(f(self.nodes), dtype=float)))


@lru_cache(maxsize=128)
def sphere_rule(d: int, level: int = DEFAULT_LEVEL) -> SphereRule:
    """Product quadrature rule on S^d with 2 * level^d nodes.

    Rules are cached; treat the node and weight arrays as read-only.

    Parameters
    ----------
    d : int
        Sphere dimension, 1 <= d <= 7.
    level : int
        Refinement knob: 2*level nodes on the circle factor and level
        Gauss-Jacobi nodes on each polar angle.
    """
    if not 1 <= d <= MAX_SPHERE_DIM:
        raise ValueError(f"sphere dimension must be in [1, {MAX_SPHERE_DIM}], got {d}")
    level = int(level)
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")

    phi = 2.0 * np.pi * np.arange(2 * level) / (2 * level)
    nodes = np.column_stack([np.cos(phi), np.sin(phi)])
    weights = np.full(2 * level, np.pi / level)

    # polar factors, innermost (m = 1) to outermost (m = d - 1)
    for m in range(1, d):
        x, w = roots_jacobi(level, (m - 1) / 2.0, (m - 1) / 2.0)
        sin_t = np.sqrt(np.maximum(1.0 - x * x, 0.0))
        new_nodes = np.empty((level * nodes.shape[0], nodes.shape[1] + 1))
        new_nodes[:, 0] = np.repeat(x, nodes.shape[0])
        new_nodes[:, 1:] = np.repeat(sin_t, nodes.shape[0])[:, None] * np.tile(
            nodes, (level, 1)
        )
        nodes = new_nodes
        weights = np.repeat(w, weights.shape[0]) * np.tile(weights, level)

    return SphereRule(d=d, nodes=nodes, weights=weights, level=level)


def embed_rule(rule: SphereRule, frame: OrthoBasis) -> SphereRule:
    """Map a rule on S^(n-2) onto the great subsphere orthogonal to the frame normal.

    Nodes are expressed in the ambient space through ``frame.basis``; the
    weights are unchanged.
    """
    n = frame.dim
    if rule.nodes.shape[1] != n - 1:
        raise ValueError(
            f"rule nodes live in R^{rule.nodes.shape[1]}, frame complement is R^{n - 1}"
        )
    return SphereRule(
        d=rule.d,
        nodes=rule.nodes @ frame.basis,
        weights=rule.weights,
        level=rule.level,
    )


def total_weight_check(rule: SphereRule, tol: float = 1e-10) -> float:
    """Return the defect |sum(weights) - s_d|, useful in validation."""
    return abs(float(rule.weights.sum()) - sphere_area(rule.d))
