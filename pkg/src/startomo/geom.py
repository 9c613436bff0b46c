"""Directions, orthonormal complements and sphere/ball constants in R^n.

Dimension is a runtime value; everything here supports 3 <= n <= 8,
which is the range the rest of the library is built for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_DIM = 3
MAX_DIM = 8

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-10


def check_dim(n: int) -> int:
    n = int(n)
    if not MIN_DIM <= n <= MAX_DIM:
        raise ValueError(f"dimension must be in [{MIN_DIM}, {MAX_DIM}], got {n}")
    return n


def check_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-d float array, optionally of a given length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise ValueError(f"expected a vector of length {dim}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v


def as_direction(x, dim: int | None = None) -> np.ndarray:
    """Validate that ``x`` is a unit vector (within 1e-12) and return it."""
    v = check_vector(x, dim)
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > UNIT_TOL:
        raise ValueError(f"expected a unit vector, |x| = {nrm!r}")
    return v


def unit_vector(x, dim: int | None = None) -> np.ndarray:
    """Normalize ``x`` to a unit vector."""
    v = check_vector(x, dim)
    nrm = float(np.linalg.norm(v))
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / nrm


def sphere_area(k: int) -> float:
    """Surface measure of the unit sphere S^k, i.e. 2 pi^((k+1)/2) / Gamma((k+1)/2)."""
    if k < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {k}")
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


def ball_volume(k: int) -> float:
    """Volume of the unit ball B^k, i.e. pi^(k/2) / Gamma(k/2 + 1)."""
    if k < 0:
        raise ValueError(f"ball dimension must be >= 0, got {k}")
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


@dataclass(frozen=True)
class SphereConstants:
    """Surface measure ``s`` of S^k and volume ``v`` of B^k."""

    k: int
    s: float
    v: float


def sphere_constants(k: int) -> SphereConstants:
    if k < 0:
        raise ValueError(f"dimension must be >= 0, got {k}")
    return SphereConstants(k=int(k), s=sphere_area(k), v=ball_volume(k))


@dataclass(frozen=True)
class OrthoBasis:
    """A unit normal together with an orthonormal basis of its complement.

    ``basis`` has shape (n-1, n); rows are unit, mutually orthogonal and
    orthogonal to ``normal``.
    """

    normal: np.ndarray
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.normal.size


def orthonormal_complement(xi) -> OrthoBasis:
    """Deterministic orthonormal basis of the hyperplane orthogonal to ``xi``.

    Candidate standard basis vectors are taken in order of increasing
    alignment with ``xi`` (ties broken by lowest index) and orthogonalized
    by Gram-Schmidt, so the result is reproducible for a given input.
    """
    v = as_direction(xi)
    n = v.size
    order = np.argsort(np.abs(v), kind="stable")
    rows = [v]
    for j in order:
        cand = np.zeros(n)
        cand[j] = 1.0
        for r in rows:
            cand = cand - np.dot(cand, r) * r
        # second pass keeps orthogonality at the 1e-15 level
        for r in rows:
            cand = cand - np.dot(cand, r) * r
        nrm = float(np.linalg.norm(cand))
        if nrm > 1e-8:
            rows.append(cand / nrm)
        if len(rows) == n:
            break
    if len(rows) != n:
        raise ValueError("failed to complete an orthonormal basis")
    return OrthoBasis(normal=v, basis=np.array(rows[1:]))
