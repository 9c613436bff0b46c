"""Busemann-Petty experiments: positivity scans and section/volume comparisons.

The positivity criterion: central-section dominance implies volume dominance
for a class of bodies exactly when the inverse spherical Radon transform of
every admissible radial function is non-negative.  The scans here probe that
sign numerically; for convex bodies the criterion cannot certify the
curvature hypothesis, so reports flag it as unchecked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import StarBody, legendre_even, perturbed_ball, volume
from .geom import as_direction
from .inversion import (
    FieldEvaluator,
    InverseRadonField,
    _derivative_estimates,
    _support_estimate,
    direction_grid,
    inverse_radon,
    kappa,
)
from .sections import section_areas
from .settings import Rules, default_rules

_DOMINANCE_SLACK = 1e-9
_CANDIDATE_MARGIN = 3.0  # both gaps must exceed this multiple of their error


def positivity_scan(
    body: StarBody,
    grid=None,
    rules: Rules | None = None,
) -> tuple[float, np.ndarray, InverseRadonField]:
    """Minimum of the ball-normalized inverse transform over a direction grid."""
    rules = rules or default_rules(body.dim)
    fld = inverse_radon(body, grid=grid, rules=rules, roundtrip=False)
    return fld.min_value, fld.argmin, fld


def n4_remark_value(body: StarBody, xi, rules: Rules | None = None) -> float:
    """-A''_xi(0) / (16 pi^2), the four-dimensional inverse-transform value.

    Must agree with the general even-n field divided by kappa_4; for convex
    origin-symmetric bodies the central section is the largest parallel one,
    so the value is non-negative.
    """
    if body.dim != 4:
        raise ValueError(f"this shortcut is specific to n = 4, got n = {body.dim}")
    rules = rules or default_rules(4)
    xi = as_direction(xi, 4)
    w = _support_estimate(body, xi, rules)
    est = _derivative_estimates(body, xi, [2], w, rules, None)
    return -est[2].value / (16.0 * math.pi**2)


@dataclass(frozen=True)
class DominanceReport:
    holds: bool
    violations: int
    worst_margin: float  # min over grid of A_L(0) - A_K(0); negative if violated
    margin_error: float


@dataclass(frozen=True)
class BPReport:
    body_k: str
    body_l: str
    dim: int
    dominance: DominanceReport
    vol_k: float
    vol_l: float
    vol_error: float
    verdict: str
    curvature_hypothesis: str = "unchecked"
    notes: tuple = field(default_factory=tuple)

    def lines(self) -> list[str]:
        d = self.dominance
        return [
            f"body_k = {self.body_k}",
            f"body_l = {self.body_l}",
            f"dim = {self.dim}",
            f"sections_dominated = {str(d.holds).lower()}",
            f"dominance_violations = {d.violations}",
            f"dominance_worst_margin = {d.worst_margin:.12g}",
            f"dominance_margin_error = {d.margin_error:.12g}",
            f"vol_k = {self.vol_k:.12g}",
            f"vol_l = {self.vol_l:.12g}",
            f"vol_error = {self.vol_error:.12g}",
            f"verdict = {self.verdict}",
            f"curvature_hypothesis = {self.curvature_hypothesis}",
        ]

    def to_text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _central_sections(body, grid, rules):
    out = np.empty(grid.shape[0])
    for i, xi in enumerate(grid):
        out[i] = section_areas(
            body, xi, [0.0],
            rule=rules.section_level,
            scan_points=rules.scan_points,
            bisect_steps=rules.bisect_steps,
        )[0]
    return out


def section_dominance(
    body_k: StarBody,
    body_l: StarBody,
    grid=None,
    rules: Rules | None = None,
) -> DominanceReport:
    """Check A_K(0) <= A_L(0) over the grid, with a half-level error estimate."""
    if body_k.dim != body_l.dim:
        raise ValueError("bodies must share a dimension")
    rules = rules or default_rules(body_k.dim)
    if grid is None:
        grid = direction_grid(body_k.dim, rules.grid_level)
    grid = np.asarray(grid, dtype=float)

    a_k = _central_sections(body_k, grid, rules)
    a_l = _central_sections(body_l, grid, rules)
    margins = a_l - a_k
    bad = margins < -_DOMINANCE_SLACK * np.abs(a_l)

    coarse = rules.replace(section_level=max(1, rules.section_level // 2))
    a_k2 = _central_sections(body_k, grid, coarse)
    a_l2 = _central_sections(body_l, grid, coarse)
    err = float(np.max(np.abs(a_k - a_k2) + np.abs(a_l - a_l2)))

    return DominanceReport(
        holds=not bool(bad.any()),
        violations=int(bad.sum()),
        worst_margin=float(margins.min()),
        margin_error=err,
    )


def classify_verdict(dom: DominanceReport, vol_k: float, vol_l: float,
                     vol_err: float) -> str:
    """Map dominance and volume comparisons to a verdict.

    ``counterexample-candidate`` requires both the volume gap and the worst
    dominance margin to exceed three times their error estimates; smaller
    positive gaps are ``inconclusive``.
    """
    if not dom.holds:
        return "hypothesis-fails"
    gap = vol_k - vol_l
    if gap <= 0.0:
        return "consistent"
    if gap > _CANDIDATE_MARGIN * vol_err and dom.worst_margin > _CANDIDATE_MARGIN * dom.margin_error:
        return "counterexample-candidate"
    return "inconclusive"


def bp_experiment(
    body_k: StarBody,
    body_l: StarBody,
    grid=None,
    rules: Rules | None = None,
) -> BPReport:
    """Section dominance plus volume comparison, with a noise-aware verdict.

    ``counterexample-candidate`` requires the dominance margin and the volume
    gap to both exceed three times their estimated numerical errors,
    otherwise quadrature noise could fabricate counterexamples.
    """
    if body_k.dim != body_l.dim:
        raise ValueError("bodies must share a dimension")
    rules = rules or default_rules(body_k.dim)
    dom = section_dominance(body_k, body_l, grid, rules)

    level = 32
    vk, vl = volume(body_k, level=level), volume(body_l, level=level)
    vk2, vl2 = volume(body_k, level=level // 2), volume(body_l, level=level // 2)
    vol_err = abs(vk - vk2) + abs(vl - vl2) + 1e-12 * (abs(vk) + abs(vl))

    verdict = classify_verdict(dom, vk, vl, vol_err)
    return BPReport(
        body_k=body_k.label(),
        body_l=body_l.label(),
        dim=body_k.dim,
        dominance=dom,
        vol_k=vk,
        vol_l=vl,
        vol_error=vol_err,
        verdict=verdict,
    )


def admissible_eps(degree: int, bound: float = 0.95) -> float:
    """Largest eps with eps * max|P_degree| <= bound (keeps rho positive)."""
    grid = np.linspace(-1.0, 1.0, 4001)
    return bound / float(np.abs(legendre_even(degree, grid)).max())


def perturbation_scan(
    n: int,
    degree: int,
    eps_values,
    rules: Rules | None = None,
    axis=None,
) -> dict:
    """Scan the zonal perturbation strength and record the inverse-field minimum.

    Returns a dict with ``rows`` of (eps, min value, argmin alignment) and the
    smallest eps whose minimum is negative, if any.
    """
    rules = rules or default_rules(n)
    eps_values = [float(e) for e in eps_values]
    limit = admissible_eps(degree)
    for e in eps_values:
        if e < 0 or e > limit:
            raise ValueError(
                f"eps = {e} outside the admissible range [0, {limit:.4f}] "
                f"for degree {degree}"
            )
    from .bodies import ball

    rows = []
    first_negative = None
    for e in eps_values:
        # eps = 0 collapses to the unit ball; building it as one keeps the
        # isotropic fast path
        body = ball(n, 1.0) if e == 0.0 else perturbed_ball(n, e, degree, axis)
        min_val, argmin, _ = positivity_scan(body, rules=rules)
        align = float(abs(argmin @ body.axis)) if body.axis is not None else 0.0
        rows.append((e, min_val, align))
        if first_negative is None and min_val < 0.0:
            first_negative = e
    return {
        "degree": degree,
        "dim": n,
        "rows": rows,
        "first_negative_eps": first_negative,
        "admissible_limit": limit,
    }
