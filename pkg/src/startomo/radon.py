"""Forward spherical Radon (Funk) transform and a chord-identity validator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import StarBody
from .geom import as_direction, orthonormal_complement, sphere_area
from .quadrature import SphereRule, embed_rule, gauss_rule, sphere_rule
from .sections import _chord_average, _section_rule, projection_radius, section_areas
from .settings import Rules, default_rules

_EVEN_PROBE = 16
_EVEN_TOL = 1e-9


@dataclass(frozen=True)
class SphereFunction:
    """A continuous function on S^(n-1), evaluated on (N, n) arrays of directions."""

    dim: int
    func: callable
    even: bool = False

    def __post_init__(self):
        if self.even:
            rng = np.random.default_rng(20110405)
            probe = rng.standard_normal((_EVEN_PROBE, self.dim))
            probe /= np.linalg.norm(probe, axis=1, keepdims=True)
            fwd = np.asarray(self.func(probe), dtype=float)
            bwd = np.asarray(self.func(-probe), dtype=float)
            scale = max(1.0, float(np.abs(fwd).max()))
            if np.abs(fwd - bwd).max() > _EVEN_TOL * scale:
                raise ValueError("function marked even fails f(x) = f(-x)")

    def __call__(self, dirs) -> np.ndarray:
        return np.asarray(self.func(np.asarray(dirs, dtype=float)), dtype=float)


def radon(f: SphereFunction, xi, rule: SphereRule | int | None = None) -> float:
    """Integral of f over the great subsphere S^(n-1) orthogonal to xi.

    The subsphere carries the measure of total mass s_(n-2), so a constant c
    transforms to c * s_(n-2).
    """
    xi = as_direction(xi, f.dim)
    if rule is None:
        rule = sphere_rule(f.dim - 2)
    elif isinstance(rule, int):
        rule = sphere_rule(f.dim - 2, rule)
    if rule.nodes.shape[1] == f.dim - 1:
        rule = embed_rule(rule, orthonormal_complement(xi))
    elif rule.nodes.shape[1] != f.dim:
        raise ValueError("rule dimension does not match the function's sphere")
    return float(np.dot(rule.weights, f(rule.nodes)))


def radon_field(f: SphereFunction, grid, rule: SphereRule | int | None = None) -> np.ndarray:
    """Radon transform at every direction of ``grid``, in the given order."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return np.zeros(0)
    return np.array([radon(f, xi, rule) for xi in grid])


def body_radial_function(body: StarBody) -> SphereFunction:
    return SphereFunction(dim=body.dim, func=body.radial, even=True)


def slice_identity_residual(
    body: StarBody,
    e,
    t: float,
    rules: Rules | None = None,
    psi_nodes: int = 96,
) -> float:
    """Defect of the chord identity for the transformed section field.

    Both sides of

        R(xi -> A_xi(t))(e) = s_(n-3) * int_t^inf r (r^2 - t^2)^((n-4)/2) Phi(r) dr

    are computed by quadrature, where Phi is the spherical average of chord
    lengths of K parallel to e.  The right-hand integral is evaluated after
    r = sqrt(t^2 + x^2), which removes the kernel's square-root behaviour for
    odd n, followed by x = x_max * sin(psi) to soften the boundary of Phi.
    Requires n >= 4; for n = 3 the kernel exponent is negative and the
    identity is outside numeric scope.
    """
    n = body.dim
    if n < 4:
        raise ValueError("the chord identity is evaluated for n >= 4 only")
    rules = rules or default_rules(n)
    e = as_direction(e, n)
    t = float(t)
    if t < 0:
        raise ValueError("t must be >= 0")

    # left side: transform of the section field over the subsphere at e,
    # with all chord scans batched into one call
    sec_rule = sphere_rule(n - 2, rules.section_level)
    rad_rule = embed_rule(sphere_rule(n - 2, rules.radon_level), orthonormal_complement(e))
    from .sections import chord_power_integrals

    u_all = np.concatenate(
        [
            embed_rule(sec_rule, orthonormal_complement(xi)).nodes
            for xi in rad_rule.nodes
        ]
    )
    nu = len(sec_rule)
    base = np.repeat(rad_rule.nodes, nu, axis=0) * t
    reach = body.r_max * 1.02
    s_hi = np.full(u_all.shape[0], np.sqrt(max(reach * reach - t * t, 0.0)))
    chords = chord_power_integrals(
        body, base, u_all, s_hi, n - 2, rules.scan_points, rules.bisect_steps
    ).reshape(len(rad_rule), nu)
    areas = chords @ sec_rule.weights
    lhs = float(np.dot(rad_rule.weights, areas))

    # right side: weighted chord-profile integral.  The profile boundary is a
    # square-root kink, so x_max must sit at the exact projection radius for
    # the sine substitution to absorb it.
    r_proj = projection_radius(body, e, level=rules.support_level, margin=0.0)
    x_max_sq = r_proj * r_proj - t * t
    if x_max_sq <= 0.0:
        rhs = 0.0
    else:
        x_max = float(np.sqrt(x_max_sq))
        gq = gauss_rule(psi_nodes, 0.0, np.pi / 2.0)
        x = x_max * np.sin(gq.nodes)
        rs = np.sqrt(t * t + x * x)
        emb = _section_rule(body, e, sec_rule)
        phi = _chord_average(
            body, e, emb, rs, rules.scan_points, rules.bisect_steps
        )
        integrand = x ** (n - 3) * phi * x_max * np.cos(gq.nodes)
        rhs = sphere_area(n - 3) * float(np.dot(gq.weights, integrand))
    return abs(lhs - rhs)
