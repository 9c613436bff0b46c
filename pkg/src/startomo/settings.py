"""Resolution knobs shared by the section, transform and inversion pipelines."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geom import check_dim

# per-dimension defaults: (section_level, radon_level, grid_level, support_level)
_DEFAULT_LEVELS = {
    3: (24, 24, 8, 8),
    4: (8, 8, 4, 8),
    5: (5, 5, 4, 6),
    6: (5, 4, 3, 4),
    7: (4, 3, 2, 4),
    8: (3, 2, 2, 3),
}


@dataclass(frozen=True)
class Rules:
    """Quadrature levels and regularization parameters for one dimension.

    ``section_level`` and ``radon_level`` refine the S^(n-2) product rules
    used for section areas and for the spherical Radon transform;
    ``grid_level`` fixes the default output direction grid on S^(n-1).
    ``delta_frac`` and ``t_margin`` set the split (delta, T) of the
    regularized integral relative to the section support width.
    """

    dim: int
    section_level: int
    radon_level: int
    grid_level: int
    support_level: int
    profile_points: int = 401
    gauss_nodes: int = 32
    delta_frac: float = 0.05
    t_margin: float = 1.02
    spline_samples: int = 33
    use_symmetry: bool = True
    analytic_sections: bool = False
    scan_points: int = 256
    bisect_steps: int = 40

    def replace(self, **kw) -> "Rules":
        return replace(self, **kw)

    def validate(self) -> "Rules":
        check_dim(self.dim)
        if min(self.section_level, self.radon_level, self.grid_level,
               self.support_level) < 1:
            raise ValueError("rule levels must be positive")
        if self.profile_points < 16:
            raise ValueError("profile needs at least 16 points")
        if not 0.0 < self.delta_frac < 1.0:
            raise ValueError("delta_frac must lie in (0, 1)")
        if self.t_margin < 1.0:
            raise ValueError("t_margin must be >= 1")
        return self


def default_rules(dim: int, **overrides) -> Rules:
    dim = check_dim(dim)
    sec, rad, grid, sup = _DEFAULT_LEVELS[dim]
    rules = Rules(
        dim=dim,
        section_level=sec,
        radon_level=rad,
        grid_level=grid,
        support_level=sup,
    )
    if overrides:
        rules = rules.replace(**{k: v for k, v in overrides.items() if v is not None})
    return rules.validate()
