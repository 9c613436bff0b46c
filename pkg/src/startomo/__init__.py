"""Section functions of star bodies, the spherical Radon transform and its
inversion, with positivity experiments for the section/volume comparison
problem."""

from .bodies import (
    StarBody,
    analytic_sections,
    ball,
    contains,
    ellipsoid,
    lp_ball,
    parse_body,
    perturbed_ball,
    radial,
    volume,
)
from .bp import (
    BPReport,
    DominanceReport,
    bp_experiment,
    n4_remark_value,
    perturbation_scan,
    positivity_scan,
    section_dominance,
)
from .geom import (
    OrthoBasis,
    SphereConstants,
    as_direction,
    ball_volume,
    orthonormal_complement,
    sphere_area,
    sphere_constants,
    unit_vector,
)
from .inversion import (
    FieldEvaluator,
    InverseRadonField,
    InversionConstants,
    coefficients,
    consistency_residual,
    direction_grid,
    even_derivative_field,
    gaussian_crosscheck,
    inverse_radon,
    kappa,
    odd_functional,
)
from .quadrature import Quadrature1D, SphereRule, embed_rule, gauss_rule, sphere_rule
from .radon import SphereFunction, body_radial_function, radon, radon_field, slice_identity_residual
from .sections import (
    ChordProfile,
    DerivativeEstimate,
    ProfileCache,
    ResolutionError,
    SectionProfile,
    chord_profile,
    even_derivative_at_zero,
    profile,
    section_area,
    section_areas,
    support_bound,
)
from .settings import Rules, default_rules

__version__ = "0.1.0"

__all__ = [
    "BPReport",
    "ChordProfile",
    "DerivativeEstimate",
    "DominanceReport",
    "FieldEvaluator",
    "InverseRadonField",
    "InversionConstants",
    "OrthoBasis",
    "ProfileCache",
    "Quadrature1D",
    "ResolutionError",
    "Rules",
    "SectionProfile",
    "SphereConstants",
    "SphereFunction",
    "SphereRule",
    "StarBody",
    "analytic_sections",
    "as_direction",
    "ball",
    "ball_volume",
    "body_radial_function",
    "bp_experiment",
    "chord_profile",
    "coefficients",
    "consistency_residual",
    "contains",
    "default_rules",
    "direction_grid",
    "ellipsoid",
    "embed_rule",
    "even_derivative_at_zero",
    "even_derivative_field",
    "gauss_rule",
    "gaussian_crosscheck",
    "inverse_radon",
    "kappa",
    "lp_ball",
    "n4_remark_value",
    "odd_functional",
    "orthonormal_complement",
    "parse_body",
    "perturbation_scan",
    "perturbed_ball",
    "positivity_scan",
    "profile",
    "radial",
    "radon",
    "radon_field",
    "section_area",
    "section_areas",
    "section_dominance",
    "slice_identity_residual",
    "sphere_area",
    "sphere_constants",
    "sphere_rule",
    "support_bound",
    "unit_vector",
    "volume",
]
