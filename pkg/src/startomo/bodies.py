"""Catalog of origin-symmetric star bodies.

Every body carries a vectorized radial function rho on unit vectors, a
signed inside function (<= 0 inside, used by the chord scanner), cheap
radial bounds and a symmetry tag that the inversion pipeline exploits:

    isotropic    rho is constant (balls)
    zonal        rho depends on <x, axis> only (perturbed balls)
    ellipsoidal  section data depends on the ellipsoid width w(xi) only
    generic      no structure assumed (lp balls)
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .geom import as_direction, ball_volume, check_dim, check_vector
from .quadrature import SphereRule, sphere_rule

_BOUNDS_LEVEL = 3
_BOUNDS_MARGIN = 0.01


@dataclass(frozen=True)
class StarBody:
    """Origin-symmetric star body given by a positive even radial function."""

    dim: int
    kind: str
    params: tuple
    r_min: float
    r_max: float
    symmetry: str
    smoothness: str
    axis: np.ndarray | None = None
    axes: np.ndarray | None = None
    _radial: callable = field(default=None, repr=False, compare=False)
    _inside: callable = field(default=None, repr=False, compare=False)

    def radial(self, u) -> np.ndarray | float:
        """rho at unit vectors ``u`` (a single vector or an (N, dim) array)."""
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            return float(self._radial(u[None, :])[0])
        return self._radial(u)

    def inside(self, x) -> np.ndarray:
        """Signed membership at points ``x``: <= 0 inside the body."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self._inside(x[None, :])[0])
        return self._inside(x)

    def key(self) -> str:
        raw = f"{self.kind}:{self.dim}:{self.params!r}"
        return hashlib.sha1(raw.encode()).hexdigest()[:12]

    def label(self) -> str:
        return f"{self.kind}{self.params!r}@n={self.dim}"


def _radial_bounds(dim, radial_fn, extra_dirs=None):
    nodes = sphere_rule(dim - 1, _BOUNDS_LEVEL).nodes
    if extra_dirs is not None and len(extra_dirs):
        nodes = np.vstack([nodes, np.asarray(extra_dirs, dtype=float)])
    vals = radial_fn(nodes)
    lo = float(vals.min())
    hi = float(vals.max())
    if lo <= 0.0:
        raise ValueError("radial function must be strictly positive")
    return lo * (1.0 - _BOUNDS_MARGIN), hi * (1.0 + _BOUNDS_MARGIN)


def _norm_rows(x):
    return np.sqrt(np.einsum("ij,ij->i", x, x))


def legendre_even(degree: int, c):
    """P_degree(c) for degree in {2, 4, 6}, Horner in c^2 (hot path)."""
    c2 = np.square(c)
    if degree == 2:
        return 1.5 * c2 - 0.5
    if degree == 4:
        return ((4.375 * c2 - 3.75) * c2) + 0.375
    if degree == 6:
        return ((14.4375 * c2 - 19.6875) * c2 + 6.5625) * c2 - 0.3125
    raise ValueError(f"even Legendre degree must be 2, 4 or 6, got {degree}")


def ball(dim: int, r: float = 1.0) -> StarBody:
    dim = check_dim(dim)
    r = float(r)
    if r <= 0:
        raise ValueError(f"ball radius must be positive, got {r}")

    def radial(u):
        return np.full(u.shape[0], r)

    def inside(x):
        return _norm_rows(x) - r

    return StarBody(
        dim=dim, kind="ball", params=(r,),
        r_min=r * (1 - _BOUNDS_MARGIN), r_max=r * (1 + _BOUNDS_MARGIN),
        symmetry="isotropic", smoothness="smooth",
        _radial=radial, _inside=inside,
    )


def ellipsoid(axes) -> StarBody:
    a = check_vector(axes)
    dim = check_dim(a.size)
    if np.any(a <= 0):
        raise ValueError("ellipsoid semi-axes must be positive")
    inv2 = 1.0 / (a * a)

    def radial(u):
        q = np.einsum("ij,j,ij->i", u, inv2, u)
        return 1.0 / np.sqrt(q)

    def inside(x):
        return np.einsum("ij,j,ij->i", x, inv2, x) - 1.0

    axis_dirs = np.vstack([np.eye(dim), -np.eye(dim)])
    lo, hi = _radial_bounds(dim, radial, axis_dirs)
    return StarBody(
        dim=dim, kind="ellipsoid", params=tuple(float(v) for v in a),
        r_min=lo, r_max=hi,
        symmetry="ellipsoidal", smoothness="smooth",
        axes=a.copy(),
        _radial=radial, _inside=inside,
    )


def lp_ball(dim: int, p: float) -> StarBody:
    dim = check_dim(dim)
    p = float(p)
    if p < 0.5:
        raise ValueError(f"lp exponent must be >= 0.5, got {p}")

    def radial(u):
        return np.power(np.abs(u), p).sum(axis=1) ** (-1.0 / p)

    def inside(x):
        return np.power(np.abs(x), p).sum(axis=1) - 1.0

    diag = np.ones(dim) / np.sqrt(dim)
    lo, hi = _radial_bounds(dim, radial, np.vstack([np.eye(dim), diag[None, :]]))
    smooth = "smooth" if (p.is_integer() and int(p) % 2 == 0) else "piecewise"
    return StarBody(
        dim=dim, kind="lp", params=(p,),
        r_min=lo, r_max=hi,
        symmetry="generic", smoothness=smooth,
        _radial=radial, _inside=inside,
    )


def perturbed_ball(dim: int, eps: float, degree: int = 4, axis=None) -> StarBody:
    """Ball with a zonal bump: rho(x) = 1 + eps * P_degree(<x, axis>).

    ``degree`` must be even so the body stays origin-symmetric; validity
    requires eps * max|P_degree| < 1 so rho stays positive.
    """
    dim = check_dim(dim)
    eps = float(eps)
    degree = int(degree)
    if degree not in (2, 4, 6):
        raise ValueError(f"perturbation degree must be one of 2, 4, 6, got {degree}")
    if axis is None:
        a = np.zeros(dim)
        a[-1] = 1.0
    else:
        a = as_direction(axis, dim)
    grid = np.linspace(-1.0, 1.0, 2001)
    pmax = float(np.abs(legendre_even(degree, grid)).max())
    if abs(eps) * pmax >= 1.0:
        raise ValueError(
            f"perturbation too strong: |eps| * max|P_{degree}| = {abs(eps) * pmax:.3f} >= 1"
        )

    def radial(u):
        return 1.0 + eps * legendre_even(degree, u @ a)

    def inside(x):
        nrm2 = np.einsum("ij,ij->i", x, x)
        nrm = np.sqrt(nrm2)
        safe = np.where(nrm > 0, nrm, 1.0)
        c = (x @ a) / safe
        rho = 1.0 + eps * legendre_even(degree, np.clip(c, -1.0, 1.0))
        return np.where(nrm > 0, nrm - rho, -1.0)

    meridian = np.linspace(0.0, np.pi, 256)
    b = np.zeros(dim)
    b[0] = 1.0 if abs(a[0]) < 0.9 else 0.0
    if not b.any():
        b[1] = 1.0
    b = b - np.dot(b, a) * a
    b /= np.linalg.norm(b)
    extra = np.cos(meridian)[:, None] * a + np.sin(meridian)[:, None] * b
    lo, hi = _radial_bounds(dim, radial, extra)
    return StarBody(
        dim=dim, kind="pball", params=(eps, degree, tuple(float(v) for v in a)),
        r_min=lo, r_max=hi,
        symmetry="zonal", smoothness="smooth",
        axis=a,
        _radial=radial, _inside=inside,
    )


# ---------------------------------------------------------------------------
# membership, volume, closed forms
# ---------------------------------------------------------------------------

def radial(body: StarBody, x):
    """rho_K at the unit vector ``x``."""
    return body.radial(as_direction(x, body.dim))


def contains(body: StarBody, x) -> bool | np.ndarray:
    """Membership test: x in K iff |x| <= rho(x / |x|); the origin is inside."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[1] != body.dim:
        raise ValueError(f"point dimension {pts.shape[1]} != body dimension {body.dim}")
    res = body.inside(pts) <= 0.0
    return bool(res[0]) if single else res


def volume(body: StarBody, rule: SphereRule | None = None, level: int = 32) -> float:
    """Volume by the polar formula (1/n) * integral of rho^n over S^(n-1)."""
    if rule is None:
        rule = sphere_rule(body.dim - 1, level)
    if rule.nodes.shape[1] != body.dim:
        raise ValueError("rule must live on the unit sphere of the body's space")
    rho = body.radial(rule.nodes)
    return float(np.dot(rule.weights, rho ** body.dim)) / body.dim


def ellipsoid_width(body: StarBody, xi) -> float:
    """Half-width w(xi) = sqrt(sum a_i^2 xi_i^2) of an ellipsoid along xi."""
    if body.kind != "ellipsoid":
        raise ValueError("width is defined for ellipsoids")
    xi = as_direction(xi, body.dim)
    return float(np.sqrt(np.sum((body.axes * xi) ** 2)))


def analytic_sections(body: StarBody, xi, t):
    """Closed-form parallel section function, or None when unavailable.

    ball(r):       v_{n-1} (r^2 - t^2)^((n-1)/2)            for |t| <= r
    ellipsoid(a):  v_{n-1} (prod a / w) (1 - t^2/w^2)^((n-1)/2) for |t| <= w,
                   with w(xi) = sqrt(sum a_i^2 xi_i^2)
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    n = body.dim
    vn1 = ball_volume(n - 1)
    if body.kind == "ball":
        r = body.params[0]
        vals = vn1 * np.where(
            np.abs(t_arr) <= r, np.maximum(r * r - t_arr * t_arr, 0.0), 0.0
        ) ** ((n - 1) / 2.0)
    elif body.kind == "ellipsoid":
        w = ellipsoid_width(body, xi)
        prod_a = float(np.prod(body.axes))
        vals = (
            vn1
            * (prod_a / w)
            * np.where(np.abs(t_arr) <= w, np.maximum(1.0 - (t_arr / w) ** 2, 0.0), 0.0)
            ** ((n - 1) / 2.0)
        )
    else:
        return None
    return float(vals[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else vals


def analytic_support(body: StarBody, xi):
    """Exact half-width of the section support along xi, or None."""
    if body.kind == "ball":
        return body.params[0]
    if body.kind == "ellipsoid":
        return ellipsoid_width(body, xi)
    return None


def analytic_projection_radius(body: StarBody, e):
    """Exact radius of the projection of the body onto e-orthogonal, or None."""
    if body.kind == "ball":
        return body.params[0]
    if body.kind == "ellipsoid":
        from .geom import orthonormal_complement

        frame = orthonormal_complement(as_direction(e, body.dim))
        m = frame.basis * body.axes[None, :]
        # max of |diag(a) z| over unit z orthogonal to e
        sv = np.linalg.svd(m, compute_uv=False)
        return float(sv[0])
    return None


# ---------------------------------------------------------------------------
# spec strings:  ball:r=1  ellipsoid:a=1,2,3  lp:p=1.5  pball:eps=.3,d=4,axis=last
# ---------------------------------------------------------------------------

def parse_body(text: str, dim: int) -> StarBody:
    dim = check_dim(dim)
    text = text.strip()
    if ":" not in text:
        kind, args = text, ""
    else:
        kind, args = text.split(":", 1)
    kind = kind.strip().lower()
    kv = {}
    if args.strip():
        for part in args.split(","):
            part = part.strip()
            if "=" in part:
                k, v = part.split("=", 1)
                kv.setdefault(k.strip(), []).append(v.strip())
            else:
                if not kv:
                    raise ValueError(f"malformed body parameter {part!r} in {text!r}")
                kv[list(kv)[-1]].append(part)
    try:
        if kind == "ball":
            return ball(dim, float(kv.get("r", ["1"])[0]))
        if kind == "ellipsoid":
            if "a" not in kv:
                raise ValueError("ellipsoid needs a=a1,...,an")
            axes = [float(v) for v in kv["a"]]
            if len(axes) != dim:
                raise ValueError(
                    f"ellipsoid needs {dim} semi-axes, got {len(axes)}"
                )
            return ellipsoid(axes)
        if kind == "lp":
            return lp_ball(dim, float(kv.get("p", ["2"])[0]))
        if kind == "pball":
            eps = float(kv.get("eps", ["0.1"])[0])
            degree = int(kv.get("d", ["4"])[0])
            axis_txt = kv.get("axis", ["last"])[0].lower()
            axis = np.zeros(dim)
            if axis_txt == "last":
                axis[-1] = 1.0
            elif axis_txt == "first":
                axis[0] = 1.0
            else:
                idx = int(axis_txt)
                if not 1 <= idx <= dim:
                    raise ValueError(f"axis index out of range: {idx}")
                axis[idx - 1] = 1.0
            return perturbed_ball(dim, eps, degree, axis)
    except ValueError:
        raise
    raise ValueError(f"unknown body kind {kind!r} (use ball/ellipsoid/lp/pball)")
