"""Parallel section functions, chord profiles and even derivatives at zero.

The workhorse is a batched chord scanner: for a family of rays it samples
membership on a uniform grid, refines every sign change by bisection and
integrates s^power exactly over the inside intervals.  Sections of a star
body by an off-center hyperplane need not be star-shaped, so multi-interval
chords are handled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .bodies import StarBody, analytic_sections, analytic_support
from .geom import as_direction, orthonormal_complement, sphere_area
from .quadrature import SphereRule, embed_rule, sphere_rule
from .settings import Rules, default_rules

_CHUNK_BUDGET = 12_000_000  # point coordinates held at once by the scanner


class ResolutionError(RuntimeError):
    """A numerical estimate cannot be produced at the requested resolution."""


# ---------------------------------------------------------------------------
# chord scanner
# ---------------------------------------------------------------------------

def chord_power_integrals(
    body: StarBody,
    base: np.ndarray,
    dirs: np.ndarray,
    s_hi: np.ndarray,
    power: int,
    scan_points: int = 256,
    bisect_steps: int = 40,
) -> np.ndarray:
    """Integral of s^power over {s in [0, s_hi] : base + s*dir in K}, per ray.

    Membership is sampled at ``scan_points`` values of s, each bracket with a
    sign change is refined by ``bisect_steps`` bisections, and the monomial is
    integrated exactly on every inside interval.
    """
    base = np.asarray(base, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    s_hi = np.asarray(s_hi, dtype=float)
    m, n = base.shape
    out = np.zeros(m)
    active = np.nonzero(s_hi > 0)[0]
    if active.size == 0:
        return out
    tau = np.linspace(0.0, 1.0, scan_points)
    pw = power + 1

    chunk_rows = max(1, int(_CHUNK_BUDGET / (scan_points * n)))
    for start in range(0, active.size, chunk_rows):
        rows = active[start : start + chunk_rows]
        s = s_hi[rows, None] * tau[None, :]
        pts = base[rows, None, :] + s[:, :, None] * dirs[rows, None, :]
        inside = body.inside(pts.reshape(-1, n)).reshape(len(rows), scan_points) <= 0.0

        flips_r, flips_c = np.nonzero(inside[:, :-1] != inside[:, 1:])
        if flips_r.size:
            lo = s[flips_r, flips_c]
            hi = s[flips_r, flips_c + 1]
            lo_inside = inside[flips_r, flips_c]
            b_base = base[rows][flips_r]
            b_dirs = dirs[rows][flips_r]
            for _ in range(bisect_steps):
                mid = 0.5 * (lo + hi)
                g_mid = body.inside(b_base + mid[:, None] * b_dirs) <= 0.0
                take_lo = g_mid == lo_inside
                lo = np.where(take_lo, mid, lo)
                hi = np.where(take_lo, hi, mid)
            crossing = 0.5 * (lo + hi)
            sign = np.where(lo_inside, 1.0, -1.0)
            contrib = np.bincount(
                flips_r, weights=sign * crossing**pw / pw, minlength=len(rows)
            )
            out[rows] += contrib

        # rays still inside at the far end contribute a final closing term
        tail = inside[:, -1]
        if tail.any():
            out[rows[tail]] += s_hi[rows[tail]] ** pw / pw
    return out


def _section_rule(body: StarBody, xi: np.ndarray, rule_or_level) -> SphereRule:
    if isinstance(rule_or_level, SphereRule):
        rule = rule_or_level
    else:
        rule = sphere_rule(body.dim - 2, int(rule_or_level))
    if rule.nodes.shape[1] == body.dim - 1:
        rule = embed_rule(rule, orthonormal_complement(xi))
    elif rule.nodes.shape[1] != body.dim:
        raise ValueError("section rule must live on S^(n-2)")
    return rule


def section_areas(
    body: StarBody,
    xi,
    ts,
    rule: SphereRule | int | None = None,
    scan_points: int = 256,
    bisect_steps: int = 40,
    analytic: bool = False,
) -> np.ndarray:
    """A_xi(t) for an array of offsets t >= 0.

    With ``analytic=True`` the closed form is used when the body has one.
    Otherwise the area is the quadrature over u in S^(n-2) (embedded in the
    hyperplane through t*xi) of the chord integrals of s^(n-2).
    """
    xi = as_direction(xi, body.dim)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts < 0):
        raise ValueError("section offsets must be >= 0")
    if analytic:
        closed = analytic_sections(body, xi, ts)
        if closed is not None:
            return np.asarray(closed, dtype=float)
    emb = _section_rule(body, xi, rule if rule is not None else 8)
    n = body.dim
    nu = len(emb)
    nt = ts.size

    reach = body.r_max * 1.02
    s_hi_t = np.sqrt(np.maximum(reach * reach - ts * ts, 0.0))
    base = np.repeat(ts, nu)[:, None] * xi[None, :]
    dirs = np.tile(emb.nodes, (nt, 1))
    s_hi = np.repeat(s_hi_t, nu)
    chords = chord_power_integrals(
        body, base, dirs, s_hi, n - 2, scan_points, bisect_steps
    ).reshape(nt, nu)
    return chords @ emb.weights


def section_area(body: StarBody, xi, t: float, rule=None, **kw) -> float:
    """Single parallel section area; returns 0 beyond the support."""
    return float(section_areas(body, xi, [t], rule, **kw)[0])


# ---------------------------------------------------------------------------
# support bound
# ---------------------------------------------------------------------------

def _refine_sphere_max(body: StarBody, score, v0: np.ndarray) -> float:
    """Local maximization of a smooth score over the sphere, from node v0."""
    frame = orthonormal_complement(v0)

    def neg(z):
        v = v0 + z @ frame.basis
        v = v / np.linalg.norm(v)
        return -score(v[None, :])[0]

    res = minimize(
        neg,
        np.zeros(body.dim - 1),
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 500},
    )
    return float(-res.fun)


def support_bound(
    body: StarBody,
    xi,
    rule: SphereRule | None = None,
    level: int = 8,
    margin: float = 0.02,
) -> float:
    """Upper bound for the support {t : A_xi(t) > 0} of the section function.

    The support half-width equals max_v rho(v) * <v, xi>_+ over the sphere.
    The node maximum of a coarse rule can undershoot the true maximum, so it
    is polished by a local search before the 2% inflation; this keeps the
    upper-bound contract honest.
    """
    xi = as_direction(xi, body.dim)
    exact = analytic_support(body, xi)
    if exact is not None:
        return float(exact) * (1.0 + margin)
    if rule is None:
        rule = sphere_rule(body.dim - 1, level)

    def score(v):
        return body.radial(v) * np.maximum(v @ xi, 0.0)

    vals = score(rule.nodes)
    v0 = rule.nodes[int(np.argmax(vals))]
    best = max(float(vals.max()), _refine_sphere_max(body, score, v0))
    return best * (1.0 + margin)


def projection_radius(
    body: StarBody, e, rule: SphereRule | None = None, level: int = 8,
    margin: float = 0.02,
) -> float:
    """Upper bound for the radius of the projection of K onto e-orthogonal."""
    from .bodies import analytic_projection_radius

    e = as_direction(e, body.dim)
    exact = analytic_projection_radius(body, e)
    if exact is not None:
        return float(exact) * (1.0 + margin)
    if rule is None:
        rule = sphere_rule(body.dim - 1, level)

    def score(v):
        proj = v - np.outer(v @ e, e)
        return body.radial(v) * np.sqrt(np.einsum("ij,ij->i", proj, proj))

    vals = score(rule.nodes)
    v0 = rule.nodes[int(np.argmax(vals))]
    best = max(float(vals.max()), _refine_sphere_max(body, score, v0))
    return best * (1.0 + margin)


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionProfile:
    """Samples of A_xi on an increasing grid in [0, T], with support bound."""

    xi: np.ndarray
    ts: np.ndarray
    values: np.ndarray
    support: float

    def step(self) -> float:
        h = np.diff(self.ts)
        if h.size == 0 or np.ptp(h) > 1e-9 * h[0]:
            raise ResolutionError("profile grid is not uniform")
        return float(h[0])


@dataclass(frozen=True)
class ChordProfile:
    """Spherical average of the 1-d chord length of K parallel to a fixed axis."""

    e: np.ndarray
    xs: np.ndarray
    values: np.ndarray


def profile(
    body: StarBody,
    xi,
    rules: Rules | None = None,
    npts: int | None = None,
    T: float | None = None,
    analytic: bool | None = None,
    cache: "ProfileCache | None" = None,
) -> SectionProfile:
    """Uniform section profile on [0, T] (T defaults to the support bound)."""
    rules = rules or default_rules(body.dim)
    xi = as_direction(xi, body.dim)
    npts = npts or rules.profile_points
    use_analytic = rules.analytic_sections if analytic is None else analytic
    w = support_bound(body, xi, level=rules.support_level)
    T = T if T is not None else w
    if cache is not None:
        hit = cache.get(body, xi, rules.section_level, npts, use_analytic)
        if hit is not None:
            return hit
    ts = np.linspace(0.0, T, npts)
    vals = section_areas(
        body, xi, ts,
        rule=rules.section_level,
        scan_points=rules.scan_points,
        bisect_steps=rules.bisect_steps,
        analytic=use_analytic,
    )
    prof = SectionProfile(xi=xi, ts=ts, values=vals, support=w)
    if cache is not None:
        cache.put(body, xi, rules.section_level, npts, use_analytic, prof)
    return prof


def chord_profile(
    body: StarBody,
    e,
    rule: SphereRule | int | None = None,
    xs=None,
    npts: int = 201,
    scan_points: int = 256,
    bisect_steps: int = 40,
) -> ChordProfile:
    """Average over u in S^(n-2) of the chord length of K along e through x*u."""
    e = as_direction(e, body.dim)
    emb = _section_rule(body, e, rule if rule is not None else 8)
    if xs is None:
        xs = np.linspace(0.0, projection_radius(body, e), npts)
    xs = np.asarray(xs, dtype=float)
    vals = _chord_average(body, e, emb, xs)
    return ChordProfile(e=e, xs=xs, values=vals)


def _chord_average(body, e, emb, xs, scan_points=256, bisect_steps=40):
    """Phi(x) = sum_u w_u * Vol_1(K intersect (x*u + R e)) for each x >= 0."""
    nu = len(emb)
    nx = xs.size
    reach = body.r_max * 1.02
    ys = np.repeat(xs, nu)[:, None] * np.tile(emb.nodes, (nx, 1))
    s_hi = np.sqrt(np.maximum(reach * reach - np.repeat(xs, nu) ** 2, 0.0))
    total = np.zeros(nx * nu)
    for sgn in (1.0, -1.0):
        dirs = np.broadcast_to(sgn * e, (nx * nu, body.dim))
        total += chord_power_integrals(
            body, ys, dirs, s_hi, 0, scan_points, bisect_steps
        )
    return total.reshape(nx, nu) @ emb.weights


# ---------------------------------------------------------------------------
# even derivatives at zero
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeEstimate:
    value: float
    error: float


def _central_weights(order: int, half_width: int) -> np.ndarray:
    """Stencil weights w_{-J..J} solving sum_j w_j j^q = order! * delta_{q,order}."""
    import math

    J = half_width
    offsets = np.arange(-J, J + 1, dtype=float)
    q = np.arange(2 * J + 1, dtype=float)
    vander = offsets[None, :] ** q[:, None]
    rhs = np.zeros(2 * J + 1)
    rhs[order] = float(math.factorial(order))
    return np.linalg.solve(vander, rhs)


def even_derivative_at_zero(p: SectionProfile, order: int) -> DerivativeEstimate:
    """Estimate of the even-order derivative of A at t = 0.

    Uses the even extension A(-t) = A(t), a fourth-order central stencil and
    one Richardson level on the doubled step.  The reported error is the gap
    between the two stencil widths.
    """
    if order <= 0 or order % 2 != 0:
        raise ValueError(f"order must be a positive even integer, got {order}")
    if order > 8:
        raise ValueError(f"derivative order capped at 8, got {order}")
    h = p.step()  # raises ResolutionError on non-uniform grids
    if abs(p.ts[0]) > 1e-12 * max(h, 1.0):
        raise ResolutionError("profile must start at t = 0")
    J = order // 2 + 2
    if p.values.size <= 2 * J:
        raise ResolutionError(
            f"profile too short for order {order}: need more than {2 * J} samples"
        )
    w = _central_weights(order, J)
    folded = w[J:].copy()
    folded[1:] += w[:J][::-1]  # even extension folds negative offsets

    def apply(step_idx: int) -> float:
        vals = p.values[:: step_idx][: J + 1]
        return float(np.dot(folded, vals)) / (step_idx * h) ** order

    d_fine = apply(1)
    d_coarse = apply(2)
    value = (16.0 * d_fine - d_coarse) / 15.0
    return DerivativeEstimate(value=value, error=abs(d_fine - d_coarse) / 15.0)


# ---------------------------------------------------------------------------
# profile cache (optional persistence to a columnar text file)
# ---------------------------------------------------------------------------

class ProfileCache:
    """Profiles keyed by body, direction and resolution; optional text persistence."""

    def __init__(self, directory=None):
        self._mem = {}
        self.directory = directory

    def _key(self, body, xi, level, npts, analytic):
        import hashlib

        xi_part = ",".join(f"{v:.14e}" for v in xi)
        digest = hashlib.sha1(xi_part.encode()).hexdigest()[:8]
        return f"{body.key()}_{level}_{npts}_{int(analytic)}_{digest}"

    def get(self, body, xi, level, npts, analytic):
        key = self._key(body, xi, level, npts, analytic)
        if key in self._mem:
            return self._mem[key]
        if self.directory is not None:
            path = self._path(key)
            if path.exists():
                data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
                prof = SectionProfile(
                    xi=np.asarray(xi, dtype=float),
                    ts=data[:, 0],
                    values=data[:, 1],
                    support=float(data[-1, 2]),
                )
                self._mem[key] = prof
                return prof
        return None

    def put(self, body, xi, level, npts, analytic, prof):
        key = self._key(body, xi, level, npts, analytic)
        self._mem[key] = prof
        if self.directory is not None:
            path = self._path(key)
            rows = ["t,A,support"]
            for t, a in zip(prof.ts, prof.values):
                rows.append(f"{t:.17g},{a:.17g},{prof.support:.17g}")
            path.write_text("\n".join(rows) + "\n")

    def _path(self, key):
        from pathlib import Path

        d = Path(self.directory)
        d.mkdir(parents=True, exist_ok=True)
        return d / f"profile_{key}.csv"


def central_section_polar(body: StarBody, xi, rule: SphereRule | int | None = None) -> float:
    """Central section area by the polar formula, an independent cross-check.

    A_xi(0) = (1/(n-1)) * integral of rho^(n-1) over S^(n-2) in the hyperplane.
    """
    xi = as_direction(xi, body.dim)
    emb = _section_rule(body, xi, rule if rule is not None else 8)
    rho = body.radial(emb.nodes)
    return float(np.dot(emb.weights, rho ** (body.dim - 1))) / (body.dim - 1)
