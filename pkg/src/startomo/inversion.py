"""Inversion of the spherical Radon transform via section functions.

For an origin-symmetric star body K with smooth radial function rho, the
transform is inverted from parallel section data:

    even n:  kappa_n * rho = R(xi -> A_xi^(n-2)(0))
    odd n:   kappa_n * rho = R(xi -> J(xi)),
             J(xi) = int_0^inf t^(1-n) * (A_xi(t) - T_xi(t)) dt,

where T_xi is the even Taylor polynomial of A_xi of degree n-3 at zero and

    kappa_n = (-1)^((n-2)/2) * 2^n * pi^(n-2)            for even n,
    kappa_n = (-1)^((n-1)/2) * (2 pi)^(n-1) / (n-2)!     for odd n.

The regularized integral J is split into three pieces: on [0, delta] the
integrand extends continuously to A^(n-1)(0)/(n-1)! and a three-point rule
is used; on [delta, T] the subtracted integrand is integrated by panelled
Gauss rules with a panel break at the support width; beyond T the section
function vanishes and the remaining moment of the Taylor polynomial is
added in closed form.  The same Taylor coefficients feed the subtraction
and the closed-form tail, otherwise the two pieces would not cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .bodies import StarBody
from .geom import as_direction, orthonormal_complement, sphere_area
from .quadrature import embed_rule, gauss_rule, sphere_rule
from .sections import (
    SectionProfile,
    even_derivative_at_zero,
    section_areas,
    support_bound,
)
from .settings import Rules, default_rules

_SERIES_CAP = 1 << 20
_SERIES_HEAD = 32


# ---------------------------------------------------------------------------
# coefficients and constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InversionConstants:
    """Binomial coefficients a_k, their weighted series sum and the scale kappa_n.

    ``a`` holds the leading coefficients a_k = (-1)^k * C((n-2)/2, k); for
    even n they vanish beyond k = (n-2)/2.  ``series_sum`` is
    sum_k a_k / (n - 2 - 2k), defined for odd n only (for even n the term
    k = (n-2)/2 would divide by zero and the quantity is not used).
    """

    n: int
    a: np.ndarray
    series_sum: float | None
    kappa: float
    tail_bound: float
    terms_used: int


def kappa(n: int) -> float:
    """Scale factor between rho and the transformed section field."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if n % 2 == 0:
        return (-1.0) ** ((n - 2) // 2) * 2.0**n * math.pi ** (n - 2)
    return (-1.0) ** ((n - 1) // 2) * (2.0 * math.pi) ** (n - 1) / math.factorial(n - 2)


def binomial_coefficients(n: int, count: int) -> np.ndarray:
    """a_k = (-1)^k * C((n-2)/2, k) for k = 0..count-1, by the running product."""
    half = (n - 2) / 2.0
    a = np.empty(count)
    a[0] = 1.0
    for k in range(1, count):
        a[k] = a[k - 1] * (-(half - k + 1.0)) / k
    return a


@lru_cache(maxsize=16)
def _odd_series(n: int, tol: float) -> tuple[float, float, int]:
    """Accelerated sum of a_k / (n - 2 - 2k) for odd n.

    Terms decay like k^(-n/2 - 1), too slowly at n = 3 for direct summation,
    so partial sums at K/4, K/2, K are Richardson-extrapolated with the known
    power-law tail exponents n/2 and n/2 + 1.
    """
    half = (n - 2) / 2.0
    k = np.arange(1, _SERIES_CAP, dtype=float)
    ratios = -(half - k + 1.0) / k
    a = np.empty(_SERIES_CAP)
    a[0] = 1.0
    np.cumprod(ratios, out=a[1:])
    terms = a / (n - 2.0 - 2.0 * np.arange(_SERIES_CAP))
    csum = np.cumsum(terms)

    stop = _SERIES_CAP
    probe = 1 << 12
    while probe < _SERIES_CAP:
        if abs(terms[probe - 1]) < tol:
            stop = probe
            break
        probe <<= 1

    s1 = csum[stop // 4 - 1]
    s2 = csum[stop // 2 - 1]
    s3 = csum[stop - 1]
    p = n / 2.0
    r12 = (2.0**p * s2 - s1) / (2.0**p - 1.0)
    r23 = (2.0**p * s3 - s2) / (2.0**p - 1.0)
    total = (2.0 ** (p + 1.0) * r23 - r12) / (2.0 ** (p + 1.0) - 1.0)
    tail_bound = abs(total - r23) + abs(terms[stop - 1])
    return float(total), float(tail_bound), int(stop)


def coefficients(n: int, tol: float = 1e-12) -> InversionConstants:
    """Coefficients a_k, the series sum (odd n) and kappa_n."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    a = binomial_coefficients(n, _SERIES_HEAD)
    if n % 2 == 0:
        return InversionConstants(
            n=n, a=a, series_sum=None, kappa=kappa(n), tail_bound=0.0,
            terms_used=(n - 2) // 2 + 1,
        )
    total, tail, used = _odd_series(n, float(tol))
    return InversionConstants(
        n=n, a=a, series_sum=total, kappa=kappa(n), tail_bound=tail, terms_used=used,
    )


def consistency_residual(n: int, tol: float = 1e-12) -> float:
    """Defect of -2 s_(n-2) s_(n-3) S_n / (n-2) = kappa_n, for odd n."""
    if n % 2 == 0:
        raise ValueError("the consistency identity links odd-n constants")
    c = coefficients(n, tol)
    lhs = -2.0 * sphere_area(n - 2) * sphere_area(n - 3) * c.series_sum / (n - 2)
    return abs(lhs - c.kappa)


# ---------------------------------------------------------------------------
# Taylor data for one direction
# ---------------------------------------------------------------------------

def _section_values(body, xi, ts, rules: Rules, analytic: bool | None):
    use = rules.analytic_sections if analytic is None else analytic
    return section_areas(
        body, xi, ts,
        rule=rules.section_level,
        scan_points=rules.scan_points,
        bisect_steps=rules.bisect_steps,
        analytic=use,
    )


def _support_estimate(body, xi, rules: Rules) -> float:
    """Best estimate of the support half-width (the bound with margin removed)."""
    return support_bound(body, xi, level=rules.support_level) / 1.02


def _stencil_ts(max_order: int, h: float) -> np.ndarray:
    jmax = 2 * (max_order // 2 + 2)
    return h * np.arange(jmax + 1)


def _derivative_estimates(body, xi, orders, w, rules, analytic, values=None, ts=None):
    """Even-derivative estimates at 0 for the given orders from one stencil grid."""
    if not orders:
        return {}
    h = rules.t_margin * w / (rules.profile_points - 1)
    grid = _stencil_ts(max(orders), h)
    if values is None:
        values = _section_values(body, xi, grid, rules, analytic)
    prof = SectionProfile(xi=xi, ts=grid, values=values, support=w)
    return {m: even_derivative_at_zero(prof, m) for m in orders}


# ---------------------------------------------------------------------------
# the regularized odd-n functional
# ---------------------------------------------------------------------------

def _panel_breaks(delta: float, w: float, T: float) -> np.ndarray:
    # after the Taylor subtraction the integrand is as smooth as A itself,
    # so panels only need to isolate the support kink near t = w
    cand = np.array([delta, 0.75 * w, 0.95 * w, w, T])
    cand = np.clip(cand, delta, T)
    return np.unique(cand)


def _quad_nodes(breaks: np.ndarray, m: int):
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0:
            continue
        g = gauss_rule(m, float(a), float(b))
        nodes.append(g.nodes)
        weights.append(g.weights)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def _regularized_integral(eval_sub, cont_value, n, delta, T, breaks, m_gauss):
    """Three-piece value of int_0^inf t^(1-n) (A - T_poly) dt.

    ``eval_sub`` evaluates the subtracted integrand t^(1-n)(A(t) - P(t)) on
    arrays of t > 0; ``cont_value`` is its continuous extension at t = 0.
    The closed-form tail beyond T must be added by the caller.
    """
    g = eval_sub(np.array([0.5 * delta, delta]))
    head = delta / 6.0 * (cont_value + 4.0 * g[0] + g[1])
    ts, ws = _quad_nodes(breaks, m_gauss)
    mid = float(np.dot(ws, eval_sub(ts))) if ts.size else 0.0
    return head + mid


def _tail_moment(coeffs: dict[int, float], n: int, T: float) -> float:
    """- sum_k c_2k T^(2k - n + 2) / (n - 2 - 2k) for the vanishing-A region."""
    total = 0.0
    for two_k, c in coeffs.items():
        total -= c * T ** (two_k - n + 2) / (n - 2 - two_k)
    return total


def odd_functional(
    body: StarBody,
    xi,
    rules: Rules | None = None,
    split: tuple[float, float] | None = None,
    analytic: bool | None = None,
) -> float:
    """Regularized section integral J(xi) for odd-dimensional inversion.

    ``split`` overrides (delta, T); T must cover the section support.
    """
    n = body.dim
    if n % 2 == 0:
        raise ValueError(f"the regularized functional needs odd n, got n = {n}")
    rules = rules or default_rules(n)
    xi = as_direction(xi, n)
    w = _support_estimate(body, xi, rules)
    if split is not None:
        delta, T = float(split[0]), float(split[1])
        if not 0.0 < delta < T:
            raise ValueError(f"need 0 < delta < T, got ({delta}, {T})")
        if T < w * (1.0 - 1e-9):
            raise ValueError(f"T = {T} does not cover the section support {w}")
    else:
        delta, T = rules.delta_frac * w, rules.t_margin * w

    sub_orders = list(range(2, n - 2, 2))
    cont_order = n - 1
    h = rules.t_margin * w / (rules.profile_points - 1)
    stencil = _stencil_ts(cont_order, h)
    quad_ts, quad_ws = _quad_nodes(_panel_breaks(delta, w, T), rules.gauss_nodes)
    head_ts = np.array([0.5 * delta, delta])

    all_ts = np.concatenate([stencil, quad_ts, head_ts])
    all_vals = _section_values(body, xi, all_ts, rules, analytic)
    m = stencil.size
    stencil_vals = all_vals[:m]
    quad_vals = all_vals[m : m + quad_ts.size]
    head_vals = all_vals[m + quad_ts.size :]

    prof = SectionProfile(xi=xi, ts=stencil, values=stencil_vals, support=w)
    coeffs = {0: float(stencil_vals[0])}
    for order in sub_orders:
        coeffs[order] = even_derivative_at_zero(prof, order).value / math.factorial(order)
    cont = even_derivative_at_zero(prof, cont_order).value / math.factorial(cont_order)

    def poly(ts):
        acc = np.zeros_like(ts)
        for two_k, c in coeffs.items():
            acc += c * ts**two_k
        return acc

    def sub_from(values, ts):
        return ts ** (1 - n) * (values - poly(ts))

    g_head = sub_from(head_vals, head_ts)
    head = delta / 6.0 * (cont + 4.0 * g_head[0] + g_head[1])
    mid = float(np.dot(quad_ws, sub_from(quad_vals, quad_ts))) if quad_ts.size else 0.0
    return head + mid + _tail_moment(coeffs, n, T)


def even_derivative_field(
    body: StarBody,
    grid,
    rules: Rules | None = None,
    analytic: bool | None = None,
) -> np.ndarray:
    """A_xi^(n-2)(0) for every direction of ``grid`` (even n only)."""
    n = body.dim
    if n % 2 != 0:
        raise ValueError(f"the derivative field needs even n, got n = {n}")
    rules = rules or default_rules(n)
    grid = np.asarray(grid, dtype=float)
    out = np.empty(grid.shape[0])
    for i, xi in enumerate(grid):
        xi = as_direction(xi, n)
        w = _support_estimate(body, xi, rules)
        est = _derivative_estimates(body, xi, [n - 2], w, rules, analytic)
        out[i] = est[n - 2].value
    return out


# ---------------------------------------------------------------------------
# Gaussian cross-check of the odd-n constant
# ---------------------------------------------------------------------------

def gaussian_crosscheck(
    n: int,
    rules: Rules | None = None,
    scale: float = 1.0,
    x_nodes: int = 160,
) -> float:
    """Run the regularized-integral machinery on the profile exp(-(scale x)^2).

    With Phi = G the transformed object is F(t) = int_t^inf
    (r^2 - t^2)^((n-2)/2) G'(r) dr, and the regularized integral of F equals
    G(0) * S_n independently of the profile, so the returned value is an
    implied S_n to compare against the series sum.
    """
    if n % 2 == 0:
        raise ValueError("the cross-check applies to odd n")
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    scale = float(scale)
    if scale <= 0:
        raise ValueError("scale must be positive")
    rules = rules or default_rules(max(3, min(n, 8)))

    X = 7.5 / scale
    gx = gauss_rule(x_nodes, 0.0, X)

    def g_prime(r):
        return -2.0 * scale * scale * r * np.exp(-((scale * r) ** 2))

    def F(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        r = np.sqrt(ts[:, None] ** 2 + gx.nodes[None, :] ** 2)
        integrand = gx.nodes[None, :] ** (n - 2) * g_prime(r) * gx.nodes[None, :] / r
        return integrand @ gx.weights

    delta = 0.05 / scale
    T = X
    h = 0.01 / scale
    cont_order = n - 1
    stencil = _stencil_ts(cont_order, h)
    prof = SectionProfile(xi=np.zeros(n), ts=stencil, values=F(stencil), support=T)
    coeffs = {0: float(prof.values[0])}
    for order in range(2, n - 2, 2):
        coeffs[order] = even_derivative_at_zero(prof, order).value / math.factorial(order)
    cont = even_derivative_at_zero(prof, cont_order).value / math.factorial(cont_order)

    def poly(ts):
        acc = np.zeros_like(ts)
        for two_k, c in coeffs.items():
            acc += c * ts**two_k
        return acc

    def eval_sub(ts):
        return ts ** (1 - n) * (F(ts) - poly(ts))

    breaks = np.unique(
        np.concatenate([[delta], np.array([0.5, 1.0, 2.0, 4.0]) / scale, [T]])
    )
    value = _regularized_integral(eval_sub, cont, n, delta, T, breaks, 48)
    value += _tail_moment(coeffs, n, T)
    return value  # implied S_n; G(0) = 1 so no normalization is needed


# ---------------------------------------------------------------------------
# field evaluation with symmetry shortcuts
# ---------------------------------------------------------------------------

class FieldEvaluator:
    """Evaluates the pre-transform inversion field at arbitrary directions.

    The raw field is A^(n-2)(0) for even n and J for odd n.  Bodies with
    rotational structure collapse to one-dimensional profiles: constants for
    balls, functions of <xi, axis> for zonal bodies and functions of the
    width w(xi) for ellipsoids.  Those profiles are sampled once and spline
    interpolated, which is what makes dense output grids affordable.
    """

    def __init__(self, body: StarBody, rules: Rules | None = None,
                 analytic: bool | None = None):
        self.body = body
        self.rules = (rules or default_rules(body.dim)).validate()
        self.analytic = analytic
        self.n = body.dim
        self._cache: dict = {}
        mode = body.symmetry if self.rules.use_symmetry else "generic"
        self.mode = mode
        if mode == "isotropic":
            e1 = np.zeros(self.n)
            e1[0] = 1.0
            self._const = self._raw_one(e1)
        elif mode == "zonal":
            self._spline = self._build_zonal_spline()
        elif mode == "ellipsoidal":
            self._spline, self._w_range = self._build_width_spline()
        elif mode != "generic":
            raise ValueError(f"unknown symmetry tag {mode!r}")

    def _raw_one(self, xi: np.ndarray) -> float:
        if self.n % 2 == 0:
            w = _support_estimate(self.body, xi, self.rules)
            est = _derivative_estimates(
                self.body, xi, [self.n - 2], w, self.rules, self.analytic
            )
            return est[self.n - 2].value
        return odd_functional(self.body, xi, self.rules, analytic=self.analytic)

    def _build_zonal_spline(self):
        a = self.body.axis
        b = orthonormal_complement(a).basis[0]
        cs = np.linspace(0.0, 1.0, self.rules.spline_samples)
        vals = np.empty_like(cs)
        for i, c in enumerate(cs):
            xi = c * a + math.sqrt(max(0.0, 1.0 - c * c)) * b
            xi /= np.linalg.norm(xi)
            vals[i] = self._raw_one(xi)
        full_c = np.concatenate([-cs[::-1], cs[1:]])
        full_v = np.concatenate([vals[::-1], vals[1:]])
        return CubicSpline(full_c, full_v)

    def _build_width_spline(self):
        axes = self.body.axes
        i_min, i_max = int(np.argmin(axes)), int(np.argmax(axes))
        a_min, a_max = float(axes[i_min]), float(axes[i_max])
        if a_max - a_min < 1e-12:
            e1 = np.zeros(self.n)
            e1[0] = 1.0
            const = self._raw_one(e1)
            return (lambda w: np.full(np.shape(w), const)), (a_min, a_max)
        ws = np.linspace(a_min, a_max, self.rules.spline_samples)
        frac = np.clip((ws**2 - a_min**2) / (a_max**2 - a_min**2), 0.0, 1.0)
        phis = np.arcsin(np.sqrt(frac))
        vals = np.empty_like(ws)
        for i, phi in enumerate(phis):
            xi = np.zeros(self.n)
            xi[i_min] = math.cos(phi)
            xi[i_max] = math.sin(phi)
            vals[i] = self._raw_one(xi)
        return CubicSpline(ws, vals), (a_min, a_max)

    def __call__(self, dirs) -> np.ndarray:
        dirs = np.asarray(dirs, dtype=float)
        if dirs.ndim == 1:
            dirs = dirs[None, :]
        if self.mode == "isotropic":
            return np.full(dirs.shape[0], self._const)
        if self.mode == "zonal":
            c = np.clip(dirs @ self.body.axis, -1.0, 1.0)
            return np.asarray(self._spline(c), dtype=float)
        if self.mode == "ellipsoidal":
            w = np.sqrt(((dirs * self.body.axes[None, :]) ** 2).sum(axis=1))
            w = np.clip(w, self._w_range[0], self._w_range[1])
            return np.asarray(self._spline(w), dtype=float)
        out = np.empty(dirs.shape[0])
        for i, xi in enumerate(dirs):
            key = tuple(np.round(xi, 12))
            if key not in self._cache:
                self._cache[key] = self._raw_one(np.asarray(xi))
            out[i] = self._cache[key]
        return out


# ---------------------------------------------------------------------------
# the inverse transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InverseRadonField:
    """Inverse-transform estimates over a direction grid.

    ``inverse`` estimates R^(-1) rho (the raw field divided by kappa_n);
    ``values`` is s_(n-2) * inverse, the ball-normalized variant whose sign
    structure matches ``inverse`` and which equals 1 identically for the
    unit ball.  ``rho_hat`` re-applies the transform to the field and should
    reproduce the radial function; its largest deviation from rho is the
    roundtrip error.
    """

    grid: np.ndarray
    method: str
    inverse: np.ndarray
    values: np.ndarray
    rho_true: np.ndarray
    min_value: float
    argmin: np.ndarray
    rho_hat: np.ndarray | None = None
    max_abs_err: float | None = None

    def summary(self) -> dict:
        out = {
            "method": self.method,
            "directions": int(self.grid.shape[0]),
            "min_value": float(self.min_value),
            "argmin": [float(v) for v in self.argmin],
        }
        if self.rho_hat is not None:
            out["max_abs_err"] = float(self.max_abs_err)
            out["max_rel_err"] = float(
                np.max(np.abs(self.rho_hat - self.rho_true) / np.abs(self.rho_true))
            )
            out["rho_hat_min"] = float(self.rho_hat.min())
            out["rho_hat_max"] = float(self.rho_hat.max())
        return out


def direction_grid(n: int, level: int) -> np.ndarray:
    """Default output grid: the nodes of a product rule on S^(n-1)."""
    return sphere_rule(n - 1, level).nodes


def inverse_radon(
    body: StarBody,
    grid=None,
    rules: Rules | None = None,
    roundtrip: bool = True,
    analytic: bool | None = None,
) -> InverseRadonField:
    """Estimate rho and R^(-1) rho from section data over a direction grid."""
    n = body.dim
    rules = rules or default_rules(n)
    if grid is None:
        grid = direction_grid(n, rules.grid_level)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("direction grid must be nonempty")

    ev = FieldEvaluator(body, rules, analytic)
    kap = kappa(n)
    s_sub = sphere_area(n - 2)
    inverse = ev(grid) / kap
    values = s_sub * inverse

    rho_hat = None
    max_err = None
    if roundtrip:
        base_rule = sphere_rule(n - 2, rules.radon_level)
        rho_hat = np.empty(grid.shape[0])
        for i, e in enumerate(grid):
            emb = embed_rule(base_rule, orthonormal_complement(as_direction(e)))
            rho_hat[i] = float(np.dot(emb.weights, ev(emb.nodes))) / kap
    rho_true = np.asarray(body.radial(grid), dtype=float)
    if roundtrip:
        max_err = float(np.abs(rho_hat - rho_true).max())

    imin = int(np.argmin(values))
    return InverseRadonField(
        grid=grid,
        method="even" if n % 2 == 0 else "odd",
        inverse=inverse,
        values=values,
        rho_true=rho_true,
        min_value=float(values[imin]),
        argmin=grid[imin].copy(),
        rho_hat=rho_hat,
        max_abs_err=max_err,
    )
