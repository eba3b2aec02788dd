"""Convex bodies stored as support functions.

Two representations:

* :class:`GridBody` (n = 3): band-limited support function on a
  :class:`SphereGrid`, with restricted Hessians from analytic derivatives of
  the harmonic basis.
* :class:`ZonalBody` (any n >= 3): body of revolution about ``e = e_n`` with
  support profile ``g``, ``h(u) = g(u . e)``.  Its restricted Hessian has
  eigenvalues ``mu = g - t g'`` (multiplicity n-2) and
  ``nu = mu + (1 - t^2) g''``.

Bodies are validated at construction (positive support function, PSD
restricted Hessian up to a relative tolerance) and immutable afterwards.
"""
from __future__ import annotations

import json
from functools import cached_property
from math import comb

import numpy as np

from .errors import NotConvex, NotPositive, RepresentationMismatch
from .harmonics import (HarmonicExpansion, SphereGrid, analyze, ball_volume, gauss_legendre,
                        gegenbauer_rule, sphere_area, synthesize, tangent_frame,
                        to_spherical, zonal_multipliers)
from .harmonics import sphere as _sph
from .profiles import (ExpansionProfile, PolynomialProfile, Profile, ScaledProfile,
                       SplineProfile, SumProfile, constant_profile)

DEFAULT_KMAX = 48
TOL_PSD = 1e-9
ALIAS_TOL = 1e-10
FORMAT = 1


# --- restricted Hessians ------------------------------------------------------

def grid_hessian(expansion: HarmonicExpansion, grid: SphereGrid):
    """``(H_tt, H_tp, H_pp, h)`` of ``D^2 f`` in the frame ``(e_theta, e_phi)``.

    ``D^2 f = nabla^2_S f + f Id`` on the tangent plane, written in spherical
    coordinates with exact basis derivatives.
    """
    syn = lambda a, b: synthesize(expansion, grid, a, b)  # noqa: E731
    h = syn(0, 0)
    s = grid.sin_theta[:, None]
    cot = grid.x[:, None] / s
    h_t, h_p = syn(1, 0), syn(0, 1)
    htt = syn(2, 0) + h
    htp = (syn(1, 1) - cot * h_p) / s
    hpp = syn(0, 2) / s ** 2 + cot * h_t + h
    return htt, htp, hpp, h


def _sym2_eigs(a, b, c):
    m = 0.5 * (a + c)
    d = np.hypot(0.5 * (a - c), b)
    return m - d, m + d


def hessian_at(expansion: HarmonicExpansion, points) -> np.ndarray:
    """Ambient 3x3 form of ``D^2 f`` at unit vectors away from the poles.

    ``H = H_tt e_t e_t^T + H_tp (e_t e_p^T + e_p e_t^T) + H_pp e_p e_p^T``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    theta, phi = to_spherical(pts)
    L, c = expansion.max_degree, expansion.coefficients
    ev = lambda a, b: _sph.evaluate_at(c, theta, phi, L, a, b)  # noqa: E731
    s, cot = np.sin(theta), np.cos(theta) / np.sin(theta)
    h = ev(0, 0)
    htt = ev(2, 0) + h
    htp = (ev(1, 1) - cot * ev(0, 1)) / s
    hpp = ev(0, 2) / s ** 2 + cot * ev(1, 0) + h
    et, ep = tangent_frame(theta, phi)
    out = (htt[:, None, None] * et[:, :, None] * et[:, None, :]
           + htp[:, None, None] * (et[:, :, None] * ep[:, None, :] + ep[:, :, None] * et[:, None, :])
           + hpp[:, None, None] * ep[:, :, None] * ep[:, None, :])
    return out.reshape(np.shape(points)[:-1] + (3, 3))


def zonal_eigenvalues(g, g1, g2, t):
    """Lemma-type closed form: ``(mu, nu)`` of ``D^2 h`` for ``h(u) = g(u . e)``."""
    t = np.asarray(t, dtype=float)
    mu = g - t * g1
    return mu, mu + (1.0 - t * t) * g2


def _check_psd(lo, hi, where_fn, tol=TOL_PSD, exc=NotConvex):
    scale = max(float(np.max(hi)), 0.0)
    worst = int(np.argmin(lo))
    if lo.flat[worst] < -tol * scale or (scale == 0.0 and lo.flat[worst] < 0):
        raise exc(float(lo.flat[worst]), where_fn(worst))
    return float(lo.flat[worst])


# --- bodies ---------------------------------------------------------------------

class Body:
    dim_n: int
    max_degree: int
    kind: str
    min_eigenvalue: float

    def check_compatible(self, other: "Body"):
        if self.kind != other.kind or self.dim_n != other.dim_n:
            raise RepresentationMismatch(f"cannot compare {self.kind} n={self.dim_n} "
                                         f"with {other.kind} n={other.dim_n}")


class GridBody(Body):
    """Band-limited support function on an n = 3 sphere grid."""

    kind = "grid"
    dim_n = 3

    def __init__(self, expansion: HarmonicExpansion, grid: SphereGrid, tol_psd=TOL_PSD,
                 validate=True, _exc=NotConvex):
        if expansion.is_zonal or expansion.dim_n != 3:
            raise RepresentationMismatch("grid bodies need an n=3 grid expansion")
        if expansion.max_degree > grid.max_resolved_degree:
            raise ValueError("grid too coarse for the band limit")
        self.expansion = expansion
        self.grid = grid
        self.max_degree = expansion.max_degree
        htt, htp, hpp, h = grid_hessian(expansion, grid)
        for a in (htt, htp, hpp, h):
            a.setflags(write=False)
        self.values = h
        self.hessian = (htt, htp, hpp)
        lo, hi = _sym2_eigs(htt, htp, hpp)
        self.eigenvalues = (lo, hi)
        if validate:
            if np.min(h) <= 0:
                i = int(np.argmin(h))
                raise NotPositive(f"support function {h.flat[i]:.3e} <= 0 at node "
                                  f"{np.unravel_index(i, grid.shape)}")
            self.min_eigenvalue = _check_psd(
                lo, hi, lambda i: tuple(grid.points.reshape(-1, 3)[i]), tol_psd, _exc)
        else:
            self.min_eigenvalue = float(lo.min())

    @property
    def support_l2(self) -> float:
        return self.expansion.l2_norm()

    def integrate(self, values) -> float:
        return self.grid.integrate(values)

    def mean(self) -> float:
        return self.expansion.mean()

    def hessian_matrices(self) -> np.ndarray:
        """Stacked 2x2 restricted Hessians, shape ``grid.shape + (2, 2)``."""
        htt, htp, hpp = self.hessian
        return np.stack([np.stack([htt, htp], -1), np.stack([htp, hpp], -1)], -2)

    def scaled(self, lam: float) -> "GridBody":
        return GridBody(self.expansion * lam, self.grid)

    def __repr__(self):
        return f"GridBody(K={self.max_degree}, grid={self.grid.shape})"


class ZonalBody(Body):
    """Body of revolution in R^n with support profile ``g``."""

    kind = "zonal"

    def __init__(self, dim_n: int, profile: Profile, max_degree: int = DEFAULT_KMAX,
                 tol_psd=TOL_PSD, validate=True, t_nodes=None, _exc=NotConvex):
        if dim_n < 3:
            raise ValueError("dimension must be >= 3")
        self.dim_n = int(dim_n)
        self.profile = profile
        self.max_degree = int(max_degree)
        if t_nodes is None:
            t_nodes = np.sort(gauss_legendre(2 * max(self.max_degree, 2))[0])[::-1]
        self.t_nodes = np.asarray(t_nodes, dtype=float)
        # exact for s_{n-1} * P_k up to degree K, so area densities analyse cleanly
        self.rule = gegenbauer_rule(dim_n, dim_n * self.max_degree + 8, profile.breakpoints)
        g, g1, g2 = profile.samples(self.rule.nodes)
        self.mu, self.nu = zonal_eigenvalues(g, g1, g2, self.rule.nodes)
        self.values = g
        if validate:
            scan = np.concatenate([self.rule.nodes, self.t_nodes, np.linspace(-1, 1, 2001)])
            sg, s1, s2 = profile.samples(scan)
            if np.min(sg) <= 0:
                i = int(np.argmin(sg))
                raise NotPositive(f"profile {sg[i]:.3e} <= 0 at t={scan[i]:.6f}")
            mu, nu = zonal_eigenvalues(sg, s1, s2, scan)
            lo, hi = np.minimum(mu, nu), np.maximum(mu, nu)
            self.min_eigenvalue = _check_psd(lo, hi, lambda i: float(scan[i]), tol_psd, _exc)
        else:
            self.min_eigenvalue = float(min(self.mu.min(), self.nu.min()))

    @cached_property
    def expansion(self) -> HarmonicExpansion:
        a = zonal_multipliers(self.dim_n, self.profile, self.max_degree, self.rule)
        return HarmonicExpansion(self.dim_n, self.max_degree, a, "zonal")

    def integrate(self, values) -> float:
        """Sphere integral of a zonal function sampled at ``rule.nodes``."""
        return self.rule.sphere_integral(values)

    def mean(self) -> float:
        return self.integrate(self.values) / sphere_area(self.dim_n)

    def support_at(self, t):
        return self.profile.value(t)

    def scaled(self, lam: float) -> "ZonalBody":
        return ZonalBody(self.dim_n, ScaledProfile(self.profile, lam), self.max_degree,
                         t_nodes=self.t_nodes)

    def __repr__(self):
        return f"ZonalBody(n={self.dim_n}, K={self.max_degree}, profile={self.profile!r})"


# --- constructors ---------------------------------------------------------------

def make_zonal_body(n: int, g, max_degree: int = DEFAULT_KMAX, **kw) -> ZonalBody:
    """Body of revolution from a profile, a sequence of ``P_k^n`` coefficients,
    or a zonal :class:`HarmonicExpansion`."""
    if isinstance(g, HarmonicExpansion):
        g = ExpansionProfile(g)
    elif not isinstance(g, Profile):
        from .profiles import gegenbauer_profile
        g = gegenbauer_profile(n, g)
    return ZonalBody(n, g, max_degree, **kw)


def make_grid_body(values, grid: SphereGrid | None = None, max_degree: int = DEFAULT_KMAX,
                   alias_tol: float | None = ALIAS_TOL, **kw) -> GridBody:
    """Body from support-function samples on ``grid`` (default: the grid for ``max_degree``)."""
    values = np.asarray(values, dtype=float)
    if grid is None:
        grid = SphereGrid.for_degree(max_degree)
    if values.shape != grid.shape:
        raise ValueError(f"samples of shape {values.shape} do not match grid {grid.shape}")
    return GridBody(analyze(values, grid, max_degree, alias_tol), grid, **kw)


def grid_body_from_expansion(expansion: HarmonicExpansion, grid: SphereGrid | None = None,
                             **kw) -> GridBody:
    if grid is None:
        grid = SphereGrid.for_degree(max(expansion.max_degree, 2))
    return GridBody(expansion, grid, **kw)


def grid_body_from_function(func, grid: SphereGrid | None = None,
                            max_degree: int = DEFAULT_KMAX, **kw) -> GridBody:
    """Sample ``func(points)`` (points of shape ``(..., 3)``) and build a grid body."""
    grid = grid or SphereGrid.for_degree(max_degree)
    return make_grid_body(func(grid.points), grid, max_degree, **kw)


def grid_body_from_profile(profile: Profile, grid: SphereGrid | None = None,
                           max_degree: int = DEFAULT_KMAX, axis=(0.0, 0.0, 1.0), **kw) -> GridBody:
    """Realise a zonal profile about ``axis`` on the n = 3 grid."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return grid_body_from_function(lambda p: profile.value(np.clip(p @ axis, -1, 1)),
                                   grid, max_degree, **kw)


def ball(radius: float = 1.0, n: int = 3, kind: str = "grid",
         max_degree: int = DEFAULT_KMAX, grid: SphereGrid | None = None) -> Body:
    if kind == "zonal":
        return ZonalBody(n, constant_profile(radius), max_degree)
    if n != 3:
        raise RepresentationMismatch("grid bodies exist only for n = 3")
    grid = grid or SphereGrid.for_degree(max_degree)
    # exact expansion: analysing constant samples would add quadrature noise
    c = np.zeros(_sph.n_coefficients(max_degree))
    c[0] = radius * np.sqrt(4.0 * np.pi)
    return GridBody(HarmonicExpansion(3, max_degree, c), grid)


def harmonic_perturbation(terms, max_degree: int = DEFAULT_KMAX,
                          grid: SphereGrid | None = None, radius: float = 1.0) -> GridBody:
    """``radius + sum c * Y_{l,m}`` for ``terms = {(l, m): c}`` (real orthonormal basis)."""
    exp = HarmonicExpansion.zeros(3, max_degree)
    c = np.array(exp.coefficients)
    c[0] = radius * np.sqrt(4.0 * np.pi)
    for (l, m), v in terms.items():
        c[_sph.index(l, m)] += v
    return grid_body_from_expansion(HarmonicExpansion(3, max_degree, c),
                                    grid or SphereGrid.for_degree(max_degree))


# --- transformations --------------------------------------------------------------

def minkowski_sum(K: Body, L: Body) -> Body:
    K.check_compatible(L)
    if isinstance(K, GridBody):
        if not K.grid.same_as(L.grid):
            raise RepresentationMismatch("bodies live on different grids")
        return GridBody(K.expansion + L.expansion, K.grid)
    return ZonalBody(K.dim_n, SumProfile([K.profile, L.profile]),
                     max(K.max_degree, L.max_degree), t_nodes=K.t_nodes)


def scale(K: Body, lam: float) -> Body:
    if lam <= 0:
        raise ValueError("scale must be positive")
    return K.scaled(lam)


def translate(K: Body, y) -> Body:
    """``K + y``: adds the linear function ``u . y`` to the support function.

    Zonal bodies accept a scalar (translation along the axis).
    """
    if isinstance(K, ZonalBody):
        return ZonalBody(K.dim_n, SumProfile([K.profile, PolynomialProfile([0.0, float(y)])]),
                         K.max_degree, t_nodes=K.t_nodes)
    y = np.asarray(y, dtype=float)
    lin = HarmonicExpansion.zeros(3, K.max_degree)
    c = np.array(lin.coefficients)
    # u_x, u_y, u_z in the real basis: sqrt(4 pi / 3) * (Y_11, Y_1-1, Y_10)
    f = np.sqrt(4.0 * np.pi / 3.0)
    c[_sph.index(1, 1)], c[_sph.index(1, -1)], c[_sph.index(1, 0)] = f * y[0], f * y[1], f * y[2]
    return GridBody(K.expansion + HarmonicExpansion(3, K.max_degree, c), K.grid)


def rotate(K: GridBody, R) -> GridBody:
    """``R K`` for a rotation matrix ``R``: ``h_{RK}(u) = h_K(R^T u)``."""
    R = np.asarray(R, dtype=float)
    pts = K.grid.points.reshape(-1, 3) @ R  # rows are R^T u
    vals = np.empty(pts.shape[0])
    theta, phi = to_spherical(pts)
    for s in range(0, pts.shape[0], 4096):
        vals[s:s + 4096] = _sph.evaluate_at(K.expansion.coefficients, theta[s:s + 4096],
                                            phi[s:s + 4096], K.max_degree)
    return make_grid_body(vals.reshape(K.grid.shape), K.grid, K.max_degree, alias_tol=None)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    from scipy.spatial.transform import Rotation
    return Rotation.random(random_state=rng).as_matrix()


# --- metrics -------------------------------------------------------------------------

def _zonal_pair_rule(K: ZonalBody, L: ZonalBody):
    deg = max(K.rule.design_degree, L.rule.design_degree)
    return gegenbauer_rule(K.dim_n, deg, tuple(K.profile.breakpoints) + tuple(L.profile.breakpoints))


def support_difference(K: Body, L: Body):
    """``h_K - h_L`` at the sup-norm nodes (grid nodes, or the polar nodes ``t_nodes``)."""
    K.check_compatible(L)
    if isinstance(K, GridBody):
        if not K.grid.same_as(L.grid):
            raise RepresentationMismatch("bodies live on different grids")
        return K.values - L.values
    t = np.union1d(K.t_nodes, L.t_nodes)
    return K.profile.value(t) - L.profile.value(t)


def hausdorff_distance(K: Body, L: Body) -> float:
    """Grid approximation of ``||h_K - h_L||_inf`` (max over the sample nodes)."""
    return float(np.max(np.abs(support_difference(K, L))))


def lp_distance(K: Body, L: Body, p: float = 2.0) -> float:
    """``(int |h_K - h_L|^p)^{1/p}`` by quadrature."""
    if p < 1:
        raise ValueError("p must be >= 1")
    K.check_compatible(L)
    if isinstance(K, GridBody):
        if not K.grid.same_as(L.grid):
            raise RepresentationMismatch("bodies live on different grids")
        d = np.abs(K.values - L.values)
        return float(K.grid.integrate(d ** p) ** (1.0 / p))
    rule = _zonal_pair_rule(K, L)
    d = np.abs(K.profile.value(rule.nodes) - L.profile.value(rule.nodes))
    return float(rule.sphere_integral(d ** p) ** (1.0 / p))


def mean_width(K: Body) -> float:
    """``w(K) = 2 pi_0 h_K``."""
    return 2.0 * K.mean()


def intrinsic_volume(K: Body, i: int, method: str = "density") -> float:
    """``V_i(K)``.

    ``method="density"``: ``C(n,i)/kappa_{n-i} * (1/n) int s_i(K, u) du`` (i < n).
    ``method="support"``: ``C(n,i)/kappa_{n-i} * (1/n) int h_K s_{i-1}(K, u) du`` (i >= 1).
    """
    from .discriminant import area_density
    n = K.dim_n
    c = comb(n, i) / ball_volume(n - i) / n
    if method == "density":
        if not 1 <= i <= n - 1:
            raise ValueError("density route needs 1 <= i <= n-1")
        return c * area_density(K, i).mass
    if method == "support":
        if not 1 <= i <= n:
            raise ValueError("support route needs 1 <= i <= n")
        if i == 1:
            return c * K.integrate(K.values)
        s = area_density(K, i - 1)
        return c * K.integrate(K.values * s.values)
    raise ValueError(f"unknown method {method!r}")


def tv_distance(f, g) -> float:
    """Total variation distance ``(1/2) int |f - g|`` of two area densities."""
    if f.degree != g.degree or f.dim_n != g.dim_n:
        raise RepresentationMismatch("densities of different degree or dimension")
    if f.values.shape != g.values.shape:
        raise RepresentationMismatch("densities sampled on different nodes")
    return 0.5 * float(np.sum(f.weights * np.abs(f.values - g.values)))


# --- serialisation -----------------------------------------------------------------------

def to_json(K: Body) -> str:
    """Versioned JSON description of a body."""
    doc = {"format": FORMAT, "dim_n": K.dim_n, "rep_kind": K.kind, "K_max": K.max_degree}
    if isinstance(K, GridBody):
        doc["grid"] = list(K.grid.shape)
        doc["coefficients"] = K.expansion.coefficients.tolist()
    elif isinstance(K.profile, ExpansionProfile) and K.profile.order == 0:
        doc["coefficients"] = K.profile.expansion.coefficients.tolist()
    else:
        t = np.unique(np.concatenate([np.cos(np.linspace(np.pi, 0.0, 513)),
                                      np.asarray(K.profile.breakpoints, dtype=float)]))
        g, g1, g2 = K.profile.samples(t)
        doc["profile"] = {"t": t.tolist(), "g": np.asarray(g).tolist(),
                          "g1": np.asarray(g1).tolist(), "g2": np.asarray(g2).tolist()}
    return json.dumps(doc)


def from_json(text: str) -> Body:
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ValueError(f"unsupported body format {doc.get('format')!r}")
    n, kmax = int(doc["dim_n"]), int(doc["K_max"])
    if doc["rep_kind"] == "grid":
        grid = SphereGrid(*doc["grid"]) if "grid" in doc else SphereGrid.for_degree(kmax)
        return GridBody(HarmonicExpansion(3, kmax, np.array(doc["coefficients"])), grid)
    if doc["rep_kind"] != "zonal":
        raise ValueError(f"unknown rep_kind {doc['rep_kind']!r}")
    if "coefficients" in doc:
        exp = HarmonicExpansion(n, kmax, np.array(doc["coefficients"]), "zonal")
        return ZonalBody(n, ExpansionProfile(exp), kmax)
    p = doc["profile"]
    prof = SplineProfile.from_samples(np.array(p["t"]), np.array(p["g"]),
                                      np.array(p["g1"]), np.array(p["g2"]))
    return ZonalBody(n, prof, kmax)


# --- test bodies ---------------------------------------------------------------------------

def ellipsoid_body(axes, R=None, max_degree: int = DEFAULT_KMAX,
                   grid: SphereGrid | None = None) -> GridBody:
    """``R diag(axes) B``: support function ``sqrt(u^T R diag(axes^2) R^T u)``."""
    R = np.eye(3) if R is None else np.asarray(R, dtype=float)
    A = R @ np.diag(np.asarray(axes, dtype=float) ** 2) @ R.T
    return grid_body_from_function(lambda p: np.sqrt(np.einsum("...i,ij,...j->...", p, A, p)),
                                   grid, max_degree)


def random_body(rng: np.random.Generator, max_degree: int = DEFAULT_KMAX,
                grid: SphereGrid | None = None, degree: int = 6,
                amplitude: float = 0.05) -> GridBody:
    """Random smooth convex body: rotated ellipsoid, plus a band-limited bump, translated.

    The bump amplitude is halved until the sum passes validation.
    """
    grid = grid or SphereGrid.for_degree(max_degree)
    E = ellipsoid_body(rng.uniform(0.8, 1.25, size=3), random_rotation(rng), max_degree, grid)
    bump = rng.normal(size=_sph.n_coefficients(degree))
    bump[:4] = 0.0
    bump *= amplitude / np.linalg.norm(bump) * np.sqrt(4 * np.pi)
    shift = rng.normal(size=3) * 0.2
    shift *= min(1.0, 0.4 / max(np.linalg.norm(shift), 1e-300))
    for _ in range(30):
        try:
            K = GridBody(E.expansion + HarmonicExpansion(3, degree, bump), grid)
            return translate(K, shift)
        except NotConvex:
            bump = bump / 2
    return translate(E, shift)
