"""Zonal kernels, Funk-Hecke convolution and the valuations ``h_{Phi_i K} = s_i(K) * f``."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .body import (DEFAULT_KMAX, TOL_PSD, Body, GridBody, ZonalBody, grid_hessian,
                   zonal_eigenvalues)
from .discriminant import AreaDensity, area_density, box_multipliers, mixed_discriminant
from .errors import (HypothesisError, ImageNotConvex, NotConvex, RepresentationMismatch,
                     ZeroMass)
from .harmonics import HarmonicExpansion, SphereGrid, gegenbauer_rule, synthesize, zonal_multipliers
from .profiles import (ExpansionProfile, Profile, SplineProfile, abs_profile,
                       ellipsoid_profile)

FORMAT = 1
PARITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Kernel:
    """Zonal generating function with its normalised multiplier table.

    ``multipliers[k] = a_k^n[g] / a_0^n[g]``; ``raw_a0 = a_0^n[g]`` is the
    integral of ``g`` over the sphere.
    """

    dim_n: int
    multipliers: np.ndarray
    raw_a0: float
    profile: Profile | None = None
    even: bool = False
    smoothness: float = math.inf
    name: str = "kernel"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.multipliers, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "multipliers", m)

    @property
    def max_degree(self) -> int:
        return self.multipliers.size - 1

    @property
    def raw_multipliers(self) -> np.ndarray:
        return self.multipliers * self.raw_a0

    def table(self, kmax: int) -> np.ndarray:
        if kmax > self.max_degree:
            raise ValueError(f"kernel tabulated to degree {self.max_degree}, need {kmax}")
        return self.multipliers[: kmax + 1]

    def to_json(self) -> str:
        doc = {"format": FORMAT, "dim_n": self.dim_n, "name": self.name,
               "multipliers": self.multipliers.tolist(), "normalization": self.raw_a0,
               "parity": "even" if self.even else "none",
               "smoothness": None if math.isinf(self.smoothness) else self.smoothness}
        if self.profile is not None:
            t = np.unique(np.concatenate([np.cos(np.linspace(np.pi, 0.0, 513)),
                                          np.asarray(self.profile.breakpoints, dtype=float)]))
            g, g1, g2 = self.profile.samples(t)
            doc["profile"] = {"t": t.tolist(), "g": np.asarray(g).tolist(),
                              "g1": np.asarray(g1).tolist(), "g2": np.asarray(g2).tolist()}
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Kernel":
        """Load a kernel; the stored multiplier table is used as is (no recomputation)."""
        doc = json.loads(text)
        if doc.get("format") != FORMAT:
            raise ValueError(f"unsupported kernel format {doc.get('format')!r}")
        prof = None
        if "profile" in doc:
            p = doc["profile"]
            prof = SplineProfile.from_samples(*(np.array(p[key]) for key in ("t", "g", "g1", "g2")))
        smooth = doc.get("smoothness")
        return cls(int(doc["dim_n"]), np.array(doc["multipliers"], dtype=float),
                   float(doc["normalization"]), prof, doc.get("parity") == "even",
                   math.inf if smooth is None else smooth, doc.get("name", "kernel"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def kernel_eigenvalues(n: int, profile: Profile, t=None):
    """``(mu, nu)`` of the body of revolution with support profile ``profile``."""
    if t is None:
        t = np.linspace(-1.0, 1.0, 4001)
    g, g1, g2 = profile.samples(t)
    return zonal_eigenvalues(g, g1, g2, t)


def make_kernel(n: int, profile: Profile, max_degree: int = DEFAULT_KMAX, name: str | None = None,
                validate: bool = True, design_degree: int | None = None) -> Kernel:
    """Kernel generated by the body of revolution with support profile ``profile``."""
    if validate:
        t = np.linspace(-1.0, 1.0, 4001)
        mu, nu = kernel_eigenvalues(n, profile, t)
        lo, hi = np.minimum(mu, nu), np.maximum(mu, nu)
        j = int(np.argmin(lo))
        if lo[j] < -TOL_PSD * max(float(hi.max()), 0.0) or (hi.max() <= 0 and lo[j] < 0):
            raise NotConvex(lo[j], float(t[j]))
    rule = gegenbauer_rule(n, design_degree or 2 * max_degree + 8, profile.breakpoints)
    raw = zonal_multipliers(n, profile, max_degree, rule)
    if not raw[0] > 0:
        raise ZeroMass(f"a_0 = {raw[0]:.3e} is not positive")
    norm = raw / raw[0]
    if profile.even:
        odd = np.max(np.abs(norm[1::2])) if max_degree >= 1 else 0.0
        if odd > PARITY_TOL:
            raise ValueError(f"even profile with odd multiplier {odd:.2e}")
        norm[1::2] = 0.0
    return Kernel(n, norm, float(raw[0]), profile, bool(profile.even), profile.smoothness,
                  name or repr(profile))


def projection_kernel(n: int, max_degree: int = DEFAULT_KMAX) -> Kernel:
    """Kernel ``|t| / 2`` (support function of a centred unit segment, halved)."""
    return make_kernel(n, abs_profile(0.5), max_degree, name="projection")


def ellipsoid_kernel(n: int, a: float, b: float, max_degree: int = DEFAULT_KMAX) -> Kernel:
    return make_kernel(n, ellipsoid_profile(a, b), max_degree, name=f"ellipsoid({a:g},{b:g})")


def ball_kernel(n: int, max_degree: int = DEFAULT_KMAX) -> Kernel:
    m = np.zeros(max_degree + 1)
    m[0] = 1.0
    from .harmonics import sphere_area
    from .profiles import constant_profile
    return Kernel(n, m, sphere_area(n), constant_profile(1.0), True, math.inf, "ball")


def edited_kernel(kernel: Kernel, k: int, value: float) -> Kernel:
    """Copy of ``kernel`` with the normalised multiplier of degree ``k`` replaced."""
    m = np.array(kernel.multipliers)
    m[k] = value
    return Kernel(kernel.dim_n, m, kernel.raw_a0, kernel.profile, kernel.even,
                  kernel.smoothness, kernel.name + f"[a_{k}={value:g}]")


# --- convolution and the valuation ----------------------------------------------------

def convolve(mu, kernel: Kernel, normalized: bool = True) -> HarmonicExpansion:
    """``mu * g``: degree-``k`` block scaled by the multiplier ``a_k``."""
    exp = mu.expansion if isinstance(mu, AreaDensity) else mu
    if exp.dim_n != kernel.dim_n:
        raise RepresentationMismatch("kernel and function live in different dimensions")
    table = kernel.table(exp.max_degree)
    if not normalized:
        table = table * kernel.raw_a0
    return exp.scale_degrees(table)


def body_from_expansion(expansion: HarmonicExpansion, like: Body, exc=ImageNotConvex) -> Body:
    """Validated body with support function ``expansion``, discretised like ``like``."""
    if isinstance(like, GridBody):
        return GridBody(expansion, like.grid, _exc=exc)
    return ZonalBody(like.dim_n, ExpansionProfile(expansion), like.max_degree,
                     t_nodes=like.t_nodes, _exc=exc)


def apply_valuation(K: Body, kernel: Kernel, i: int, density: AreaDensity | None = None) -> Body:
    """``Phi_i K`` with ``h_{Phi_i K} = s_i(K, .) * g``; raises :class:`ImageNotConvex`."""
    s = density if density is not None else area_density(K, i)
    return body_from_expansion(convolve(s, kernel), K)


# --- checks --------------------------------------------------------------------------

@dataclass
class Report:
    name: str
    passed: bool
    values: np.ndarray
    degrees: np.ndarray
    summary: float
    detail: str = ""

    def __bool__(self):
        return self.passed


def gap_ratios(kernel: Kernel, k_max: int | None = None):
    n = kernel.dim_n
    k_max = kernel.max_degree if k_max is None else k_max
    k = np.arange(2, k_max + 1)
    a = kernel.table(k_max)
    return k, (k - 1) * (n + k - 1) * np.abs(a[2:])


def spectral_gap_check(kernel: Kernel, k_max: int | None = None, tol: float = 1e-10) -> Report:
    """``(k-1)(n+k-1) |a_k| / a_0`` for ``k = 2..k_max``.

    Passes iff every ratio with ``k > 2`` is below 1 and the ``k = 2`` ratio is
    at most ``1 + tol``.
    """
    k, r = gap_ratios(kernel, k_max)
    ok = bool(np.all(r[k > 2] < 1.0) and np.all(r[k == 2] <= 1.0 + tol))
    worst = int(k[np.argmax(r)]) if r.size else 0
    return Report("spectral_gap", ok, r, k, float(r.max()) if r.size else 0.0,
                  f"max ratio {r.max() if r.size else 0:.6g} at k={worst}")


def derivative_multiplier_check(g: Profile, n: int, j: int, k_max: int = 30,
                                extra_degree: int = 40) -> Report:
    """Compare ``a_k^n[g^(j)]`` with ``(2 pi)^j a_{k+j}^{n-2j}[g]`` for ``k <= k_max``.

    Relative error per ``k`` is ``|lhs - rhs| / max(|lhs|, |rhs|, floor)`` with
    ``floor = 1e-5 * max(max_k max(|lhs|, |rhs|), int |g|)``: multipliers that
    vanish (odd degrees of even profiles, degrees above a polynomial's, every
    degree when ``g^(j) = 0``) are compared in absolute terms against that
    scale instead of producing noise ratios.
    """
    if j < 1 or n < 2 * (j + 1):
        raise HypothesisError(f"need j >= 1 and n >= 2(j+1); got n={n}, j={j}")
    deg = 2 * (k_max + j) + extra_degree
    gj = g.derivative(j)
    lhs = zonal_multipliers(n, gj, k_max, gegenbauer_rule(n, deg, gj.breakpoints))
    m = n - 2 * j
    rhs = (2 * np.pi) ** j * zonal_multipliers(m, g, k_max + j,
                                               gegenbauer_rule(m, deg, g.breakpoints))[j:]
    big = np.maximum(np.abs(lhs), np.abs(rhs))
    rule = gegenbauer_rule(n, deg, g.breakpoints)
    mass = rule.sphere_integral(np.abs(g.value(rule.nodes)))
    floor = 1e-5 * max(float(big.max()), mass, 1e-300)
    rel = np.abs(lhs - rhs) / np.maximum(big, floor)
    return Report("derivative_identity", bool(rel.max() <= 1e-8), rel, np.arange(k_max + 1),
                  float(rel.max()), f"n={n} j={j} max rel err {rel.max():.3e}")


def decay_profile(kernel: Kernel, k_min: int = 8, k_max: int | None = None,
                  noise: float = 1e-14, band_tol: float = 1e-12) -> Report:
    """Log-log slope of the multiplier envelope over ``[k_min, k_max]``.

    The envelope is ``max_{j >= k} |a_j|`` (odd degrees dropped for even
    kernels), fitted where it stays above ``noise``.  A kernel whose
    multipliers fall below ``band_tol`` beyond some degree is reported as band
    limited (slope ``-inf``).  For smoothness class ``C^m`` the check passes iff
    ``slope <= -(m + (n-2)/2) + 0.5``.
    """
    n = kernel.dim_n
    k_max = kernel.max_degree if k_max is None else k_max
    a = np.abs(kernel.table(k_max))
    k = np.arange(k_max + 1)
    sel = k >= 1
    if kernel.even:
        sel &= k % 2 == 0
    above = np.nonzero(sel & (a >= band_tol))[0]
    top = int(above.max()) if above.size else 0
    m = kernel.smoothness
    bound = -(m + (n - 2) / 2.0) + 0.5 if math.isfinite(m) else -math.inf
    if top < k_max - 2:
        return Report("decay", True, a, k, -math.inf, f"band limited: |a_k| < {band_tol:g} "
                      f"for k > {top}")
    env = np.maximum.accumulate(a[::-1])[::-1]
    fit = sel & (k >= k_min) & (env > noise)
    if fit.sum() < 4:
        return Report("decay", True, a, k, -math.inf, "decays to the noise floor")
    slope = float(np.polyfit(np.log(k[fit]), np.log(env[fit]), 1)[0])
    ok = slope <= bound if math.isfinite(bound) else True
    return Report("decay", ok, env, k, slope, f"slope {slope:.3f} (bound {bound:.3f})")


def box_transformed(kernel: Kernel, k_max: int | None = None) -> np.ndarray:
    """Normalised multipliers of ``box_n g``."""
    k_max = kernel.max_degree if k_max is None else k_max
    return box_multipliers(kernel.dim_n, k_max) * kernel.table(k_max)


def is_monotone(kernel: Kernel, t=None) -> bool:
    """``box_n g >= 0``, i.e. ``((n-2) mu + nu) / (n-1) >= 0`` along the profile."""
    if kernel.profile is None:
        raise ValueError("kernel has no profile")
    n = kernel.dim_n
    mu, nu = kernel_eigenvalues(n, kernel.profile, t)
    f = ((n - 2) * mu + nu) / (n - 1)
    return bool(f.min() >= -TOL_PSD * max(float(np.abs(f).max()), 1e-300))


def lambda_degree1(kernel: Kernel, k_max: int | None = None) -> Report:
    """``lambda_g = sup_{2 <= k <= K} |(1-k)(k+n-1)/(n-1) a_k|``; passes iff ``< 1``."""
    f = box_transformed(kernel, k_max)
    vals = np.abs(f[2:])
    lam = float(vals.max()) if vals.size else 0.0
    return Report("lambda_g", lam < 1.0, vals, np.arange(2, f.size), lam, f"lambda_g = {lam:.6g}")


def lambda_degree_i(kernel: Kernel, i: int, k_max: int | None = None) -> Report:
    """``Lambda_L = sup_{2 <= k <= K} (k-1)(k+n-1)/(n-1) |a_k|``; passes iff ``i Lambda_L < 1``.

    Degree 0 is left out of the supremum: its factor ``(0-1)(n-1)/(n-1)`` times
    ``a_0 = 1`` would pin the supremum at 1, while the contraction only acts on
    ``f - 1`` (no degree-0 part).
    """
    f = box_transformed(kernel, k_max)
    vals = np.abs(f[2:])
    lam = float(vals.max()) if vals.size else 0.0
    return Report("Lambda_L", i * lam < 1.0, vals, np.arange(2, f.size), lam,
                  f"Lambda_L = {lam:.6g}, i*Lambda_L = {i * lam:.6g}")


# --- multilinear bounds ------------------------------------------------------------

def transformed_discriminant(fs, kernel: Kernel, grid: SphereGrid, normalized: bool = True):
    """Nodewise ``D(D^2 T f_1, ..., D^2 T f_{n-1})`` for n = 3 grid expansions ``fs``."""
    if kernel.dim_n != 3 or len(fs) != 2:
        raise ValueError("implemented for n = 3 (two functions)")
    mats = []
    for f in fs:
        htt, htp, hpp, _ = grid_hessian(convolve(f, kernel, normalized), grid)
        mats.append(np.stack([np.stack([htt, htp], -1), np.stack([htp, hpp], -1)], -2))
    return mixed_discriminant(mats, check_symmetric=False)


def multilinear_bounds(fs, kernel: Kernel, grid: SphereGrid) -> dict:
    """Both sides of the L2 and sup bounds on ``D(D^2 T f_1, ..., D^2 T f_{n-1})``.

    With the normalised kernel (``a_0 = 1``):
    ``l2``: ``||D||_2`` against ``||f_1||_2 prod_{k>=2} ||f_k||_inf / (n-1)`` (as stated)
    and against ``||f_1||_2 prod_{k>=2} ||f_k||_inf`` (``l2_corrected``);
    ``sup``: ``||D||_inf`` against ``prod ||f_k||_inf``.
    Sup norms are maxima over the grid nodes.
    """
    n = kernel.dim_n
    d = transformed_discriminant(fs, kernel, grid)
    vals = [synthesize(f, grid) for f in fs]
    sup = [float(np.max(np.abs(v))) for v in vals]
    l2_f1 = math.sqrt(grid.integrate(vals[0] ** 2))
    rest = float(np.prod(sup[1:]))
    return {"l2": math.sqrt(grid.integrate(d * d)), "l2_bound": l2_f1 * rest / (n - 1),
            "l2_corrected_bound": l2_f1 * rest, "sup": float(np.max(np.abs(d))),
            "sup_bound": float(np.prod(sup))}
