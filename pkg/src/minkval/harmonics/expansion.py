"""Harmonic expansions, projections, multipliers and the ``M_j`` smoothing operators."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import AliasingError, RepresentationMismatch
from . import sphere
from .legendre import dimension_N, legendre_table, sphere_area
from .quadrature import IntervalRule, SphereGrid, gegenbauer_rule

GRID = "grid"
ZONAL = "zonal"


@dataclass(frozen=True, eq=False)
class HarmonicExpansion:
    """Coefficients of a function on S^{n-1}, grouped by degree.

    ``grid`` expansions (n = 3 only) hold the flat real-harmonic coefficients
    of :mod:`minkval.harmonics.sphere`.  ``zonal`` expansions hold one number
    per degree, the multiplier-style coefficient ``a_k^n[f]``, so that
    ``f(u) = sum_k N(n,k)/omega_n * a_k * P_k^n(u . e)``.
    """

    dim_n: int
    max_degree: int
    coefficients: np.ndarray
    representation: str = GRID

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if self.representation == GRID:
            if self.dim_n != 3:
                raise RepresentationMismatch("grid expansions exist only for n = 3")
            expected = sphere.n_coefficients(self.max_degree)
        elif self.representation == ZONAL:
            expected = self.max_degree + 1
        else:
            raise ValueError(f"unknown representation {self.representation!r}")
        if c.shape != (expected,):
            raise ValueError(f"expected {expected} coefficients, got {c.shape}")

    @classmethod
    def zeros(cls, dim_n, max_degree, representation=GRID):
        size = sphere.n_coefficients(max_degree) if representation == GRID else max_degree + 1
        return cls(dim_n, max_degree, np.zeros(size), representation)

    @property
    def is_zonal(self) -> bool:
        return self.representation == ZONAL

    def block(self, k: int) -> np.ndarray:
        if self.is_zonal:
            return self.coefficients[k: k + 1]
        return self.coefficients[k * k: (k + 1) ** 2]

    def degree_of_slot(self) -> np.ndarray:
        if self.is_zonal:
            return np.arange(self.max_degree + 1)
        return sphere.degrees(self.max_degree)

    def block_norms(self) -> np.ndarray:
        """``||pi_k f||_2`` for ``k = 0 .. max_degree``."""
        if self.is_zonal:
            k = np.arange(self.max_degree + 1)
            n_nk = np.array([dimension_N(self.dim_n, int(j)) for j in k], dtype=float)
            return np.abs(self.coefficients) * np.sqrt(n_nk / sphere_area(self.dim_n))
        sq = np.bincount(self.degree_of_slot(), weights=self.coefficients ** 2,
                         minlength=self.max_degree + 1)
        return np.sqrt(sq)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.block_norms() ** 2)))

    def scale_degrees(self, factors) -> "HarmonicExpansion":
        """Multiply the degree-``k`` block by ``factors[k]``."""
        factors = np.asarray(factors, dtype=float)
        if factors.shape[0] < self.max_degree + 1:
            raise ValueError("not enough factors for the band limit")
        new = self.coefficients * factors[self.degree_of_slot()]
        return HarmonicExpansion(self.dim_n, self.max_degree, new, self.representation)

    def truncate(self, max_degree: int) -> "HarmonicExpansion":
        if max_degree > self.max_degree:
            return self.pad(max_degree)
        size = sphere.n_coefficients(max_degree) if not self.is_zonal else max_degree + 1
        return HarmonicExpansion(self.dim_n, max_degree, self.coefficients[:size],
                                 self.representation)

    def pad(self, max_degree: int) -> "HarmonicExpansion":
        out = HarmonicExpansion.zeros(self.dim_n, max_degree, self.representation)
        c = np.array(out.coefficients)
        c[: self.coefficients.size] = self.coefficients
        return HarmonicExpansion(self.dim_n, max_degree, c, self.representation)

    def _check(self, other):
        if (self.dim_n, self.representation) != (other.dim_n, other.representation):
            raise RepresentationMismatch("expansions live on different spaces")

    def __add__(self, other):
        self._check(other)
        top = max(self.max_degree, other.max_degree)
        a, b = self.pad(top), other.pad(top)
        return HarmonicExpansion(self.dim_n, top, a.coefficients + b.coefficients,
                                 self.representation)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return HarmonicExpansion(self.dim_n, self.max_degree, self.coefficients * float(scalar),
                                 self.representation)

    __rmul__ = __mul__

    def mean(self) -> float:
        """``pi_0 f`` (the spherical average)."""
        if self.is_zonal:
            return float(self.coefficients[0] / sphere_area(self.dim_n))
        return float(self.coefficients[0] / np.sqrt(4.0 * np.pi))


# --- n = 3 grid path --------------------------------------------------------

def analyze(values, grid: SphereGrid, max_degree: int, alias_tol: float | None = None
            ) -> HarmonicExpansion:
    """Project grid samples onto degrees ``<= max_degree``.

    With ``alias_tol`` set, the samples are first analysed at the full grid
    resolution; if the L2 norm of the part above ``max_degree``, relative to
    the whole, exceeds ``alias_tol``, :class:`AliasingError` is raised.
    """
    if max_degree > grid.max_resolved_degree:
        raise ValueError(f"degree {max_degree} exceeds grid resolution "
                         f"{grid.max_resolved_degree}")
    if alias_tol is not None:
        full = grid.max_resolved_degree
        c = sphere.analyze_grid(values, grid, full)
        keep = sphere.n_coefficients(max_degree)
        total = float(np.sum(c ** 2))
        tail = float(np.sum(c[keep:] ** 2))
        if total > 0 and np.sqrt(tail / total) > alias_tol:
            raise AliasingError(f"relative L2 content {np.sqrt(tail / total):.2e} above "
                                f"degree {max_degree} exceeds {alias_tol:.1e}")
        return HarmonicExpansion(3, max_degree, c[:keep])
    return HarmonicExpansion(3, max_degree, sphere.analyze_grid(values, grid, max_degree))


def synthesize(expansion: HarmonicExpansion, grid: SphereGrid, dtheta: int = 0, dphi: int = 0):
    """Evaluate a grid expansion (or a theta/phi derivative) on the grid."""
    if expansion.is_zonal:
        raise RepresentationMismatch("use zonal_values for zonal expansions")
    if expansion.max_degree > grid.max_resolved_degree:
        raise ValueError("grid too coarse for this band limit")
    return sphere.synthesize_grid(expansion.coefficients, grid, expansion.max_degree,
                                  dtheta, dphi)


def evaluate(expansion: HarmonicExpansion, points) -> np.ndarray:
    """Evaluate a grid expansion at arbitrary unit vectors."""
    from .quadrature import to_spherical
    pts = np.asarray(points, dtype=float)
    theta, phi = to_spherical(pts.reshape(-1, 3))
    vals = sphere.evaluate_at(expansion.coefficients, theta, phi, expansion.max_degree)
    return vals.reshape(pts.shape[:-1])


def project(values, grid: SphereGrid, k: int) -> np.ndarray:
    """``pi_k f`` on the grid nodes for grid samples ``f``."""
    exp = analyze(values, grid, k)
    factors = np.zeros(k + 1)
    factors[k] = 1.0
    return synthesize(exp.scale_degrees(factors), grid)


def project_direct(values, grid: SphereGrid, k: int) -> np.ndarray:
    """``pi_k f`` from the reproducing-kernel integral ``N/omega int f(u) P_k(u.v) du``.

    Quadratic in the number of nodes; meant as an independent check of
    :func:`project` on small grids.
    """
    pts = grid.points.reshape(-1, 3)
    gram = np.clip(pts @ pts.T, -1.0, 1.0)
    pk = legendre_table(3, k, gram)[k]
    w = (grid.weights * values).ravel()
    return (dimension_N(3, k) / (4.0 * np.pi) * (pk @ w)).reshape(grid.shape)


# --- zonal path ---------------------------------------------------------------

def zonal_multiplier(n, g, k, rule: IntervalRule | None = None) -> float:
    """``a_k^n[g] = omega_{n-1} int P_k^n(t) g(t) (1-t^2)^{(n-3)/2} dt`` by quadrature.

    ``g`` is a callable profile (or an object with a ``value`` method).
    """
    return float(zonal_multipliers(n, g, k, rule)[k])


def zonal_multipliers(n, g, kmax, rule: IntervalRule | None = None) -> np.ndarray:
    """All multipliers ``a_0 .. a_kmax`` of the zonal profile ``g``."""
    if rule is None:
        rule = gegenbauer_rule(n, 2 * kmax + 8, getattr(g, "breakpoints", ()))
    elif rule.dim_n != n:
        raise RepresentationMismatch("quadrature rule built for another dimension")
    if kmax > rule.design_degree:
        warnings.warn(f"degree {kmax} exceeds quadrature design degree "
                      f"{rule.design_degree}", RuntimeWarning, stacklevel=2)
    f = g.value if hasattr(g, "value") else g
    vals = np.asarray(f(rule.nodes), dtype=float)
    p = legendre_table(n, kmax, rule.nodes)
    return sphere_area(n - 1) * (p @ (rule.weights * vals))


def zonal_values(expansion: HarmonicExpansion, t, derivatives: int = 0):
    """Profile values ``f(t)`` (and derivatives) of a zonal expansion."""
    if not expansion.is_zonal:
        raise RepresentationMismatch("not a zonal expansion")
    n, kmax = expansion.dim_n, expansion.max_degree
    scale = np.array([dimension_N(n, k) for k in range(kmax + 1)], dtype=float)
    c = expansion.coefficients * scale / sphere_area(n)
    tables = legendre_table(n, kmax, t, derivatives)
    if derivatives == 0:
        return np.tensordot(c, tables, axes=1)
    return tuple(np.tensordot(c, tab, axes=1) for tab in tables)


def zonal_analyze(n, values, rule: IntervalRule, kmax) -> HarmonicExpansion:
    """Zonal expansion of profile samples taken at ``rule.nodes``."""
    p = legendre_table(n, kmax, rule.nodes)
    coeffs = sphere_area(n - 1) * (p @ (rule.weights * np.asarray(values, dtype=float)))
    return HarmonicExpansion(n, kmax, coeffs, ZONAL)


# --- smoothing and U_alpha ----------------------------------------------------

def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def theta_cutoff(x):
    """Smooth cutoff: 1 on [0, 1], 0 on [2, inf), C-infinity in between.

    Built from ``psi(y) = exp(-1/y)``: ``psi(2-x) / (psi(2-x) + psi(x-1))``.
    """
    x = np.asarray(x, dtype=float)
    a, b = _bump(2.0 - x), _bump(x - 1.0)
    return a / (a + b)


def smooth_Mj(f: HarmonicExpansion, j: int, cutoff=theta_cutoff) -> HarmonicExpansion:
    """``M_j f = sum_k cutoff(k/j) pi_k f``; band-limited to degree ``2j``."""
    if j < 1:
        raise ValueError("j must be positive")
    k = np.arange(f.max_degree + 1)
    return f.scale_degrees(cutoff(k / j))


def sup_norm(f: HarmonicExpansion, grid: SphereGrid | None = None, t=None) -> float:
    """Grid (or ``t``-sample) maximum of ``|f|``."""
    if f.is_zonal:
        if t is None:
            t = np.concatenate([np.linspace(-1, 1, 2001), np.cos(np.linspace(0, np.pi, 2001))])
        return float(np.max(np.abs(zonal_values(f, t))))
    if grid is None:
        grid = SphereGrid.for_degree(max(f.max_degree, 4))
    return float(np.max(np.abs(synthesize(f, grid))))


def spectral_tails(f: HarmonicExpansion) -> np.ndarray:
    """``tail[k]`` = L2 norm of the part of ``f`` with degree ``> k``."""
    sq = f.block_norms() ** 2
    rev = np.cumsum(sq[::-1])[::-1]
    return np.sqrt(np.append(rev[1:], 0.0))


def ualpha_norm_estimate(f: HarmonicExpansion, alpha: float, grid: SphereGrid | None = None) -> float:
    """Truncation-dependent estimate of the ``U_alpha`` norm.

    ``max(||f||_inf, max_{1<=k<=K} k^alpha * tail_k)`` where ``tail_k`` is the L2
    distance from ``f`` to its degree-``k`` truncation (the best L2 polynomial
    approximation).  Nondecreasing in the band limit ``K``.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    tails = spectral_tails(f)
    k = np.arange(1, f.max_degree + 1)
    best = float(np.max(k ** float(alpha) * tails[1:])) if k.size else 0.0
    return max(sup_norm(f, grid), best)
