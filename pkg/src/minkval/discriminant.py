"""Mixed discriminants, area-measure densities and the box operator."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import comb, factorial

import numpy as np

from .errors import NotConvex
from .harmonics import HarmonicExpansion, analyze, sphere_area, zonal_analyze

MAX_SIZE = 8
DENSITY_TOL = 1e-10


def _validate(matrices, check_symmetric=True):
    mats = [np.asarray(a, dtype=float) for a in matrices]
    k = len(mats)
    if k == 0 or k > MAX_SIZE:
        raise ValueError(f"need between 1 and {MAX_SIZE} matrices, got {k}")
    for a in mats:
        if a.ndim < 2 or a.shape[-2:] != (k, k):
            raise ValueError(f"expected {k} matrices of size {k}x{k}, got shape {a.shape}")
        if check_symmetric:
            scale = max(float(np.max(np.abs(a))), 1.0)
            if np.max(np.abs(a - np.swapaxes(a, -1, -2))) > 1e-12 * scale:
                raise ValueError("matrices must be symmetric")
    return np.broadcast_arrays(*mats)


def mixed_discriminant(matrices, check_symmetric=True):
    """``D(A_1, ..., A_k)`` by the permutation sum.

    ``D = (1/k!) sum_sigma det[M_sigma]`` where column ``j`` of ``M_sigma`` is
    column ``j`` of ``A_sigma(j)``.  Matrices may carry leading batch axes
    (e.g. one 2x2 matrix per grid node); the result has the batch shape.
    """
    mats = _validate(matrices, check_symmetric)
    k = len(mats)
    cols = np.stack(mats)  # (k, ..., k, k)
    total = 0.0
    for sigma in permutations(range(k)):
        m = np.stack([cols[s][..., :, j] for j, s in enumerate(sigma)], axis=-1)
        total = total + np.linalg.det(m)
    return total / factorial(k)


def mixed_discriminant_polarization(matrices):
    """Oracle: ``D = (1/k!) sum_{S} (-1)^{k-|S|} det(sum_{j in S} A_j)``.

    This is the coefficient of ``l_1 ... l_k`` in ``det(l_1 A_1 + ... + l_k A_k)``
    divided by ``k!``.
    """
    mats = _validate(matrices, check_symmetric=False)
    k = len(mats)
    total = 0.0
    for mask in range(1, 2 ** k):
        idx = [j for j in range(k) if mask >> j & 1]
        total = total + (-1) ** (k - len(idx)) * np.linalg.det(sum(mats[j] for j in idx))
    return total / factorial(k)


def cofactor_matrix(b) -> np.ndarray:
    """Matrix of cofactors ``C_ij = (-1)^{i+j} det(minor_ij)``."""
    b = np.asarray(b, dtype=float)
    k = b.shape[-1]
    out = np.empty_like(b)
    for i in range(k):
        for j in range(k):
            minor = np.delete(np.delete(b, i, axis=-2), j, axis=-1)
            out[..., i, j] = (-1) ** (i + j) * (np.linalg.det(minor) if k > 1 else 1.0)
    return out


def cofactor_form(a, b):
    """``D(A, B[k-1]) = tr(cof(B)^T A) / k`` (the transpose is immaterial for symmetric B)."""
    a = np.asarray(a, dtype=float)
    k = a.shape[-1]
    return np.einsum("...ij,...ij->...", cofactor_matrix(b), a) / k


@dataclass(frozen=True, eq=False)
class AreaDensity:
    """Density ``s_i(K, .)`` of the i-th area measure.

    ``values`` are samples at the integration nodes, ``weights`` the matching
    sphere-quadrature weights (so ``int s = sum(weights * values)``), and
    ``sup_values`` samples at the nodes used for sup norms.
    """

    dim_n: int
    degree: int
    kind: str
    values: np.ndarray
    weights: np.ndarray
    sup_values: np.ndarray
    expansion: HarmonicExpansion
    centroid: np.ndarray

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights * self.values))

    @property
    def mean(self) -> float:
        """``pi_0 s_i``."""
        return self.mass / sphere_area(self.dim_n)

    def sup_error(self, target: float = 1.0) -> float:
        return float(np.max(np.abs(self.sup_values - target)))

    def tv_to_constant(self, target: float = 1.0) -> float:
        return 0.5 * float(np.sum(self.weights * np.abs(self.values - target)))

    def centroid_ok(self, rtol: float = 1e-8) -> bool:
        return bool(np.all(np.abs(self.centroid) <= rtol * abs(self.mass)))


def zonal_density(n: int, i: int, mu, nu):
    """``s_i`` from the eigenvalues ``mu`` (multiplicity n-2) and ``nu``.

    The i-th normalised elementary symmetric function of the eigenvalues:
    ``[C(n-2,i) mu^i + C(n-2,i-1) mu^{i-1} nu] / C(n-1,i)``.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    return (comb(n - 2, i) * mu ** i + comb(n - 2, i - 1) * mu ** (i - 1) * nu) / comb(n - 1, i)


def area_density(K, i: int, check: bool = True) -> AreaDensity:
    """``s_i(K, u) = D(D^2 h_K(u)[i], Id[n-1-i])`` on the body's nodes."""
    from .body import GridBody
    n = K.dim_n
    if not 1 <= i <= n - 1:
        raise ValueError(f"degree must be in 1..{n - 1}, got {i}")
    if isinstance(K, GridBody):
        hm = K.hessian_matrices()
        eye = np.broadcast_to(np.eye(n - 1), hm.shape)
        vals = mixed_discriminant([hm] * i + [eye] * (n - 1 - i), check_symmetric=False)
        weights = K.grid.weights
        sup_vals = vals
        expansion = analyze(vals, K.grid, K.max_degree)
        centroid = np.einsum("ij,ijk->k", weights * vals, K.grid.points)
        where = lambda j: tuple(K.grid.points.reshape(-1, 3)[j])  # noqa: E731
    else:
        vals = zonal_density(n, i, K.mu, K.nu)
        weights = K.rule.weights * sphere_area(n - 1)
        g, g1, g2 = K.profile.samples(K.t_nodes)
        from .body import zonal_eigenvalues
        sup_vals = zonal_density(n, i, *zonal_eigenvalues(g, g1, g2, K.t_nodes))
        expansion = zonal_analyze(n, vals, K.rule, K.max_degree)
        centroid = np.zeros(n)
        centroid[-1] = float(np.sum(weights * vals * K.rule.nodes))
        where = lambda j: float(K.rule.nodes[j])  # noqa: E731
    if check:
        top = max(float(np.max(vals)), 0.0)
        j = int(np.argmin(vals))
        if vals.flat[j] < -DENSITY_TOL * top:
            raise NotConvex(vals.flat[j], where(j), f"area density s_{i} negative "
                            f"({vals.flat[j]:.3e}) at {where(j)}")
    return AreaDensity(n, i, K.kind, vals, weights, sup_vals, expansion, centroid)


def box_multipliers(n: int, kmax: int) -> np.ndarray:
    """``(1-k)(k+n-1)/(n-1)`` for ``k = 0 .. kmax``."""
    k = np.arange(kmax + 1, dtype=float)
    return (1.0 - k) * (k + n - 1.0) / (n - 1.0)


def box_n(f: HarmonicExpansion) -> HarmonicExpansion:
    """``box_n f = f + Delta_S f / (n-1)`` as a multiplier."""
    return f.scale_degrees(box_multipliers(f.dim_n, f.max_degree))


def laplacian(f: HarmonicExpansion) -> HarmonicExpansion:
    """Spherical Laplacian through ``Delta_S = (n-1)(box_n - Id)``."""
    return (f.dim_n - 1) * (box_n(f) - f)
