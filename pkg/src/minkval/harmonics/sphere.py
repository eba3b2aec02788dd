"""Real orthonormal spherical harmonics on S^2 and grid transforms.

Coefficients are stored flat, degree by degree: index ``l*l + l + m`` for
``-l <= m <= l``.  With ``Pbar_lm`` the associated Legendre function normalised
to unit L2 norm on [-1, 1] (no Condon-Shortley phase)::

    Y_l0  = Pbar_l0(cos theta) / sqrt(2 pi)
    Y_lm  = Pbar_lm(cos theta) cos(m phi) / sqrt(pi)      m > 0
    Y_l-m = Pbar_lm(cos theta) sin(m phi) / sqrt(pi)      m > 0

Transforms are separable (Legendre sums in theta, trigonometric sums in phi),
evaluated with dense matrix products.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .quadrature import SphereGrid


def n_coefficients(lmax: int) -> int:
    return (lmax + 1) ** 2


def index(l: int, m: int) -> int:
    return l * l + l + m


def degrees(lmax: int) -> np.ndarray:
    """Degree ``l`` of every flat coefficient slot."""
    return np.repeat(np.arange(lmax + 1), 2 * np.arange(lmax + 1) + 1)


def orders(lmax: int) -> np.ndarray:
    return np.concatenate([np.arange(-l, l + 1) for l in range(lmax + 1)])


def assoc_legendre(lmax: int, x) -> np.ndarray:
    """Normalised associated Legendre functions ``Pbar[m, l, ...]``.

    Standard stable recursion: diagonal ``Pbar_mm`` from ``Pbar_{m-1,m-1}``,
    then upward in ``l`` at fixed ``m``.  Entries with ``l < m`` are zero.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    p = np.zeros((lmax + 1, lmax + 1) + x.shape)
    p[0, 0] = np.sqrt(0.5)
    for m in range(1, lmax + 1):
        p[m, m] = np.sqrt((2 * m + 1) / (2.0 * m)) * s * p[m - 1, m - 1]
    for m in range(lmax):
        p[m, m + 1] = np.sqrt(2 * m + 3.0) * x * p[m, m]
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
            p[m, l] = a * (x * p[m, l - 1] - b * p[m, l - 2])
    return p


def theta_derivative(p: np.ndarray) -> np.ndarray:
    """d/dtheta of a table produced by :func:`assoc_legendre` (pole-safe).

    ``dPbar_lm = (sqrt((l+m)(l-m+1)) Pbar_{l,m-1} - sqrt((l-m)(l+m+1)) Pbar_{l,m+1}) / 2``
    for ``m >= 1`` and ``dPbar_l0 = -sqrt(l(l+1)) Pbar_l1``.
    """
    lmax = p.shape[1] - 1
    l = np.arange(lmax + 1, dtype=float)
    shape = (lmax + 1,) + (1,) * (p.ndim - 2)
    d = np.zeros_like(p)
    d[0] = -(np.sqrt(l * (l + 1)).reshape(shape) * p[1]) if lmax >= 1 else 0.0
    for m in range(1, lmax + 1):
        up = np.sqrt(np.clip((l + m) * (l - m + 1), 0, None)).reshape(shape)
        down = np.sqrt(np.clip((l - m) * (l + m + 1), 0, None)).reshape(shape)
        nxt = p[m + 1] if m < lmax else 0.0
        d[m] = 0.5 * (up * p[m - 1] - down * nxt)
        d[m][:m] = 0.0
    return d


def _order_norm(lmax: int) -> np.ndarray:
    c = np.full(lmax + 1, 1.0 / np.sqrt(np.pi))
    c[0] = 1.0 / np.sqrt(2.0 * np.pi)
    return c


def split(coeffs: np.ndarray, lmax: int):
    """Flat coefficients -> ``(cos_part[l, m], sin_part[l, m])``."""
    cc = np.zeros((lmax + 1, lmax + 1))
    cs = np.zeros((lmax + 1, lmax + 1))
    for l in range(lmax + 1):
        base = l * l + l
        cc[l, : l + 1] = coeffs[base: base + l + 1]
        cs[l, 1: l + 1] = coeffs[base - 1: base - l - 1: -1] if l else 0.0
    return cc, cs


def merge(cc: np.ndarray, cs: np.ndarray) -> np.ndarray:
    lmax = cc.shape[0] - 1
    out = np.zeros(n_coefficients(lmax))
    for l in range(lmax + 1):
        base = l * l + l
        out[base: base + l + 1] = cc[l, : l + 1]
        if l:
            out[base - l: base] = cs[l, l:0:-1]
    return out


@lru_cache(maxsize=16)
def _grid_tables(n_theta: int, n_phi: int, lmax: int):
    grid = SphereGrid(n_theta, n_phi)
    p0 = assoc_legendre(lmax, grid.x)
    p1 = theta_derivative(p0)
    p2 = theta_derivative(p1)
    m = np.arange(lmax + 1)
    mphi = np.outer(m, grid.phi)
    for arr in (p0, p1, p2):
        arr.setflags(write=False)
    return p0, p1, p2, np.cos(mphi), np.sin(mphi)


def _phi_factors(order: int, m, cos_t, sin_t):
    mm = np.asarray(m, dtype=float)[:, None] ** order
    r = order % 4
    if r == 0:
        return mm * cos_t, mm * sin_t
    if r == 1:
        return -mm * sin_t, mm * cos_t
    if r == 2:
        return -mm * cos_t, -mm * sin_t
    return mm * sin_t, -mm * cos_t


def synthesize_grid(coeffs, grid: SphereGrid, lmax: int, dtheta: int = 0, dphi: int = 0):
    """Evaluate an expansion (or a theta/phi derivative of it) on the grid nodes."""
    tables = _grid_tables(grid.n_theta, grid.n_phi, lmax)
    pt = tables[dtheta]
    cc, cs = split(np.asarray(coeffs, dtype=float), lmax)
    norm = _order_norm(lmax)
    a_c = np.einsum("lm,mlj->mj", cc, pt) * norm[:, None]
    a_s = np.einsum("lm,mlj->mj", cs, pt) * norm[:, None]
    fc, fs = _phi_factors(dphi, np.arange(lmax + 1), tables[3], tables[4])
    return a_c.T @ fc + a_s.T @ fs


def analyze_grid(values, grid: SphereGrid, lmax: int) -> np.ndarray:
    """Quadrature projection of grid samples onto the basis up to ``lmax``."""
    p0, _, _, cos_t, sin_t = _grid_tables(grid.n_theta, grid.n_phi, lmax)
    values = np.asarray(values, dtype=float)
    dphi = 2.0 * np.pi / grid.n_phi
    norm = _order_norm(lmax)
    fc = (values @ cos_t.T) * dphi * norm[None, :]
    fs = (values @ sin_t.T) * dphi * norm[None, :]
    w = grid.theta_weights
    cc = np.einsum("mlj,jm->lm", p0 * w, fc)
    cs = np.einsum("mlj,jm->lm", p0 * w, fs)
    cs[:, 0] = 0.0
    return merge(np.tril(cc), np.tril(cs))


def basis_at(theta, phi, lmax: int, dtheta: int = 0, dphi: int = 0) -> np.ndarray:
    """Basis functions (or derivatives) at scattered points, shape ``(ncoef, npts)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    p = assoc_legendre(lmax, np.cos(theta))
    for _ in range(dtheta):
        p = theta_derivative(p)
    m = np.arange(lmax + 1)
    mphi = np.outer(m, phi)
    fc, fs = _phi_factors(dphi, m, np.cos(mphi), np.sin(mphi))
    norm = _order_norm(lmax)
    out = np.zeros((n_coefficients(lmax), theta.size))
    for l in range(lmax + 1):
        base = l * l + l
        for mm in range(l + 1):
            out[base + mm] = norm[mm] * p[mm, l] * fc[mm]
            if mm:
                out[base - mm] = norm[mm] * p[mm, l] * fs[mm]
    return out


def evaluate_at(coeffs, theta, phi, lmax: int, dtheta: int = 0, dphi: int = 0) -> np.ndarray:
    return np.asarray(coeffs, dtype=float) @ basis_at(theta, phi, lmax, dtheta, dphi)
