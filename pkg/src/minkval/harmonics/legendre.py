"""Legendre polynomials of dimension ``n`` and the constants that go with them.

``P_k^n`` is the Gegenbauer polynomial ``C_k^{(n-2)/2}`` rescaled so that
``P_k^n(1) = 1``.  For ``n = 3`` these are the classical Legendre polynomials,
for ``n = 2`` the Chebyshev polynomials of the first kind.
"""
from __future__ import annotations

from math import comb, gamma, pi

import numpy as np

from ..errors import DomainError

DOMAIN_SLACK = 1e-12


def sphere_area(n: float) -> float:
    """Surface area ``omega_n`` of the unit sphere in ``R^n`` (4*pi for n=3)."""
    return 2.0 * pi ** (n / 2.0) / gamma(n / 2.0)


def ball_volume(n: float) -> float:
    """Volume ``kappa_n`` of the unit ball in ``R^n`` (``kappa_0 = 1``)."""
    return pi ** (n / 2.0) / gamma(n / 2.0 + 1.0)


def dimension_N(n: int, k: int) -> int:
    """Dimension of the space of degree-``k`` spherical harmonics on S^{n-1}."""
    if n < 3 or k < 0:
        raise DomainError(f"need n >= 3 and k >= 0, got n={n}, k={k}")
    num = (n + 2 * k - 2) * comb(n + k - 2, n - 2)
    q, r = divmod(num, n + k - 2)
    assert r == 0
    return q


def _check_domain(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + DOMAIN_SLACK):
        raise DomainError("Legendre argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def legendre_table(n: float, kmax: int, t, derivatives: int = 0):
    """Evaluate ``P_0^n .. P_kmax^n`` (and optionally derivatives) at ``t``.

    Uses the three-term recurrence
    ``(k+n-3) P_k = (2k+n-4) t P_{k-1} - (k-1) P_{k-2}``
    and its term-by-term derivatives.

    Parameters
    ----------
    n : float
        Dimension, ``n >= 2``.
    kmax : int
        Highest degree.
    t : array_like
        Points in ``[-1, 1]``.
    derivatives : {0, 1, 2}
        Number of derivatives to return as well.

    Returns
    -------
    ndarray or tuple of ndarray
        Arrays of shape ``(kmax + 1,) + t.shape``; a tuple
        ``(P, P', ...)`` when ``derivatives > 0``.
    """
    if n < 2:
        raise DomainError(f"dimension must be >= 2, got {n}")
    t = _check_domain(t)
    out = [np.zeros((kmax + 1,) + t.shape) for _ in range(derivatives + 1)]
    p = out[0]
    p[0] = 1.0
    if kmax >= 1:
        p[1] = t
        if derivatives >= 1:
            out[1][1] = 1.0
    for k in range(2, kmax + 1):
        a = 2 * k + n - 4
        b = k - 1
        c = k + n - 3
        p[k] = (a * t * p[k - 1] - b * p[k - 2]) / c
        if derivatives >= 1:
            d1 = out[1]
            d1[k] = (a * (p[k - 1] + t * d1[k - 1]) - b * d1[k - 2]) / c
        if derivatives >= 2:
            d2 = out[2]
            d2[k] = (a * (2.0 * out[1][k - 1] + t * d2[k - 1]) - b * d2[k - 2]) / c
    return out[0] if derivatives == 0 else tuple(out)


def legendre_eval(n: float, k: int, t):
    """Return ``P_k^n(t)``; raises :class:`DomainError` for ``|t| > 1``."""
    if k < 0:
        raise DomainError("degree must be nonnegative")
    vals = legendre_table(n, k, t)[k]
    return float(vals) if np.ndim(vals) == 0 else vals
