"""Zonal profiles ``g: [-1, 1] -> R`` with analytic first and second derivatives.

A profile describes a zonal function ``u -> g(u . e)``.  Every profile offers
``value``, ``d1``, ``d2``, ``derivative(j)`` and ``breakpoints`` (points where
the profile is less smooth; quadrature rules split there).
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import BPoly, CubicSpline, PPoly

from .harmonics.expansion import HarmonicExpansion, zonal_values


class Profile:
    breakpoints: tuple = ()
    smoothness: float = np.inf   # largest m with the profile in C^m
    even: bool = False

    def value(self, t):
        raise NotImplementedError

    def d1(self, t):
        return self.derivative(1).value(t)

    def d2(self, t):
        return self.derivative(2).value(t)

    def derivative(self, j: int) -> "Profile":
        raise NotImplementedError

    def __call__(self, t):
        return self.value(t)

    def __add__(self, other):
        return SumProfile([self, other])

    def __rmul__(self, c):
        return ScaledProfile(self, float(c))

    def samples(self, t):
        """``(g, g', g'')`` at ``t``."""
        t = np.asarray(t, dtype=float)
        return self.value(t), self.d1(t), self.d2(t)


class PolynomialProfile(Profile):
    """Polynomial profile in the power basis (numpy ``Polynomial``)."""

    def __init__(self, coeffs):
        self.poly = coeffs if isinstance(coeffs, Polynomial) else Polynomial(coeffs)
        c = self.poly.coef
        self.even = bool(np.all(np.abs(c[1::2]) <= 1e-15 * max(1.0, np.abs(c).max())))

    @property
    def degree(self) -> int:
        return self.poly.degree()

    def value(self, t):
        return self.poly(np.asarray(t, dtype=float))

    def derivative(self, j):
        return PolynomialProfile(self.poly.deriv(j)) if j else self

    def __repr__(self):
        return f"PolynomialProfile({list(self.poly.coef)})"


def gegenbauer_polynomial(n: float, k: int) -> Polynomial:
    """``P_k^n`` as a power-basis polynomial, from the three-term recurrence."""
    t = Polynomial([0.0, 1.0])
    prev, cur = Polynomial([1.0]), t
    if k == 0:
        return prev
    for j in range(2, k + 1):
        prev, cur = cur, ((2 * j + n - 4) * t * cur - (j - 1) * prev) / (j + n - 3)
    return cur


def gegenbauer_profile(n: float, coeffs) -> PolynomialProfile:
    """Profile ``sum_k coeffs[k] P_k^n(t)``."""
    poly = Polynomial([0.0])
    for k, c in enumerate(coeffs):
        if c:
            poly = poly + c * gegenbauer_polynomial(n, k)
    return PolynomialProfile(poly)


class SplineProfile(Profile):
    """Piecewise polynomial profile (C^2 cubic spline or any scipy ``PPoly``)."""

    def __init__(self, pp: PPoly, smoothness: int = 2):
        self.pp = pp
        self.smoothness = smoothness
        self.breakpoints = tuple(float(x) for x in pp.x[1:-1])

    @classmethod
    def cubic(cls, knots, values, bc_type="not-a-knot"):
        """Interpolating C^2 cubic spline through ``(knots, values)`` on [-1, 1]."""
        return cls(CubicSpline(knots, values, bc_type=bc_type), smoothness=2)

    @classmethod
    def from_samples(cls, t, g, g1, g2):
        """Quintic Hermite interpolant matching ``g, g', g''`` at the samples."""
        y = np.stack([g, g1, g2], axis=1)
        return cls(PPoly.from_bernstein_basis(BPoly.from_derivatives(t, y)), smoothness=2)

    def value(self, t):
        return self.pp(np.asarray(t, dtype=float))

    def derivative(self, j):
        if not j:
            return self
        return SplineProfile(self.pp.derivative(j), max(self.smoothness - j, 0))


class FunctionProfile(Profile):
    """Profile given by callables for the value and its derivatives."""

    def __init__(self, funcs, breakpoints=(), smoothness=np.inf, even=False, name="function"):
        self.funcs = tuple(funcs)
        self.breakpoints = tuple(breakpoints)
        self.smoothness = smoothness
        self.even = even
        self.name = name

    def value(self, t):
        return self.funcs[0](np.asarray(t, dtype=float))

    def derivative(self, j):
        if j == 0:
            return self
        if j >= len(self.funcs):
            raise ValueError(f"{self.name}: derivative {j} not available")
        return FunctionProfile(self.funcs[j:], self.breakpoints,
                               max(self.smoothness - j, 0), self.even and j % 2 == 0,
                               f"{self.name}^({j})")

    def __repr__(self):
        return f"FunctionProfile({self.name})"


def constant_profile(c: float = 1.0) -> PolynomialProfile:
    return PolynomialProfile([float(c)])


def abs_profile(scale: float = 1.0) -> FunctionProfile:
    """``scale * |t|``: the support function of a segment, Lipschitz only."""
    return FunctionProfile(
        (lambda t: scale * np.abs(t), lambda t: scale * np.sign(t), lambda t: np.zeros_like(t)),
        breakpoints=(0.0,), smoothness=0, even=True, name=f"{scale}|t|")


def ellipsoid_profile(a: float, b: float) -> FunctionProfile:
    """Support profile of the ellipsoid of revolution with semi-axis ``a`` along the
    axis and ``b`` across it: ``sqrt(b^2 + (a^2 - b^2) t^2)``."""
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    c = a * a - b * b

    def g(t):
        return np.sqrt(b * b + c * t * t)

    def g1(t):
        return c * t / g(t)

    def g2(t):
        r = g(t)
        return c / r - (c * t) ** 2 / r ** 3

    return FunctionProfile((g, g1, g2), smoothness=np.inf, even=True,
                           name=f"ellipsoid({a:g},{b:g})")


class SumProfile(Profile):
    def __init__(self, parts):
        flat = []
        for p in parts:
            flat.extend(p.parts if isinstance(p, SumProfile) else [p])
        self.parts = flat
        self.breakpoints = tuple(sorted({b for p in flat for b in p.breakpoints}))
        self.smoothness = min(p.smoothness for p in flat)
        self.even = all(p.even for p in flat)

    def value(self, t):
        return sum(p.value(t) for p in self.parts)

    def derivative(self, j):
        return SumProfile([p.derivative(j) for p in self.parts]) if j else self


class ScaledProfile(Profile):
    def __init__(self, base: Profile, c: float):
        self.base, self.c = base, c
        self.breakpoints = base.breakpoints
        self.smoothness = base.smoothness
        self.even = base.even

    def value(self, t):
        return self.c * self.base.value(t)

    def derivative(self, j):
        return ScaledProfile(self.base.derivative(j), self.c) if j else self


class ExpansionProfile(Profile):
    """Profile of a zonal :class:`HarmonicExpansion` (finite Legendre series)."""

    def __init__(self, expansion: HarmonicExpansion, order: int = 0):
        if not expansion.is_zonal:
            raise ValueError("need a zonal expansion")
        self.expansion = expansion
        self.order = order
        self.even = bool(np.all(np.abs(expansion.coefficients[1::2])
                                <= 1e-12 * max(1e-300, np.abs(expansion.coefficients).max())))

    def value(self, t):
        if self.order == 0:
            return zonal_values(self.expansion, t)
        return zonal_values(self.expansion, t, self.order)[self.order]

    def samples(self, t):
        if self.order:
            return super().samples(t)
        return zonal_values(self.expansion, np.asarray(t, dtype=float), 2)

    def derivative(self, j):
        if self.order + j > 2:
            raise ValueError("only derivatives up to order 2 are tabulated")
        return ExpansionProfile(self.expansion, self.order + j) if j else self


def random_even_convex_profile(rng: np.random.Generator, parts: int = 3) -> SumProfile:
    """Minkowski sum of random coaxial ellipsoids of revolution (smooth, even, convex)."""
    items = []
    for _ in range(parts):
        a, b = rng.uniform(0.2, 1.5, size=2)
        items.append(rng.uniform(0.2, 1.0) * ellipsoid_profile(a, b))
    return SumProfile(items)


def check_profile_derivatives(profile: Profile, t, h: float = 1e-5) -> float:
    """Max discrepancy between analytic and central-difference first derivatives."""
    t = np.asarray(t, dtype=float)
    fd = (profile.value(t + h) - profile.value(t - h)) / (2 * h)
    return float(np.max(np.abs(fd - profile.d1(t))))


__all__ = [
    "Profile", "PolynomialProfile", "SplineProfile", "FunctionProfile", "SumProfile",
    "ScaledProfile", "ExpansionProfile", "gegenbauer_polynomial", "gegenbauer_profile",
    "constant_profile", "abs_profile", "ellipsoid_profile", "random_even_convex_profile",
    "check_profile_derivatives",
]
