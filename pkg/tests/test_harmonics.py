import math

import numpy as np
import pytest
import sympy as sp
from scipy.special import eval_gegenbauer

from minkval.errors import AliasingError, DomainError
from minkval.harmonics import (HarmonicExpansion, SphereGrid, analyze, dimension_N,
                               gegenbauer_rule, legendre_eval, legendre_table, project,
                               project_direct, smooth_Mj, sphere_area, spectral_tails,
                               synthesize, theta_cutoff, ualpha_norm_estimate,
                               zonal_multiplier, zonal_values)
from minkval.harmonics import sphere as sph
from minkval.discriminant import box_n, laplacian

from conftest import random_expansion


def rodrigues(n, k):
    """P_k^n from the Rodrigues formula, expanded symbolically."""
    t = sp.symbols("t")
    w = (1 - t ** 2) ** sp.Rational(n - 3, 2)
    num = sp.diff((1 - t ** 2) ** (k + sp.Rational(n - 3, 2)), t, k)
    c = (-1) ** k * sp.gamma(sp.Rational(n - 1, 2)) / (2 ** k * sp.gamma(k + sp.Rational(n - 1, 2)))
    return t, sp.simplify(c * num / w)


class TestLegendre:
    def test_examples(self):
        assert legendre_eval(5, 7, 1.0) == pytest.approx(1.0, abs=1e-15)
        assert legendre_eval(3, 1, 0.3) == pytest.approx(0.3)
        assert legendre_eval(3, 2, 0.0) == pytest.approx(-0.5)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    @pytest.mark.parametrize("k", [0, 1, 2, 3, 4, 5])
    def test_matches_rodrigues(self, n, k):
        t, expr = rodrigues(n, k)
        f = sp.lambdify(t, expr, "numpy")
        x = np.linspace(-0.95, 0.95, 11)
        np.testing.assert_allclose(legendre_eval(n, k, x), f(x) * np.ones_like(x), atol=1e-12)

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_matches_scipy_gegenbauer(self, n):
        x = np.linspace(-1, 1, 41)
        lam = (n - 2) / 2
        tab = legendre_table(n, 20, x)
        for k in range(21):
            ref = eval_gegenbauer(k, lam, x) / eval_gegenbauer(k, lam, 1.0)
            np.testing.assert_allclose(tab[k], ref, atol=1e-12)

    def test_derivatives_against_finite_differences(self):
        x = np.linspace(-0.9, 0.9, 13)
        p, d1, d2 = legendre_table(5, 10, x, derivatives=2)
        h = 1e-6
        fd1 = (legendre_table(5, 10, x + h) - legendre_table(5, 10, x - h)) / (2 * h)
        fd2 = (legendre_table(5, 10, x + 1e-4) - 2 * p + legendre_table(5, 10, x - 1e-4)) / 1e-8
        np.testing.assert_allclose(d1, fd1, atol=1e-6)
        np.testing.assert_allclose(d2, fd2, atol=1e-4)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            legendre_eval(3, 2, 1.0 + 1e-9)
        assert legendre_eval(3, 2, 1.0 + 1e-13) == pytest.approx(1.0)


class TestDimension:
    def test_examples(self):
        assert dimension_N(3, 0) == 1
        assert dimension_N(3, 2) == 5
        assert dimension_N(4, 3) == 16

    @pytest.mark.parametrize("n", range(3, 9))
    def test_integer_formula(self, n):
        for k in range(12):
            # (n+2k-2)/(n+k-2) * C(n+k-2, n-2) with exact rational arithmetic
            ref = sp.Rational(n + 2 * k - 2, n + k - 2) * sp.binomial(n + k - 2, n - 2)
            assert dimension_N(n, k) == int(ref)

    def test_block_sizes_on_sphere(self):
        L = 10
        counts = np.bincount(sph.degrees(L))
        assert list(counts) == [dimension_N(3, k) for k in range(L + 1)]

    def test_domain(self):
        with pytest.raises(DomainError):
            dimension_N(2, 1)


class TestQuadrature:
    @pytest.mark.parametrize("n", [3, 4, 5, 7, 8])
    def test_monomials_exact(self, n):
        rule = gegenbauer_rule(n, 20)
        assert np.all(rule.weights > 0)
        e = (n - 3) / 2
        for m in range(21):
            exact = 0.0 if m % 2 else math.gamma((m + 1) / 2) * math.gamma(e + 1) / math.gamma(m / 2 + e + 1.5)
            assert rule.integrate(rule.nodes ** m) == pytest.approx(exact, abs=1e-13)

    def test_breakpoint_rule_integrates_abs_exactly(self):
        rule = gegenbauer_rule(3, 10, breakpoints=(0.0,))
        assert rule.integrate(np.abs(rule.nodes)) == pytest.approx(1.0, abs=1e-14)

    def test_sphere_total_mass(self, grid):
        assert np.all(grid.weights > 0)
        assert grid.total_mass == pytest.approx(4 * np.pi, abs=1e-12)

    def test_sphere_rule_exactness(self, small_grid):
        p = small_grid.points
        assert small_grid.integrate(p[..., 2] ** 2) == pytest.approx(4 * np.pi / 3, abs=1e-13)
        assert small_grid.integrate(p[..., 0] ** 4) == pytest.approx(4 * np.pi / 5, abs=1e-13)


class TestMultiplier:
    def test_examples(self):
        one = lambda t: np.ones_like(t)  # noqa: E731
        assert zonal_multiplier(3, one, 0) == pytest.approx(4 * np.pi)
        for n in (3, 5, 8):
            assert zonal_multiplier(n, one, 2) == pytest.approx(0.0, abs=1e-13)
        rule = gegenbauer_rule(3, 20, (0.0,))
        assert zonal_multiplier(3, np.abs, 0, rule) == pytest.approx(2 * np.pi)

    def test_warning_beyond_design_degree(self):
        with pytest.warns(RuntimeWarning):
            zonal_multiplier(3, np.cos, 30, gegenbauer_rule(3, 10))


class TestTransforms:
    def test_orthonormal_basis(self, small_grid):
        L = 12
        B = sph.basis_at(small_grid.theta.repeat(small_grid.n_phi),
                         np.tile(small_grid.phi, small_grid.n_theta), L)
        gram = (B * small_grid.weights.ravel()) @ B.T
        np.testing.assert_allclose(gram, np.eye(B.shape[0]), atol=1e-12)

    def test_round_trip(self, rng, grid):
        e = random_expansion(rng, 48)
        back = analyze(synthesize(e, grid), grid, 48)
        np.testing.assert_allclose(back.coefficients, e.coefficients, atol=1e-10)

    def test_zero_and_constant(self, grid):
        assert np.all(synthesize(HarmonicExpansion.zeros(3, 8), grid) == 0)
        c = np.zeros(81)
        c[0] = 2.5 * np.sqrt(4 * np.pi)
        np.testing.assert_allclose(synthesize(HarmonicExpansion(3, 8, c), grid), 2.5, atol=1e-14)

    def test_aliasing_flagged(self, rng, grid):
        e = random_expansion(rng, 30)
        with pytest.raises(AliasingError):
            analyze(synthesize(e, grid), grid, 20, alias_tol=1e-6)
        analyze(synthesize(e.truncate(20), grid), grid, 20, alias_tol=1e-10)

    def test_parseval(self, rng, grid):
        e = random_expansion(rng, 30)
        f = synthesize(e, grid)
        assert grid.integrate(f ** 2) == pytest.approx(np.sum(e.block_norms() ** 2), rel=1e-10)

    def test_zonal_parseval(self):
        n = 6
        rule = gegenbauer_rule(n, 60)
        coef = np.array([1.0, 0.3, -0.2, 0.1, 0.05])
        e = HarmonicExpansion(n, 4, coef, "zonal")
        vals = zonal_values(e, rule.nodes)
        assert rule.sphere_integral(vals ** 2) == pytest.approx(np.sum(e.block_norms() ** 2), rel=1e-12)

    def test_scattered_matches_grid(self, rng, small_grid):
        e = random_expansion(rng, 10)
        th = small_grid.theta.repeat(small_grid.n_phi)
        ph = np.tile(small_grid.phi, small_grid.n_theta)
        for dt, dp in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
            a = synthesize(e, small_grid, dt, dp).ravel()
            b = sph.evaluate_at(e.coefficients, th, ph, 10, dt, dp)
            np.testing.assert_allclose(a, b, atol=1e-11)


class TestProjection:
    def test_constant(self, grid):
        np.testing.assert_allclose(project(np.full(grid.shape, 3.0), grid, 0), 3.0, atol=1e-13)

    def test_single_harmonic(self, grid):
        c = np.zeros(9)
        c[sph.index(2, 1)] = 1.0
        y = synthesize(HarmonicExpansion(3, 2, c), grid)
        np.testing.assert_allclose(project(y, grid, 2), y, atol=1e-13)
        np.testing.assert_allclose(project(y, grid, 3), 0.0, atol=1e-13)

    def test_square_of_coordinate(self, grid):
        f = grid.points[..., 2] ** 2
        np.testing.assert_allclose(project(f, grid, 0), 1.0 / 3.0, atol=1e-13)

    def test_against_reproducing_kernel(self, rng):
        g = SphereGrid(10, 20)
        f = synthesize(random_expansion(rng, 4), g)
        for k in range(5):
            np.testing.assert_allclose(project(f, g, k), project_direct(f, g, k), atol=1e-11)

    def test_idempotent_self_adjoint_orthogonal(self, rng, grid):
        f = synthesize(random_expansion(rng, 12), grid)
        g = synthesize(random_expansion(rng, 12), grid)
        p2 = project(f, grid, 2)
        np.testing.assert_allclose(project(p2, grid, 2), p2, atol=1e-12)
        assert grid.integrate(p2 * g) == pytest.approx(grid.integrate(f * project(g, grid, 2)), abs=1e-10)
        norm = grid.integrate(f * f)
        for k, l in [(1, 2), (3, 7), (0, 12)]:
            assert abs(grid.integrate(project(f, grid, k) * project(f, grid, l))) <= 1e-10 * norm


class TestLaplacian:
    @pytest.mark.parametrize("k", [0, 1, 2, 5, 9])
    def test_eigenvalue_law(self, k):
        c = np.zeros((k + 1) ** 2)
        c[sph.index(k, min(k, 1))] = 1.0
        e = HarmonicExpansion(3, k, c)
        lap = laplacian(e)
        np.testing.assert_allclose(lap.coefficients, -k * (k + 1) * c, atol=1e-12)

    def test_eigenvalue_law_zonal(self):
        n, K = 7, 6
        e = HarmonicExpansion(n, K, np.ones(K + 1), "zonal")
        k = np.arange(K + 1)
        np.testing.assert_allclose(laplacian(e).coefficients, -k * (k + n - 2), atol=1e-12)

    def test_box_against_direct_laplacian(self, rng, grid):
        # Delta_S f = f_tt + cot f_t + f_pp / sin^2
        e = random_expansion(rng, 10)
        s = grid.sin_theta[:, None]
        direct = (synthesize(e, grid, 2, 0) + grid.x[:, None] / s * synthesize(e, grid, 1, 0)
                  + synthesize(e, grid, 0, 2) / s ** 2)
        np.testing.assert_allclose(synthesize(laplacian(e), grid), direct, atol=1e-9)


class TestSmoothing:
    def test_cutoff_shape(self):
        x = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
        v = theta_cutoff(x)
        assert v[0] == v[1] == v[2] == 1.0
        assert 0 < v[3] < 1
        assert v[4] == v[5] == 0.0
        xs = np.linspace(0, 3, 301)
        assert np.all(np.diff(theta_cutoff(xs)) <= 0)

    def test_fixes_low_degree(self, rng):
        e = random_expansion(rng, 6).pad(30)
        np.testing.assert_array_equal(smooth_Mj(e, 6).coefficients, e.coefficients)

    def test_inactive_cutoff(self, rng):
        e = random_expansion(rng, 20)
        np.testing.assert_array_equal(smooth_Mj(e, 20).coefficients, e.coefficients)

    def test_kills_high_degree(self):
        j = 4
        c = np.zeros((2 * j + 2) ** 2)
        c[sph.index(2 * j + 1, 3)] = 1.0
        out = smooth_Mj(HarmonicExpansion(3, 2 * j + 1, c), j)
        assert np.all(out.coefficients == 0)


class TestUalpha:
    def test_constant(self):
        c = np.zeros(49)
        c[0] = -1.7 * np.sqrt(4 * np.pi)
        e = HarmonicExpansion(3, 6, c)
        for a in (0.0, 1.0, 2.5):
            assert ualpha_norm_estimate(e, a) == pytest.approx(1.7, rel=1e-12)

    def test_single_harmonic(self, grid):
        k = 5
        c = np.zeros((k + 1) ** 2)
        c[sph.index(k, 2)] = 1.0
        e = HarmonicExpansion(3, k, c)
        sup = np.abs(synthesize(e, SphereGrid.for_degree(k))).max()
        tails = spectral_tails(e)
        np.testing.assert_allclose(tails[:k], 1.0, atol=1e-14)
        assert tails[k] == 0.0
        assert ualpha_norm_estimate(e, 0.0) == pytest.approx(max(sup, 1.0))

    def test_monotone_in_band_limit(self, rng):
        e = random_expansion(rng, 20)
        vals = [ualpha_norm_estimate(e.truncate(K), 1.5) for K in (5, 10, 15, 20)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_smoothing_error_decay(self, rng):
        # fitted constant C with ||f - M_j f|| <= C ||f|| j^-alpha over a random family
        alpha = 1.0
        ratios = []
        for _ in range(8):
            c = rng.normal(size=41 ** 2) / (1 + sph.degrees(40)) ** 2.5
            f = HarmonicExpansion(3, 40, c)
            nf = ualpha_norm_estimate(f, alpha)
            for j in (2, 4, 8, 16):
                ratios.append(ualpha_norm_estimate(f - smooth_Mj(f, j), alpha) * j ** alpha / nf)
        C = max(ratios)
        assert np.isfinite(C) and C < 10.0
