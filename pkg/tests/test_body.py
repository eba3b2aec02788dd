import json
import math

import numpy as np
import pytest
import sympy as sp

from minkval import body as bd
from minkval.discriminant import area_density, box_n
from minkval.errors import AliasingError, NotConvex, NotPositive, RepresentationMismatch
from minkval.harmonics import HarmonicExpansion, SphereGrid, synthesize
from minkval.harmonics import sphere as sph
from minkval.profiles import (PolynomialProfile, constant_profile,
                              ellipsoid_profile, gegenbauer_profile)


def y20_body(eps, grid, K=48):
    return bd.harmonic_perturbation({(2, 0): eps}, K, grid)


class TestZonalConstruction:
    def test_ball_eigenvalues(self):
        B = bd.make_zonal_body(5, constant_profile(1.0), 16)
        np.testing.assert_allclose(B.mu, 1.0, atol=1e-14)
        np.testing.assert_allclose(B.nu, 1.0, atol=1e-14)

    def test_translated_ball(self):
        B = bd.make_zonal_body(3, PolynomialProfile([1.0, 0.1]), 16)
        np.testing.assert_allclose(B.mu, 1.0, atol=1e-14)
        np.testing.assert_allclose(B.nu, 1.0, atol=1e-14)

    def test_eigenvalues_symbolic(self):
        t = sp.symbols("t")
        g = 1 + sp.Rational(1, 5) * t ** 2 - sp.Rational(1, 20) * t ** 4
        mu = sp.lambdify(t, g - t * sp.diff(g, t))
        nu = sp.lambdify(t, g - t * sp.diff(g, t) + (1 - t ** 2) * sp.diff(g, t, 2))
        B = bd.make_zonal_body(3, PolynomialProfile([1, 0, 0.2, 0, -0.05]), 16)
        x = B.rule.nodes
        np.testing.assert_allclose(B.mu, mu(x), atol=1e-13)
        np.testing.assert_allclose(B.nu, nu(x), atol=1e-13)

    def test_not_convex(self):
        with pytest.raises(NotConvex) as info:
            bd.make_zonal_body(3, gegenbauer_profile(3, [1.0, 0.0, 0.9]), 16)
        assert info.value.eigenvalue < 0
        # dense-scan oracle: nu = 1 + 0.9 (P2 - t P2' + (1-t^2) P2'') goes negative
        t = np.linspace(-1, 1, 2001)
        nu = 1 + 0.9 * (1.5 * t ** 2 - 0.5 - 3 * t ** 2 + 3 * (1 - t ** 2))
        assert nu.min() < 0

    def test_not_positive(self):
        with pytest.raises(NotPositive):
            bd.make_zonal_body(3, PolynomialProfile([-0.1, 1.0]), 8)

    def test_from_coefficients_and_expansion(self):
        B1 = bd.make_zonal_body(4, [1.0, 0.0, 0.05], 8)
        B2 = bd.make_zonal_body(4, B1.expansion, 8)
        np.testing.assert_allclose(B2.values, B1.values, atol=1e-13)


class TestGridConstruction:
    def test_ball(self, grid):
        B = bd.ball(0.7, grid=grid)
        np.testing.assert_allclose(B.values, 0.7, atol=1e-14)
        assert B.min_eigenvalue == pytest.approx(0.7, abs=1e-8)

    def test_small_perturbation_valid(self, grid):
        c = np.zeros(9)
        c[0] = np.sqrt(4 * np.pi)
        c[sph.index(2, 0)] = 0.05
        h = synthesize(HarmonicExpansion(3, 2, c), grid)
        K = bd.make_grid_body(h, grid)
        lo, _ = K.eigenvalues
        assert lo.min() > 0

    def test_large_perturbation_rejected(self, grid):
        with pytest.raises(NotConvex):
            y20_body(2.0, grid)

    def test_aliasing(self, rng, grid):
        c = rng.normal(size=60 ** 2)
        c[0] = 100.0
        h = synthesize(HarmonicExpansion(3, 59, c), SphereGrid.for_degree(60))
        with pytest.raises(ValueError):
            bd.make_grid_body(h, grid)
        g = SphereGrid.for_degree(60)
        with pytest.raises(AliasingError):
            bd.make_grid_body(h, g, 48)

    def test_hessian_against_ambient(self, rng, small_grid):
        K = bd.harmonic_perturbation({(3, 1): 0.05, (2, -2): 0.04}, 12, small_grid)
        H = bd.hessian_at(K.expansion, small_grid.points.reshape(-1, 3))
        e_t, e_p = small_grid.frame
        e_t, e_p = e_t.reshape(-1, 3), e_p.reshape(-1, 3)
        htt, htp, hpp = (a.ravel() for a in K.hessian)
        np.testing.assert_allclose(np.einsum("ni,nij,nj->n", e_t, H, e_t), htt, atol=1e-10)
        np.testing.assert_allclose(np.einsum("ni,nij,nj->n", e_t, H, e_p), htp, atol=1e-10)
        np.testing.assert_allclose(np.einsum("ni,nij,nj->n", e_p, H, e_p), hpp, atol=1e-10)

    def test_trace_identity(self, small_grid):
        K = bd.harmonic_perturbation({(2, 0): 0.05, (4, 3): 0.03}, 12, small_grid)
        htt, _, hpp = K.hessian
        np.testing.assert_allclose((htt + hpp) / 2, synthesize(box_n(K.expansion), small_grid),
                                   atol=1e-10)

    def test_rotation_equivariance_of_hessian(self, rng, small_grid):
        K = bd.harmonic_perturbation({(2, 1): 0.05, (5, -3): 0.02}, 12, small_grid)
        R = bd.random_rotation(rng)
        KR = bd.rotate(K, R)
        pts = small_grid.points.reshape(-1, 3)
        HR = bd.hessian_at(KR.expansion, pts)
        H = bd.hessian_at(K.expansion, pts @ R)
        np.testing.assert_allclose(HR, np.einsum("ij,njk,lk->nil", R, H, R), atol=1e-8)

    def test_immutable(self, grid):
        B = bd.ball(grid=grid)
        with pytest.raises(ValueError):
            B.values[0, 0] = 2.0


class TestDistances:
    def test_balls(self, grid):
        a, b = bd.ball(0.5, grid=grid), bd.ball(1.25, grid=grid)
        assert bd.hausdorff_distance(a, b) == pytest.approx(0.75, abs=1e-12)
        assert bd.hausdorff_distance(a, a) == 0.0
        assert bd.lp_distance(a, b, 2) == pytest.approx(0.75 * np.sqrt(4 * np.pi), abs=1e-12)
        for p in (1, 2, 3.5):
            assert bd.lp_distance(b, b, p) == 0.0

    def test_zonal_balls(self):
        a = bd.ball(0.5, n=6, kind="zonal", max_degree=8)
        b = bd.ball(1.0, n=6, kind="zonal", max_degree=8)
        area = 2 * math.pi ** 3 / math.gamma(3)
        assert bd.lp_distance(a, b, 2) == pytest.approx(0.5 * math.sqrt(area), rel=1e-13)
        assert bd.hausdorff_distance(a, b) == pytest.approx(0.5, abs=1e-14)

    def test_perturbation(self, grid):
        eps = 0.05
        K = y20_body(eps, grid)
        B = bd.ball(grid=grid)
        y20 = np.sqrt(5 / (16 * np.pi)) * (3 * grid.x ** 2 - 1)
        assert bd.hausdorff_distance(K, B) == pytest.approx(eps * np.abs(y20).max(), rel=1e-12)
        assert bd.lp_distance(K, B, 2) == pytest.approx(eps, rel=1e-12)

    def test_mismatch(self, grid):
        with pytest.raises(RepresentationMismatch):
            bd.hausdorff_distance(bd.ball(grid=grid), bd.ball(kind="zonal", max_degree=8))


class TestVolumes:
    def test_mean_width(self, grid):
        assert bd.mean_width(bd.ball(grid=grid)) == pytest.approx(2.0, abs=1e-14)
        assert bd.mean_width(bd.ball(1.7, grid=grid)) == pytest.approx(3.4, abs=1e-13)
        assert bd.mean_width(y20_body(0.05, grid)) == pytest.approx(2.0, abs=1e-14)

    @pytest.mark.parametrize("i,expected", [(1, 4.0), (2, 2 * np.pi), (3, 4 * np.pi / 3)])
    def test_ball_values(self, grid, i, expected):
        B = bd.ball(grid=grid)
        assert bd.intrinsic_volume(B, i, "support") == pytest.approx(expected, rel=1e-12)
        if i < 3:
            assert bd.intrinsic_volume(B, i) == pytest.approx(expected, rel=1e-12)

    def test_homogeneity(self, grid):
        for i in (1, 2):
            v = bd.intrinsic_volume(bd.ball(grid=grid), i)
            assert bd.intrinsic_volume(bd.ball(1.3, grid=grid), i) == pytest.approx(1.3 ** i * v)

    def test_routes_agree(self, grid):
        K = bd.harmonic_perturbation({(2, 1): 0.05, (3, 0): 0.03}, 48, grid)
        for i in (1, 2):
            assert bd.intrinsic_volume(K, i) == pytest.approx(bd.intrinsic_volume(K, i, "support"),
                                                              rel=1e-12)

    def test_first_order_term_vanishes(self, grid):
        v = [bd.intrinsic_volume(y20_body(e, grid), 1) for e in (-1e-3, 0.0, 1e-3)]
        assert abs(v[2] - v[0]) / 2e-3 < 1e-10
        assert v[1] == pytest.approx(4.0)

    def test_zonal_volume_nd(self):
        # unit ball in R^5: V_5 = kappa_5, V_1 = n kappa_n / kappa_{n-1}
        B = bd.ball(n=5, kind="zonal", max_degree=8)
        assert bd.intrinsic_volume(B, 5, "support") == pytest.approx(8 * np.pi ** 2 / 15, rel=1e-12)
        assert bd.intrinsic_volume(B, 1) == pytest.approx(5 * (8 * np.pi ** 2 / 15) / (np.pi ** 2 / 2),
                                                          rel=1e-12)


class TestTV:
    def test_constant_densities(self, grid):
        f = area_density(bd.ball(grid=grid), 2)
        g = area_density(bd.ball(np.sqrt(1.1), grid=grid), 2)
        assert bd.tv_distance(f, f) == 0.0
        assert bd.tv_distance(f, g) == pytest.approx(0.5 * 0.1 * 4 * np.pi, rel=1e-12)

    def test_sup_bound(self, rng, grid):
        for _ in range(3):
            f = area_density(bd.random_body(rng, grid=grid), 2)
            g = area_density(bd.random_body(rng, grid=grid), 2)
            assert bd.tv_distance(f, g) <= 2 * np.pi * np.max(np.abs(f.values - g.values)) + 1e-12


class TestOperations:
    def test_minkowski_additive(self, grid):
        K = y20_body(0.05, grid)
        L = bd.harmonic_perturbation({(3, 2): 0.04}, 48, grid)
        np.testing.assert_allclose(bd.minkowski_sum(K, L).values, K.values + L.values, atol=1e-14)

    def test_translate(self, grid):
        y = np.array([0.1, -0.2, 0.05])
        T = bd.translate(bd.ball(grid=grid), y)
        np.testing.assert_allclose(T.values, 1 + grid.points @ y, atol=1e-13)

    def test_zonal_grid_agreement(self, grid):
        prof = ellipsoid_profile(1.2, 0.9)
        Z = bd.ZonalBody(3, prof, 48)
        G = bd.grid_body_from_profile(prof, grid)
        BZ, BG = bd.ball(kind="zonal"), bd.ball(grid=grid)
        assert bd.mean_width(Z) == pytest.approx(bd.mean_width(G), abs=1e-8)
        for i in (1, 2):
            assert bd.intrinsic_volume(Z, i) == pytest.approx(bd.intrinsic_volume(G, i), abs=1e-8)
        assert bd.lp_distance(Z, BZ) == pytest.approx(bd.lp_distance(G, BG), abs=1e-8)
        # grid nodes lie on the polar GL nodes, so the sup norms see the same values
        assert bd.hausdorff_distance(Z, BZ) == pytest.approx(bd.hausdorff_distance(G, BG), abs=1e-8)


class TestSerialization:
    def test_grid_round_trip(self, rng, small_grid):
        K = bd.translate(bd.harmonic_perturbation({(2, 1): 0.04, (4, -3): 0.02}, 12, small_grid),
                         rng.normal(size=3) * 0.1)
        back = bd.from_json(bd.to_json(K))
        np.testing.assert_array_equal(back.expansion.coefficients, K.expansion.coefficients)
        assert json.loads(bd.to_json(K))["format"] == 1

    def test_zonal_round_trip(self):
        Z = bd.ZonalBody(4, ellipsoid_profile(1.1, 0.9), 16)
        back = bd.from_json(bd.to_json(Z))
        assert bd.hausdorff_distance(Z, back) < 1e-7
        E = bd.make_zonal_body(4, [1.0, 0.0, 0.03], 8)
        back = bd.from_json(bd.to_json(E))
        assert bd.hausdorff_distance(E, back) < 1e-14

    def test_bad_format(self):
        with pytest.raises(ValueError):
            bd.from_json(json.dumps({"format": 2}))
