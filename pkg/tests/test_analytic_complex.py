import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ginibre_overlaps import analytic_complex as ac
from ginibre_overlaps import specfun
from ginibre_overlaps.errors import DomainError
from ginibre_overlaps.quadrature import QuadSpec, integrate_semi_infinite

# frozen oracle values
RHO_3_Z1 = 0.2927491576215958  # (1/pi) e^{-1} (1 + 1 + 1/2)
EDGE_1_0 = 0.0692380390694749486
EDGE_07_M08 = 0.244930303950446703
EDGE_15_12 = 3.26877200143237042e-6
SENS_2_00 = 4.0 / (3.0 * math.pi**2)
SENS_2_W03 = 0.118107019637935763


def _normalize(n, a, rel=1e-9):
    val, _ = integrate_semi_infinite(
        lambda t: ac.jpd_complex(n, t, a),
        QuadSpec(abs_tol=1e-14, rel_tol=rel, max_subdivisions=4000))
    return val


class TestCoeffs:
    def test_zero_argument_small_n(self):
        d1, d2, big1, big2 = ac.coeffs(2, 0.0).unscaled()
        assert (d1, d2) == (pytest.approx(1.0), pytest.approx(4.0))
        assert big1 == pytest.approx(2.0)
        d1, _, big1, _ = ac.coeffs(3, 0.0).unscaled()
        assert d1 == pytest.approx(2.0)
        assert big1 == pytest.approx(12.0)

    def test_zero_argument_identity(self):
        # d1(0) = (n-1)!(n-2)! and D1(0) = n(n-1) d1(0)
        for n in (2, 5, 9, 16):
            d1, _, big1, _ = ac.coeffs(n, 0.0).unscaled()
            ref = math.factorial(n - 1) * math.factorial(n - 2)
            assert d1 == pytest.approx(ref, rel=1e-12)
            assert big1 == pytest.approx(n * (n - 1) * ref, rel=1e-12)

    def test_n2_d1_is_pure_exponential(self):
        # at n = 2 the gamma products collapse: d1 = e^{-2a} exactly
        for a in (0.0, 0.7, 3.0, 41.5):
            b = ac.coeffs(2, a)
            assert b.d1 * math.exp(b.log_scale + 2.0 * a) == pytest.approx(1.0, rel=1e-12)

    def test_against_gamma_products_moderate(self):
        # direct Gamma-product evaluation is accurate while cancellation is
        # mild (a well below n); the polynomial route must match it
        for n, a in ((4, 0.5), (7, 2.0), (12, 3.5)):
            g = [math.exp(specfun.log_gamma_upper(m, a)) for m in (n - 1, n, n + 1, n + 2)]
            d1_ref = g[0] * g[2] - g[1] ** 2
            d2_ref = g[0] * g[3] - g[1] * g[2]
            b = ac.coeffs(n, a)
            scale = math.exp(b.log_scale)
            assert b.d1 * scale == pytest.approx(d1_ref, rel=1e-10)
            assert b.d2 * scale == pytest.approx(d2_ref, rel=1e-10)

    @settings(max_examples=150, deadline=None)
    @given(n=st.integers(min_value=2, max_value=60),
           a=st.floats(min_value=0.0, max_value=400.0))
    def test_d1_d2_nonnegative(self, n, a):
        b = ac.coeffs(n, a)
        assert b.d1 >= 0.0 and b.d2 >= 0.0
        assert math.isfinite(b.log_scale)

    def test_domain(self):
        with pytest.raises(DomainError):
            ac.coeffs(1, 0.0)
        with pytest.raises(DomainError):
            ac.coeffs(3, -1.0)


class TestJpdComplex:
    def test_z0_point(self):
        assert ac.jpd_complex(2, 1.0, 0.0) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-13)

    def test_z0_collapse(self):
        tgrid = np.geomspace(1e-3, 1e4, 29)
        for n in (2, 3, 7, 19, 40):
            a = ac.jpd_complex(n, tgrid, 0.0)
            b = ac.jpd_complex_zero(n, tgrid)
            assert np.all(np.abs(a - b) <= 1e-12 * np.maximum(b, 1e-300))

    def test_normalization(self):
        assert _normalize(3, 1.0) == pytest.approx(RHO_3_Z1, rel=1e-7)
        for n, a in ((2, 0.0), (5, 2.5), (8, 7.2)):
            assert _normalize(n, a) == pytest.approx(ac.density_complex(n, a), rel=1e-6)

    def test_cubic_tail(self):
        for n, a in ((5, 0.0), (9, 4.0)):
            ratio = ac.jpd_complex(n, 2e6, a) / ac.jpd_complex(n, 1e6, a)
            assert ratio == pytest.approx(0.125, rel=1e-2)

    def test_domain(self):
        with pytest.raises(DomainError):
            ac.jpd_complex(1, 1.0, 0.0)
        with pytest.raises(DomainError):
            ac.jpd_complex(3, -1.0, 0.0)
        with pytest.raises(DomainError):
            ac.jpd_complex(3, 1.0, -2.0)

    def test_large_n_at_spectral_edge(self):
        # n = 150 at |z|^2 = n: the regime where the raw gamma-product
        # coefficients cancel catastrophically and overflow doubles
        val, _ = integrate_semi_infinite(
            lambda t: ac.jpd_complex(150, t, 150.0),
            QuadSpec(abs_tol=1e-16, rel_tol=1e-9, max_subdivisions=4000))
        rho = ac.density_complex(150, 150.0)
        assert val == pytest.approx(rho, rel=1e-9)

    def test_extreme_t_is_clean_zero(self):
        assert ac.jpd_complex(5, 1e300, 2.0) == 0.0
        assert math.isfinite(ac.jpd_complex(5, 1e-300, 2.0))


class TestJpdComplexZero:
    def test_point(self):
        assert ac.jpd_complex_zero(2, 1.0) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-14)

    def test_small_t_limit_n2(self):
        assert ac.jpd_complex_zero(2, 1e-12) == pytest.approx(2.0 / math.pi, rel=1e-9)

    def test_t_integral_is_density_at_origin(self):
        for n in (2, 5, 11):
            val, _ = integrate_semi_infinite(lambda t: ac.jpd_complex_zero(n, t))
            assert val == pytest.approx(1.0 / math.pi, rel=1e-9)


class TestDensityComplex:
    def test_origin(self):
        for n in (1, 4, 25):
            assert ac.density_complex(n, 0.0) == pytest.approx(1.0 / math.pi, rel=1e-14)

    def test_n1(self):
        assert ac.density_complex(1, 1.0) == pytest.approx(math.exp(-1.0) / math.pi, rel=1e-13)

    def test_outside_disc(self):
        assert ac.density_complex(10, 25.0) == pytest.approx(
            specfun.reg_gamma_q(10, 25.0) / math.pi, rel=1e-13)
        assert ac.density_complex(10, 25.0) < 1e-4

    def test_domain(self):
        with pytest.raises(DomainError):
            ac.density_complex(0, 1.0)


class TestBulk:
    def test_point(self):
        assert ac.jpd_complex_bulk(1.0, 0.0) == pytest.approx(
            math.exp(-1.0) / math.pi, rel=1e-13)

    def test_support(self):
        assert ac.jpd_complex_bulk(1.0, 1.1) == 0.0
        assert ac.jpd_complex_bulk(1.0, 1.0) == 0.0

    def test_first_moment(self):
        # int s P ds = (1 - |w|^2)/pi
        for w in (0.0, 0.5, 0.8):
            val, _ = integrate_semi_infinite(lambda s: s * ac.jpd_complex_bulk(s, w))
            assert val == pytest.approx((1.0 - w * w) / math.pi, rel=1e-8)

    def test_finite_n_convergence_monotone(self):
        grid = [(s, w) for s in (0.5, 1.0, 2.0) for w in (0.0, 0.5)]
        sups = []
        for n in (10, 20, 40):
            sups.append(max(
                abs(n * ac.jpd_complex(n, n * s, n * w * w) - ac.jpd_complex_bulk(s, w))
                for s, w in grid))
        assert sups[0] > sups[1] > sups[2]


class TestEdge:
    def test_frozen_points(self):
        assert ac.jpd_complex_edge(1.0, 0.0) == pytest.approx(EDGE_1_0, rel=1e-12)
        assert ac.jpd_complex_edge(0.7, -0.8) == pytest.approx(EDGE_07_M08, rel=1e-12)
        assert ac.jpd_complex_edge(1.5, 1.2) == pytest.approx(EDGE_15_12, rel=1e-11)

    def test_large_delta_vanishes(self):
        assert ac.jpd_complex_edge(1.0, 30.0) == 0.0

    def test_sigma_integral_matches_edge_density(self):
        for delta in (0.0, -0.6, 0.8):
            val, _ = integrate_semi_infinite(lambda s: ac.jpd_complex_edge(s, delta))
            assert val == pytest.approx(ac.density_complex_edge(delta), rel=1e-8)

    def test_edge_density(self):
        assert ac.density_complex_edge(0.0) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)
        assert ac.density_complex_edge(-30.0) == pytest.approx(1.0 / math.pi, rel=1e-12)
        assert ac.density_complex_edge(1.0) == pytest.approx(
            specfun.erfc(math.sqrt(2.0)) / (2.0 * math.pi), rel=1e-13)

    def test_bulk_edge_matching_monotone(self):
        # substituting sigma = sqrt(N) s, delta = sqrt(N)(|w|^2-1)/2 into the
        # edge law recovers the bulk law as N grows
        grid = [(s, w) for s in (0.5, 1.0, 2.0) for w in (0.3, 0.5, 0.7)]
        sups = []
        for n in (25, 100, 400):
            rt = math.sqrt(n)
            sups.append(max(
                abs(rt * ac.jpd_complex_edge(rt * s, 0.5 * rt * (w * w - 1.0))
                    - ac.jpd_complex_bulk(s, w))
                for s, w in grid))
        assert sups[0] > sups[1] > sups[2]

    def test_finite_n_convergence_monotone(self):
        # the edge limit of the finite-N law under t = sqrt(N) sigma,
        # |z| = sqrt(N) + delta; converges at the sqrt(N) scaling
        grid = [(s, d) for s in (0.5, 1.0, 2.0) for d in (0.0, 0.5)] + [(1.0, -0.5)]
        sups = []
        for n in (10, 20, 40):
            rt = math.sqrt(n)
            sups.append(max(
                abs(rt * ac.jpd_complex(n, rt * s, (rt + d) ** 2)
                    - ac.jpd_complex_edge(s, d))
                for s, d in grid))
        assert sups[0] > sups[1] > sups[2]


class TestSensitivity:
    def test_beta_integral_oracle(self):
        # N=2, w=0, z=0: 4/(3 pi^2) via the exact Beta integral
        assert ac.sensitivity_density(2, 0.0, 0.0) == pytest.approx(SENS_2_00, rel=1e-9)

    def test_frozen_point(self):
        assert ac.sensitivity_density(2, 0.09, 0.0) == pytest.approx(SENS_2_W03, rel=1e-9)

    def test_w_normalization(self):
        # int pi(w, z) d^2w = rho(z): radial quadrature over |w|
        n, a = 3, 0.5

        def radial(w):
            return np.array([2.0 * math.pi * wi * ac.sensitivity_density(n, wi * wi, a)
                             for wi in np.atleast_1d(w)])

        val, _ = integrate_semi_infinite(radial, QuadSpec(1e-12, 1e-7, 800))
        assert val == pytest.approx(ac.density_complex(n, a), rel=1e-6)
