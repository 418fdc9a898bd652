import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atomcavity.errors import DomainError
from atomcavity.specfun import (WeierstrassCoeffs, complete_elliptic_k,
                                cosine_integral, depressed_cubic_roots,
                                error_function, jacobi_elliptic,
                                weierstrass_p)
from conftest import quad_cosine_integral, quad_elliptic_k, series_erf


class TestCompleteEllipticK:
    def test_zero_modulus(self):
        assert complete_elliptic_k(0.0) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_logarithmic_divergence(self):
        # near k = 1, K(k) approaches ln(4 / sqrt(1 - k^2))
        k = 0.9999
        approx = math.log(4.0 / math.sqrt(1.0 - k * k))
        assert complete_elliptic_k(k) == pytest.approx(approx, rel=0.01)

    def test_against_quadrature(self):
        for k in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
            assert complete_elliptic_k(k) == pytest.approx(
                quad_elliptic_k(k), abs=1e-12)

    def test_monotone(self):
        ks = np.linspace(0.0, 0.99, 50)
        vals = [complete_elliptic_k(k) for k in ks]
        assert np.all(np.diff(vals) > 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            complete_elliptic_k(1.0)
        with pytest.raises(DomainError):
            complete_elliptic_k(-0.1)


class TestJacobiElliptic:
    def test_circular_limit(self):
        for u in (-2.0, 0.3, 1.7):
            t = jacobi_elliptic(u, 0.0)
            assert t.sn == pytest.approx(math.sin(u), abs=1e-14)
            assert t.cn == pytest.approx(math.cos(u), abs=1e-14)
            assert t.dn == pytest.approx(1.0, abs=1e-14)

    def test_hyperbolic_limit(self):
        for u in (-1.2, 0.4, 2.5):
            t = jacobi_elliptic(u, 1.0)
            assert t.sn == pytest.approx(math.tanh(u), abs=1e-14)
            assert t.cn == pytest.approx(1.0 / math.cosh(u), abs=1e-14)
            assert t.dn == pytest.approx(1.0 / math.cosh(u), abs=1e-14)

    def test_quarter_period(self):
        # at u = K(k) (independent quadrature value): sn = 1, cn = 0
        k = 0.7
        K = quad_elliptic_k(k)
        t = jacobi_elliptic(K, k)
        assert t.sn == pytest.approx(1.0, abs=1e-12)
        assert t.cn == pytest.approx(0.0, abs=1e-12)
        assert t.dn == pytest.approx(math.sqrt(1.0 - k * k), abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(u=st.floats(-20.0, 20.0), k=st.floats(0.0, 1.0))
    def test_identities(self, u, k):
        t = jacobi_elliptic(u, k)
        assert t.sn ** 2 + t.cn ** 2 == pytest.approx(1.0, abs=1e-12)
        assert t.dn ** 2 + (k * t.sn) ** 2 == pytest.approx(1.0, abs=1e-12)
        assert all(-1.0 - 1e-12 <= v <= 1.0 + 1e-12
                   for v in (t.sn, t.cn, t.dn))

    def test_periodicity(self):
        for k in (0.3, 0.8, 0.95):
            period = 4.0 * complete_elliptic_k(k)
            for u in (-3.0, 0.7, 11.0):
                a = jacobi_elliptic(u, k)
                b = jacobi_elliptic(u + period, k)
                assert a.sn == pytest.approx(b.sn, abs=1e-9)
                assert a.cn == pytest.approx(b.cn, abs=1e-9)
                assert a.dn == pytest.approx(b.dn, abs=1e-9)

    def test_array_argument(self):
        us = np.linspace(-3, 3, 17)
        sn, cn, dn = jacobi_elliptic(us, 0.6)
        for i, u in enumerate(us):
            t = jacobi_elliptic(float(u), 0.6)
            assert sn[i] == pytest.approx(t.sn, abs=1e-14)
            assert cn[i] == pytest.approx(t.cn, abs=1e-14)
            assert dn[i] == pytest.approx(t.dn, abs=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            jacobi_elliptic(1.0, 1.5)


class TestDepressedCubicRoots:
    def test_degenerate_pair(self):
        # g2 = 3 A2^2, g3 = -A2^3 gives roots (-A2, A2/2, A2/2)
        A2 = -2.0 / 3.0
        e1, e2, e3 = depressed_cubic_roots(3.0 * A2 ** 2, -A2 ** 3)
        assert e1 == pytest.approx(-A2, abs=1e-12)
        assert e2 == pytest.approx(A2 / 2, abs=1e-8)
        assert e3 == pytest.approx(A2 / 2, abs=1e-8)

    def test_all_zero(self):
        assert depressed_cubic_roots(0.0, 0.0) == (0.0, 0.0, 0.0)

    @settings(max_examples=200, deadline=None)
    @given(e1=st.floats(0.1, 5.0), e2_frac=st.floats(-0.99, 0.99))
    def test_random_positive_discriminant(self, e1, e2_frac):
        # construct a zero-sum real triple, recover it from its invariants
        e2 = e2_frac * e1 / 2.0 - e1 / 4.0
        e3 = -e1 - e2
        if not e1 >= e2 >= e3:
            return
        g2 = -4.0 * (e1 * e2 + e1 * e3 + e2 * e3)
        g3 = 4.0 * e1 * e2 * e3
        roots = depressed_cubic_roots(g2, g3)
        scale = max(1.0, abs(g2), abs(g3))
        for r in roots:
            assert abs(4.0 * r ** 3 - g2 * r - g3) < 1e-10 * scale
        assert sum(roots) == pytest.approx(0.0, abs=1e-10)
        assert roots[0] >= roots[1] >= roots[2]

    def test_complex_pair_raises(self):
        with pytest.raises(DomainError):
            depressed_cubic_roots(-1.0, 0.5)


class TestWeierstrassP:
    def test_degenerate_cotangent_form(self):
        # e2 = e3, e1 > 0: P(z) = e1 + (3/2) e1 cot^2(sqrt(3 e1/2) z);
        # with A2 = -e1 the invariants are g2 = 3 A2^2, g3 = -A2^3 = e1^3
        e1 = 0.8
        coeffs = WeierstrassCoeffs.from_invariants(3.0 * e1 ** 2, e1 ** 3)
        assert coeffs.e1 == pytest.approx(e1, abs=1e-10)
        assert coeffs.e2 == pytest.approx(coeffs.e3, abs=1e-9)
        w = math.sqrt(1.5 * e1)
        for z in (0.2, 0.6, 1.1):
            expected = e1 + 1.5 * e1 / math.tan(w * z) ** 2
            assert weierstrass_p(z, coeffs) == pytest.approx(expected, rel=1e-10)

    def test_pole_leading_term(self):
        coeffs = WeierstrassCoeffs.from_invariants(4.0, 1.0)
        z = 1e-4
        assert weierstrass_p(z, coeffs) * z * z == pytest.approx(1.0, abs=1e-6)

    def test_defining_ode_residual(self):
        # (P')^2 = 4 P^3 - g2 P - g3, P' by central difference
        for g2, g3 in ((4.0, 1.0), (7.0, -2.0), (3.0, 0.2)):
            coeffs = WeierstrassCoeffs.from_invariants(g2, g3)
            h = 1e-6
            for z in (0.4, 0.8, 1.3):
                p = weierstrass_p(z, coeffs)
                dp = (weierstrass_p(z + h, coeffs)
                      - weierstrass_p(z - h, coeffs)) / (2 * h)
                resid = dp ** 2 - (4.0 * p ** 3 - g2 * p - g3)
                # scale by the size of the terms; near-pole values are large
                assert abs(resid) < 1e-8 * max(1.0, abs(p) ** 3)

    def test_pole_error(self):
        coeffs = WeierstrassCoeffs.from_invariants(4.0, 1.0)
        with pytest.raises(DomainError):
            weierstrass_p(1e-12, coeffs)


class TestCosineIntegral:
    def test_reference_value(self):
        # Ci(1) = 0.3374039229...
        assert cosine_integral(1.0) == pytest.approx(0.337403922900968, abs=1e-12)
        assert cosine_integral(1.0) == pytest.approx(quad_cosine_integral(1.0),
                                                     abs=1e-12)

    def test_against_quadrature_series_regime(self):
        for x in (0.1, 0.5, 2.0, 5.0, 10.0, 18.0):
            assert cosine_integral(x) == pytest.approx(
                quad_cosine_integral(x), abs=5e-9)

    def test_asymptotic_regime(self):
        assert abs(cosine_integral(50.0)) < 0.02
        # seam continuity: series and asymptotic agree around x = 20
        left = cosine_integral(19.999999)
        right = cosine_integral(20.000001)
        assert left == pytest.approx(right, abs=5e-9)

    def test_small_x_limit(self):
        gamma = 0.57721566490153286
        x = 1e-6
        assert cosine_integral(x) - math.log(x) == pytest.approx(gamma,
                                                                 abs=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            cosine_integral(0.0)
        with pytest.raises(DomainError):
            cosine_integral(-1.0)


class TestErrorFunction:
    def test_odd_and_limits(self):
        assert error_function(0.0) == 0.0
        assert error_function(6.0) == pytest.approx(1.0, abs=1e-15)
        assert error_function(-1.3) == -error_function(1.3)

    def test_series_oracle(self):
        for x in (0.3, 1.0, 2.0):
            assert error_function(x) == pytest.approx(series_erf(x), abs=1e-12)
        assert error_function(1.0) == pytest.approx(0.842700792949715, abs=1e-12)
