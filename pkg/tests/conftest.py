import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def quad_elliptic_k(k: float) -> float:
    """Independent quadrature oracle for K(k) from the defining integral."""
    from scipy.integrate import quad
    val, err = quad(lambda th: 1.0 / np.sqrt(1.0 - (k * np.sin(th)) ** 2),
                    0.0, np.pi / 2.0, epsabs=1e-14, epsrel=1e-14, limit=200)
    assert err < 1e-12
    return val


def quad_cosine_integral(x: float) -> float:
    """Quadrature oracle for Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt."""
    from scipy.integrate import quad
    gamma = 0.57721566490153286060651209008240243
    val, err = quad(lambda t: (np.cos(t) - 1.0) / t, 0.0, x,
                    epsabs=1e-14, epsrel=1e-14, limit=500)
    assert err < 1e-11
    return gamma + np.log(x) + val


def series_erf(x: float, terms: int = 120) -> float:
    """Maclaurin-series oracle for erf on moderate arguments."""
    import math
    s = 0.0
    for n in range(terms):
        s += (-1) ** n * x ** (2 * n + 1) / (math.factorial(n) * (2 * n + 1))
    return 2.0 / math.sqrt(math.pi) * s
