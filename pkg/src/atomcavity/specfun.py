"""High-accuracy special functions used as closed-form oracles.

Everything here is real-argument only and pure: Jacobi elliptic functions
sn/cn/dn via the descending Landen (AGM) recursion, the complete elliptic
integral K, the Weierstrass P function reduced to Jacobi form through the
roots of 4x^3 - g2 x - g3, the cosine integral Ci and the error function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_EULER_GAMMA = 0.57721566490153286060651209008240243

# Landen recursion is stopped once the co-modulus term drops below this;
# gives full double precision over k in [0, 1].
_LANDEN_TOL = 1e-14
_LANDEN_MAX = 32


@dataclass(frozen=True)
class EllipticTriple:
    """Values of sn, cn, dn at a common argument and modulus."""

    sn: float
    cn: float
    dn: float


@dataclass(frozen=True)
class WeierstrassCoeffs:
    """Invariants g2, g3, the real roots e1 >= e2 >= e3 of
    4x^3 - g2 x - g3 = 0, and the quartic coefficients A0..A2 they
    were derived from (zero when constructed directly from g2, g3)."""

    g2: float
    g3: float
    e1: float
    e2: float
    e3: float
    A0: float = 0.0
    A1: float = 0.0
    A2: float = 0.0

    @classmethod
    def from_invariants(cls, g2: float, g3: float) -> "WeierstrassCoeffs":
        e1, e2, e3 = depressed_cubic_roots(g2, g3)
        return cls(g2=g2, g3=g3, e1=e1, e2=e2, e3=e3)


def complete_elliptic_k(k: float) -> float:
    """Complete elliptic integral of the first kind K(k), modulus convention.

    Computed by the arithmetic-geometric mean, K = pi / (2 agm(1, k')).
    Diverges logarithmically as k -> 1.
    """
    if not 0.0 <= k < 1.0:
        raise DomainError(f"complete_elliptic_k requires 0 <= k < 1, got {k}")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    while abs(a - b) > 1e-16 * a:
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def _landen_ladder(k: float):
    """Descending Landen coefficients a_n, c_n down to c_N < tol."""
    a = [1.0]
    c = [k]
    b = math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(_LANDEN_MAX):
        if c[-1] <= _LANDEN_TOL * a[-1]:
            break
        an = 0.5 * (a[-1] + b)
        cn = 0.5 * (a[-1] - b)
        b = math.sqrt(a[-1] * b)
        a.append(an)
        c.append(cn)
    return a, c


def jacobi_elliptic(u, k: float):
    """Jacobi elliptic functions sn(u,k), cn(u,k), dn(u,k).

    Accepts a scalar or array argument u; returns an EllipticTriple for
    scalars and a triple of arrays otherwise.  Uses the descending Landen
    transformation (DLMF 22.20) with the argument reduced modulo the real
    period for accuracy at large u.  dn is recovered from
    dn^2 = cn^2 + (1-k^2) sn^2, which is cancellation-free.
    """
    if not 0.0 <= k <= 1.0:
        raise DomainError(f"jacobi_elliptic requires 0 <= k <= 1, got {k}")
    u_arr = np.asarray(u, dtype=float)
    scalar = u_arr.ndim == 0
    u_arr = np.atleast_1d(u_arr)

    if k < 1e-16:
        sn, cn, dn = np.sin(u_arr), np.cos(u_arr), np.ones_like(u_arr)
    elif k == 1.0:
        sn = np.tanh(u_arr)
        cn = 1.0 / np.cosh(u_arr)
        dn = cn.copy()
    else:
        period = 4.0 * complete_elliptic_k(k)
        ur = u_arr - period * np.round(u_arr / period)
        a, c = _landen_ladder(k)
        nlev = len(a) - 1
        phi = (2.0 ** nlev) * a[nlev] * ur
        for n in range(nlev, 0, -1):
            phi = 0.5 * (phi + np.arcsin(np.clip(c[n] / a[n] * np.sin(phi), -1.0, 1.0)))
        sn = np.sin(phi)
        cn = np.cos(phi)
        dn = np.sqrt(cn * cn + (1.0 - k) * (1.0 + k) * sn * sn)
    if scalar:
        return EllipticTriple(sn=float(sn[0]), cn=float(cn[0]), dn=float(dn[0]))
    return sn, cn, dn


def depressed_cubic_roots(g2: float, g3: float):
    """Real roots of 4x^3 - g2 x - g3 = 0, sorted descending.

    Raises DomainError when the discriminant is negative (one real root,
    a complex pair), which does not occur for in-model parameters.
    """
    if g2 == 0.0 and g3 == 0.0:
        return (0.0, 0.0, 0.0)
    disc = g2 ** 3 - 27.0 * g3 ** 2
    if g2 <= 0.0 or disc < -1e-12 * max(abs(g2) ** 3, 27.0 * g3 ** 2):
        raise DomainError(
            "cubic 4x^3 - g2 x - g3 has a complex root pair "
            f"(g2={g2}, g3={g3}); out of model range")
    # 4x^3 - g2 x - g3 = 0  <=>  x = sqrt(g2/3) cos((acos(arg) - 2 pi j)/3)
    scale = math.sqrt(g2 / 3.0)
    arg = g3 / scale ** 3 if scale > 0 else 0.0
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    roots = sorted(
        (scale * math.cos(theta - 2.0 * math.pi * j / 3.0) for j in range(3)),
        reverse=True)
    # roots of a depressed cubic sum to zero exactly; remove rounding drift
    shift = sum(roots) / 3.0
    return tuple(r - shift for r in roots)


def weierstrass_p(z, coeffs: WeierstrassCoeffs, pole_tol: float = 1e-9):
    """Weierstrass P(z; g2, g3) on the real axis, three-real-root case.

    Reduced to Jacobi form, P(z) = e3 + (e1-e3)/sn^2(z sqrt(e1-e3), m) with
    m = (e2-e3)/(e1-e3).  When e2 == e3 (degenerate lattice) this becomes
    the cotangent representation P(z) = e1 + (3/2) e1 cot^2(sqrt(3 e1/2) z),
    which is used explicitly for |e2-e3| < 1e-9 |e1|.
    """
    e1, e2, e3 = coeffs.e1, coeffs.e2, coeffs.e3
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if np.any(np.abs(z_arr) < pole_tol):
        raise DomainError(
            f"weierstrass_p evaluated within {pole_tol} of the pole at z=0")
    if e1 - e3 <= 0:
        raise DomainError("weierstrass_p requires e1 > e3 (distinct real roots)")
    if abs(e2 - e3) < 1e-9 * abs(e1) and e1 > 0:
        w = math.sqrt(1.5 * e1)
        out = e1 + 1.5 * e1 / np.tan(w * z_arr) ** 2
    else:
        s = math.sqrt(e1 - e3)
        m = (e2 - e3) / (e1 - e3)
        k = math.sqrt(min(max(m, 0.0), 1.0))
        sn = jacobi_elliptic(s * z_arr, k)[0]
        with np.errstate(divide="ignore"):
            out = e3 + (e1 - e3) / sn ** 2
    return float(out[0]) if scalar else out


def _ci_series(x: np.ndarray) -> np.ndarray:
    """Power series gamma + ln x + sum (-x^2)^k / (2k (2k)!), x <= ~20."""
    out = _EULER_GAMMA + np.log(x)
    x2 = -(x * x)
    term = np.ones_like(x)
    for k in range(1, 60):
        term = term * x2 / ((2 * k) * (2 * k - 1))
        contrib = term / (2 * k)
        out = out + contrib
        if np.all(np.abs(contrib) < 1e-17 * np.maximum(np.abs(out), 1e-3)):
            break
    return out


def _ci_asymptotic(x: np.ndarray) -> np.ndarray:
    """Ci(x) = f(x) sin x - g(x) cos x with optimally truncated f, g."""
    inv2 = 1.0 / (x * x)
    f = np.ones_like(x)
    g = 1.0 / x
    tf = np.ones_like(x)
    tg = 1.0 / x
    for k in range(1, 30):
        tf = -tf * (2 * k) * (2 * k - 1) * inv2
        tg = -tg * (2 * k) * (2 * k + 1) * inv2
        # stop before divergence of the asymptotic series
        if np.all(np.abs(tf) > np.abs(f) * 10):
            break
        f = f + tf
        g = g + tg
    return (f / x) * np.sin(x) - g * np.cos(x)


def cosine_integral(x):
    """Cosine integral Ci(x) for x > 0.

    Series for x <= 20 and the asymptotic expansion beyond; the seam error
    is about 1e-9 in double precision, far below every use in this library.
    """
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if np.any(x_arr <= 0.0):
        raise DomainError("cosine_integral requires x > 0")
    out = np.empty_like(x_arr)
    lo = x_arr <= 20.0
    if np.any(lo):
        out[lo] = _ci_series(x_arr[lo])
    if np.any(~lo):
        out[~lo] = _ci_asymptotic(x_arr[~lo])
    return float(out[0]) if scalar else out


def error_function(x):
    """erf(x); delegates to the C library implementation (< 1 ulp)."""
    x_arr = np.asarray(x, dtype=float)
    if x_arr.ndim == 0:
        return math.erf(float(x_arr))
    return np.vectorize(math.erf, otypes=[float])(x_arr)
