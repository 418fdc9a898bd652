"""Closed-form solutions of the adiabatic (strong-coupling) regime.

Resonant case: the inversion follows Jacobi elliptic branches controlled by
the bifurcation parameter kappa = Delta / (2 c R0); kappa = 1 is the
soliton separatrix.  The slow center-of-mass drift x(tau) carries kappa
through 1, producing a singularity in the oscillation period.  Non-resonant
case: the inversion switches between 1 and a floor value described by a
degenerate Weierstrass solution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NodeError, ParameterError
from .semiclassical import ModelParams
from .specfun import (WeierstrassCoeffs, complete_elliptic_k,
                      depressed_cubic_roots, jacobi_elliptic, weierstrass_p)

SOLITON_TIE_TOL = 1e-6


class Branch(enum.Enum):
    OSCILLATORY = "oscillatory"   # kappa < 1, cn branch, closed orbits
    SOLITON = "soliton"           # kappa = 1 within the tie band
    ROTATIONAL = "rotational"     # kappa > 1, dn branch, open orbits


def classify_branch(kappa: float, tie_tol: float = SOLITON_TIE_TOL) -> Branch:
    if kappa < 0:
        raise ParameterError(f"kappa must be non-negative, got {kappa}")
    if abs(kappa - 1.0) < tie_tol:
        return Branch.SOLITON
    return Branch.OSCILLATORY if kappa < 1.0 else Branch.ROTATIONAL


@dataclass(frozen=True)
class ResonantSolutionParams:
    """Frozen-c resonant solution parameters (g = 0)."""

    c: float
    R0: float
    kappa: float
    branch: Branch

    def __post_init__(self):
        if not -1.0 <= self.c <= 1.0 or self.c == 0.0:
            raise NodeError(f"c must lie in [-1, 1] and be nonzero, got {self.c}")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be non-negative, got {self.kappa}")

    @property
    def Delta(self) -> float:
        """Stark ratio recovered from kappa = Delta / (2 c R0)."""
        return 2.0 * self.c * self.R0 * self.kappa

    @classmethod
    def from_model(cls, params: ModelParams, x: float,
                   tie_tol: float = SOLITON_TIE_TOL) -> "ResonantSolutionParams":
        kap = kappa_resonant(params, x)
        return cls(c=math.cos(x), R0=params.R0, kappa=kap,
                   branch=classify_branch(kap, tie_tol))


def kappa_resonant(params: ModelParams, x: float) -> float:
    """Bifurcation parameter kappa = Delta / (2 cos x * R0)."""
    c = math.cos(x)
    if abs(c) < 1e-12:
        raise NodeError(f"kappa undefined at a node of the mode function, x={x}")
    return params.Delta / (2.0 * c * params.R0)


def sz_resonant(tau, rp: ResonantSolutionParams):
    """Inversion sz(tau): cn for kappa < 1, dn for kappa > 1, sech at the
    separatrix.  Initial conditions u(0)=0, v(0)=0, sz(0)=1."""
    th = rp.c * rp.R0 * np.asarray(tau, dtype=float)
    if rp.branch is Branch.SOLITON:
        out = 1.0 / np.cosh(th)
        return float(out) if out.ndim == 0 else out
    if rp.branch is Branch.OSCILLATORY:
        res = jacobi_elliptic(th, rp.kappa)
        return res.cn if hasattr(res, "cn") else res[1]
    res = jacobi_elliptic(th * rp.kappa, 1.0 / rp.kappa)
    return res.dn if hasattr(res, "dn") else res[2]


def u_resonant(tau, rp: ResonantSolutionParams):
    """Adiabatic potential amplitude u(tau) = -(Delta / 2c) * sn^2-type term."""
    th = rp.c * rp.R0 * np.asarray(tau, dtype=float)
    pref = -rp.Delta / (2.0 * rp.c)
    if rp.branch is Branch.SOLITON:
        out = pref * np.tanh(th) ** 2
        return float(out) if out.ndim == 0 else out
    if rp.branch is Branch.OSCILLATORY:
        res = jacobi_elliptic(th, rp.kappa)
        sn = res.sn if hasattr(res, "sn") else res[0]
        out = pref * sn ** 2
    else:
        res = jacobi_elliptic(th * rp.kappa, 1.0 / rp.kappa)
        sn = res.sn if hasattr(res, "sn") else res[0]
        out = pref * sn ** 2 / rp.kappa ** 2
    return float(out) if np.ndim(out) == 0 else out


def v_resonant(tau, rp: ResonantSolutionParams):
    """Quadrature amplitude v(tau) = -dsz/dtau / c, per branch.

    Written in the form that keeps u^2 + v^2 + 16 N sz^2 = R0^2 exact:
    R0 sn dn (oscillatory), (R0/kappa) sn cn (rotational),
    R0 tanh sech (soliton)."""
    th = rp.c * rp.R0 * np.asarray(tau, dtype=float)
    if rp.branch is Branch.SOLITON:
        out = rp.R0 * np.tanh(th) / np.cosh(th)
        return float(out) if out.ndim == 0 else out
    if rp.branch is Branch.OSCILLATORY:
        res = jacobi_elliptic(th, rp.kappa)
        sn, _, dn = (res.sn, res.cn, res.dn) if hasattr(res, "sn") else res
        out = rp.R0 * sn * dn
    else:
        res = jacobi_elliptic(th * rp.kappa, 1.0 / rp.kappa)
        sn, cn, _ = (res.sn, res.cn, res.dn) if hasattr(res, "sn") else res
        out = rp.R0 / rp.kappa * sn * cn
    return float(out) if np.ndim(out) == 0 else out


def period_resonant(rp: ResonantSolutionParams) -> float:
    """Oscillation period of the inversion; diverges at the separatrix."""
    if rp.branch is Branch.SOLITON:
        raise DomainError("the separatrix solution is aperiodic (infinite period)")
    cr = abs(rp.c) * rp.R0
    if rp.branch is Branch.OSCILLATORY:
        return 4.0 * complete_elliptic_k(rp.kappa) / cr
    return 2.0 * complete_elliptic_k(1.0 / rp.kappa) / (cr * rp.kappa)


def effective_hamiltonian(sz, v, c: float, Delta: float, R0: float):
    """One-dimensional reduced Hamiltonian of the resonant fast subsystem,
    H = c v^2/2 + (Delta^2 / 8c)(1 - sz^2)^2 + (c/2) R0^2 sz^2."""
    if c == 0.0:
        raise NodeError("effective Hamiltonian undefined at c = 0")
    sz = np.asarray(sz, dtype=float)
    v = np.asarray(v, dtype=float)
    out = (0.5 * c * v ** 2 + Delta ** 2 / (8.0 * c) * (1.0 - sz ** 2) ** 2
           + 0.5 * c * R0 ** 2 * sz ** 2)
    return float(out) if out.ndim == 0 else out


def poincare_index(x: float, zeta: float, Omega0: float, R0: float) -> int:
    """Winding index of the equilibrium: +1 stable center, -1 saddle.

    Sign of cos^2 x - (zeta / (Omega0 R0))^2; raises inside the tie band
    around the bifurcation point.
    """
    q = zeta / (Omega0 * R0)
    val = math.cos(x) ** 2 - q * q
    if abs(val) < 1e-12:
        raise DomainError(f"x={x} lies at the bifurcation point of the index")
    return 1 if val > 0 else -1


def x_adiabatic(tau, params: ModelParams, form: str = "sinh"):
    """Slow center-of-mass drift from x(0) = 0 in the linearized regime.

    form="sinh" is the averaged two-timescale solution
        sinh(sqrt(Delta/alpha - Delta^2/(8 R0^2)) * alpha * tau)
        * (1 + alpha*Delta/(4 R0^2) * cos(2 R0 tau));
    form="exp" replaces sinh by its growing exponential exp(rate*tau),
    the asymptotic envelope that the bifurcation-time formula inverts.
    """
    if params.zeta <= 0 or params.alpha <= 0:
        raise DomainError("x_adiabatic requires zeta > 0 and alpha > 0")
    radicand = params.Delta / params.alpha - params.Delta ** 2 / (8.0 * params.R0 ** 2)
    if radicand < 0:
        raise DomainError(f"negative envelope-rate radicand {radicand}")
    rate = math.sqrt(radicand) * params.alpha
    tau = np.asarray(tau, dtype=float)
    ripple = 1.0 + params.alpha * params.Delta / (4.0 * params.R0 ** 2) * np.cos(
        2.0 * params.R0 * tau)
    if form == "sinh":
        out = np.sinh(rate * tau) * ripple
    elif form == "exp":
        out = np.exp(rate * tau) * ripple
    else:
        raise ParameterError(f"unknown envelope form {form!r}")
    return float(out) if out.ndim == 0 else out


def bifurcation_time(params: ModelParams) -> float:
    """tau_b = sqrt(Omega0/(alpha zeta)) * ln(arccos(zeta/(2 R0 Omega0)))."""
    q = params.Delta / (2.0 * params.R0)
    if not 0.0 < q < 1.0:
        raise DomainError(
            f"arccos argument zeta/(2 R0 Omega0) = {q} outside (0, 1)")
    if params.alpha <= 0:
        raise DomainError("bifurcation_time requires alpha > 0")
    return math.sqrt(1.0 / (params.alpha * params.Delta)) * math.log(math.acos(q))


def composed_inversion(params: ModelParams, taus, form: str = "exp"):
    """Inversion along the drifting atom: sz = cn(c(tau) R0 tau, kappa(tau))
    with kappa carried by the adiabatic x(tau).  Returns (x, kappa, sz)
    arrays; sz switches to the dn branch once kappa(tau) > 1."""
    taus = np.asarray(taus, dtype=float)
    xs = np.asarray(x_adiabatic(taus, params, form=form))
    cs = np.cos(xs)
    if np.any(np.abs(cs) < 1e-12):
        raise NodeError("drift reached a node of the mode function")
    kappas = params.Delta / (2.0 * cs * params.R0)
    sz = np.empty_like(taus)
    for i, (t, c, kap) in enumerate(zip(taus, cs, kappas)):
        th = c * params.R0 * t
        if abs(kap - 1.0) < SOLITON_TIE_TOL:
            sz[i] = 1.0 / math.cosh(th)
        elif kap < 1.0:
            sz[i] = jacobi_elliptic(float(th), kap).cn
        else:
            sz[i] = jacobi_elliptic(float(th * kap), 1.0 / kap).dn
    return xs, kappas, sz


def singularity_time(params: ModelParams, tau_max: float, n_grid: int = 4000,
                     period_factor: float = 10.0, form: str = "exp") -> float:
    """First time at which the instantaneous oscillation period of the
    composed inversion exceeds period_factor times its initial value
    (or kappa crosses 1, whichever comes first)."""
    taus = np.linspace(0.0, tau_max, n_grid)
    xs = np.asarray(x_adiabatic(taus, params, form=form))
    cs = np.cos(xs)
    kap0 = params.Delta / (2.0 * cs[0] * params.R0)
    if not 0 < kap0 < 1:
        raise DomainError(f"initial kappa = {kap0} is not inside (0, 1)")
    T0 = 4.0 * complete_elliptic_k(kap0) / (abs(cs[0]) * params.R0)
    for t, c in zip(taus[1:], cs[1:]):
        if abs(c) < 1e-12:
            return float(t)
        kap = params.Delta / (2.0 * c * params.R0)
        if kap >= 1.0:
            return float(t)
        T = 4.0 * complete_elliptic_k(kap) / (abs(c) * params.R0)
        if T >= period_factor * T0:
            return float(t)
    raise DomainError(
        f"no period blow-up by factor {period_factor} within tau <= {tau_max}")


# ----------------------------------------------------------------------
# non-resonant case: Weierstrass switching solution
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SwitchingSolutionParams:
    """Derived quantities of the non-resonant switching solution.

    e1 is the top root in the small-kappa degenerate limit (e1 = -A2);
    floor = 1 - 1/(3 e1) is the lower turning value of sz, and period is
    the printed switching interval pi / (2 c R0 sqrt(6 e1)), one quarter
    of the full floor-to-floor oscillation period.
    """

    coeffs: WeierstrassCoeffs
    c: float
    R0: float
    kappa_nr: float
    g_over_R0c: float
    e1: float
    period: float
    floor: float

    def __post_init__(self):
        if self.e1 <= 0:
            raise ParameterError(f"degenerate top root must be positive, got {self.e1}")
        if not self.floor < 1.0:
            raise ParameterError(f"switching floor must lie below 1, got {self.floor}")

    @property
    def full_period(self) -> float:
        """Floor-to-floor oscillation period, 4x the printed interval."""
        return 4.0 * self.period


def weierstrass_coeffs_nonresonant(params: ModelParams, x: float) -> SwitchingSolutionParams:
    """Coefficients of the non-resonant solution at frozen position x.

    A0 = -kappa^2, A1 = (kappa^2/2)(2 + 2 g Omega0/zeta),
    A2 = -(1/6)(1 + kappa^2 (2 + 2 g Omega0/zeta)^2),
    g2 = 3 A2^2 - 2 A1, g3 = A1 A2 - A2^3 - A0/2.

    Note kappa^2 (2 + 2 g/Delta)^2 = ((g + Delta)/(c R0))^2 identically, so
    the degenerate top root is e1 = -A2 = (1 + ((g+Delta)/(c R0))^2) / 6.
    """
    c = math.cos(x)
    if abs(c) < 1e-12:
        raise NodeError(f"switching solution undefined at a node, x={x}")
    if params.zeta == 0.0:
        raise ParameterError("non-resonant solution requires zeta != 0")
    g = params.g_detune
    if g == 0.0:
        raise ParameterError("g = 0 is the resonant case; use the Jacobi branches")
    R0 = params.R0
    kappa = params.Delta / (2.0 * c * R0)
    gd = 2.0 + 2.0 * g / params.Delta
    A0 = -kappa ** 2
    A1 = 0.5 * kappa ** 2 * gd
    A2 = -(1.0 + (kappa * gd) ** 2) / 6.0
    g2 = 3.0 * A2 ** 2 - 2.0 * A1
    g3 = A1 * A2 - A2 ** 3 - 0.5 * A0
    e1, e2, e3 = depressed_cubic_roots(g2, g3)
    coeffs = WeierstrassCoeffs(g2=g2, g3=g3, e1=e1, e2=e2, e3=e3,
                               A0=A0, A1=A1, A2=A2)
    e1_deg = -A2
    return SwitchingSolutionParams(
        coeffs=coeffs, c=c, R0=R0, kappa_nr=kappa,
        g_over_R0c=g / (R0 * c), e1=e1_deg,
        period=math.pi / (2.0 * c * R0 * math.sqrt(6.0 * e1_deg)),
        floor=1.0 - 1.0 / (3.0 * e1_deg))


def sz_nonresonant(tau, sp: SwitchingSolutionParams):
    """Degenerate-limit switching solution.

    sz = 1 - 1/(3 e1 (1 + cot^2 theta)) = 1 - sin^2(theta)/(3 e1) with
    theta = sqrt(3 e1 / 2) c R0 tau; regular everywhere, equal to the
    general Weierstrass form when the lattice is degenerate (e2 = e3).
    Switches between 1 and the floor 1 - 1/(3 e1).
    """
    th = math.sqrt(1.5 * sp.e1) * sp.c * sp.R0 * np.asarray(tau, dtype=float)
    out = 1.0 - np.sin(th) ** 2 / (3.0 * sp.e1)
    return float(out) if out.ndim == 0 else out


def sz_nonresonant_general(tau, sp: SwitchingSolutionParams,
                           pole_tol: float = 1e-9):
    """General non-resonant solution sz = 1 - 1/(2 P(c R0 tau) - A2)
    through the Weierstrass function of the computed invariants."""
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    z = sp.c * sp.R0 * tau_arr
    out = np.ones_like(tau_arr)
    away = np.abs(z) >= pole_tol
    if np.any(away):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            wp = weierstrass_p(z[away], sp.coeffs, pole_tol=pole_tol / 2)
            vals = 1.0 - 1.0 / (2.0 * np.asarray(wp) - sp.coeffs.A2)
        vals = np.where(np.isfinite(vals), vals, 1.0)
        out[away] = vals
    return float(out[0]) if np.ndim(tau) == 0 else out
