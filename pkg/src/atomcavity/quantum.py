"""Quantum treatment of the two-photon transitions: Fock-truncated
amplitude dynamics, hybrid classical-quantum evolution, reduced density
matrix of the atom, and closed-form purity in the adiabatic and
weak-coupling regimes.

The state is expanded over pairs |e,n> and |g,n+2>; Cg[n] stores the
amplitude of |g, n+2>.  Rates (zeta, Omega0, detunings) enter in the same
units as the time argument, following the source conventions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, TruncationError
from .semiclassical import ModelParams, integrate
from .specfun import cosine_integral, error_function


class Regime(enum.Enum):
    ADIABATIC_CLOSED_FORM = "adiabatic_closed_form"
    WEAK_REGULAR = "weak_regular"
    WEAK_CHAOTIC = "weak_chaotic"
    NUMERIC_FROM_AMPLITUDES = "numeric_from_amplitudes"


def default_n_max(n_bar: float) -> int:
    """Fock truncation with Poisson tail below 1e-12 for n_bar <= 100."""
    return int(math.ceil(n_bar + 10.0 * math.sqrt(n_bar + 1.0) + 20.0))


def coherent_weights(n_bar: float, n_max: int) -> np.ndarray:
    """Amplitude weights W_n of a coherent state, W_n^2 Poissonian with
    mean n_bar, built by the stable recursion W_{n+1}^2 = W_n^2 n_bar/(n+1)
    and renormalized after truncation."""
    if n_bar < 0:
        raise ParameterError(f"n_bar must be non-negative, got {n_bar}")
    if n_max < 0:
        raise ParameterError(f"n_max must be non-negative, got {n_max}")
    w2 = np.empty(n_max + 1)
    w2[0] = math.exp(-n_bar)
    for n in range(n_max):
        w2[n + 1] = w2[n] * n_bar / (n + 1)
    tail = 1.0 - w2.sum()
    if tail > 1e-10:
        raise TruncationError(
            f"coherent-state tail mass {tail:.2e} beyond n_max={n_max} "
            f"exceeds 1e-10; increase n_max")
    return np.sqrt(w2 / w2.sum())


@dataclass
class QuantumAmplitudes:
    """Truncated amplitude pairs C_{e,n} and C_{g,n+2} at time t."""

    n_max: int
    Ce: np.ndarray
    Cg: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.Ce = np.asarray(self.Ce, dtype=complex)
        self.Cg = np.asarray(self.Cg, dtype=complex)
        if self.Ce.shape != (self.n_max + 1,) or self.Cg.shape != (self.n_max + 1,):
            raise ParameterError("Ce and Cg must have length n_max + 1")

    @classmethod
    def initial_coherent(cls, n_bar: float, n_max: int = None) -> "QuantumAmplitudes":
        """Excited atom with a coherent field: Ce[n] = W_n, Cg = 0."""
        if n_max is None:
            n_max = default_n_max(n_bar)
        W = coherent_weights(n_bar, n_max)
        return cls(n_max=n_max, Ce=W.astype(complex),
                   Cg=np.zeros(n_max + 1, dtype=complex), t=0.0)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.Ce) ** 2 + np.abs(self.Cg) ** 2))

    def tail_mass(self) -> float:
        return float(np.abs(self.Ce[-1]) ** 2 + np.abs(self.Cg[-1]) ** 2)


def _coupling_ladder(n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    return np.sqrt((n + 1.0) * (n + 2.0))


def amplitude_rhs(amps: QuantumAmplitudes, t: float, x: float,
                  params: ModelParams):
    """Right-hand side of the amplitude equations,
    i dCe/dt = (zeta n/2) Ce + g(x) sqrt((n+1)(n+2)) e^{-i dq t} Cg,
    i dCg/dt = -(zeta (n+2)/2) Cg + g(x) sqrt((n+1)(n+2)) e^{+i dq t} Ce,
    with g(x) = Omega0 cos x and dq the two-photon detuning."""
    n = np.arange(amps.n_max + 1)
    b = params.Omega0 * math.cos(x) * _coupling_ladder(amps.n_max)
    ph = np.exp(-1j * params.delta_q * t)
    dce = -1j * (params.zeta * n / 2.0 * amps.Ce + b * ph * amps.Cg)
    dcg = -1j * (-params.zeta * (n + 2.0) / 2.0 * amps.Cg
                 + b * np.conj(ph) * amps.Ce)
    return dce, dcg


def amplitudes_adiabatic(t: float, n: int, x: float, params: ModelParams,
                         Ce0: complex, Cg0: complex):
    """Closed-form solution of one (Ce_n, Cg_{n+2}) pair at frozen x.

    With b = g(x) sqrt((n+1)(n+2)), nu = zeta (n+1) - dq and
    lambda_n = sqrt(nu^2 + 4 b^2)/2:
        Ce = e^{ i (zeta - dq) t / 2} [ (cos - i nu/(2 l) sin) Ce0
                                        - i (b/l) sin Cg0 ],
        Cg = e^{ i (zeta + dq) t / 2} [ (cos + i nu/(2 l) sin) Cg0
                                        - i (b/l) sin Ce0 ].
    Exactly unitary per pair and consistent with amplitude_rhs.
    """
    zeta, dq = params.zeta, params.delta_q
    b = params.Omega0 * math.cos(x) * math.sqrt((n + 1.0) * (n + 2.0))
    nu = zeta * (n + 1.0) - dq
    lam = 0.5 * math.sqrt(nu * nu + 4.0 * b * b)
    if lam == 0.0:
        cos_l, sinc_l = 1.0, t
    else:
        cos_l, sinc_l = math.cos(lam * t), math.sin(lam * t) / lam
    ce = np.exp(0.5j * (zeta - dq) * t) * (
        (cos_l - 0.5j * nu * sinc_l) * Ce0 - 1j * b * sinc_l * Cg0)
    cg = np.exp(0.5j * (zeta + dq) * t) * (
        (cos_l + 0.5j * nu * sinc_l) * Cg0 - 1j * b * sinc_l * Ce0)
    return complex(ce), complex(cg)


def amplitudes_adiabatic_ensemble(t: float, x: float, params: ModelParams,
                                  n_max: int = None) -> QuantumAmplitudes:
    """Coherent-field ensemble propagated by the frozen-x closed form."""
    if n_max is None:
        n_max = default_n_max(params.n_bar)
    W = coherent_weights(params.n_bar, n_max)
    Ce = np.empty(n_max + 1, dtype=complex)
    Cg = np.empty(n_max + 1, dtype=complex)
    for n in range(n_max + 1):
        Ce[n], Cg[n] = amplitudes_adiabatic(t, n, x, params, W[n], 0.0)
    return QuantumAmplitudes(n_max=n_max, Ce=Ce, Cg=Cg, t=t)


# ----------------------------------------------------------------------
# reduced density matrix and purity
# ----------------------------------------------------------------------

@dataclass
class ReducedDensityMatrix:
    """2x2 atomic density matrix; rho21 is the conjugate of rho12."""

    rho11: float
    rho22: float
    rho12: complex

    @property
    def rho21(self):
        return np.conj(self.rho12)

    def validate(self, tol: float = 1e-9):
        if abs(self.rho11 + self.rho22 - 1.0) > tol:
            raise DomainError("density matrix trace differs from 1")
        if self.rho11 < -tol or self.rho22 < -tol:
            raise DomainError("negative population")
        if self.rho11 * self.rho22 - abs(self.rho12) ** 2 < -tol:
            raise DomainError("density matrix is not positive semidefinite")


def reduced_density(amps: QuantumAmplitudes) -> ReducedDensityMatrix:
    """Trace out the field: rho11 = sum |Ce|^2, rho22 = sum |Cg|^2,
    rho12 = sum Ce[n] conj(Cg[n]) (pairing C_{e,n} with C_{g,n+2})."""
    return ReducedDensityMatrix(
        rho11=float(np.sum(np.abs(amps.Ce) ** 2)),
        rho22=float(np.sum(np.abs(amps.Cg) ** 2)),
        rho12=complex(np.sum(amps.Ce * np.conj(amps.Cg))))


def purity(rho: ReducedDensityMatrix):
    """P = Tr rho^2 = rho11^2 + rho22^2 + 2 |rho12|^2."""
    return rho.rho11 ** 2 + rho.rho22 ** 2 + 2.0 * np.abs(rho.rho12) ** 2


def density_resonant_closed(t, x, params: ModelParams) -> ReducedDensityMatrix:
    """Closed-form reduced density matrix at two-photon resonance
    (omega_0 = 2 omega_f + zeta) in the large-n linearization, with
    lambda^2 = (zeta/2)^2 + g(x)^2.  Hermiticity is enforced through
    rho21 = conj(rho12)."""
    zeta, nbar = params.zeta, params.n_bar
    g = params.Omega0 * np.cos(np.asarray(x, dtype=float))
    lam2 = (zeta / 2.0) ** 2 + g * g
    lam = np.sqrt(lam2)
    t = np.asarray(t, dtype=float)
    E = np.exp(-nbar * (1.0 - np.cos(2.0 * t * lam)))
    C = np.cos(nbar * np.sin(2.0 * t * lam))
    S = np.sin(nbar * np.sin(2.0 * t * lam))
    D = 1.0 - E * C
    rho11 = 0.5 * (1.0 + E * C) + zeta ** 2 / (8.0 * lam2) * D
    rho22 = g * g / (2.0 * lam2) * D
    rho12 = np.exp(-1j * zeta * t) * (
        -0.5j * g / lam * E * S + g * zeta / (4.0 * lam2) * D)
    return ReducedDensityMatrix(rho11=rho11, rho22=rho22, rho12=rho12)


def purity_closed_adiabatic(t, x, params: ModelParams):
    """Closed-form adiabatic purity,
    P = 1 - (g(x)^2 / (2 lambda^2)) {1 - exp[-2 n_bar (1 - cos 2 t lambda)]}.

    The coefficient carries the factor 1/2 required for P to equal
    Tr rho^2 of density_resonant_closed (a qubit purity never drops below
    1/2; the variant without the 1/2 would).
    """
    zeta, nbar = params.zeta, params.n_bar
    g = params.Omega0 * np.cos(np.asarray(x, dtype=float))
    lam2 = (zeta / 2.0) ** 2 + g * g
    lam = np.sqrt(lam2)
    t = np.asarray(t, dtype=float)
    out = 1.0 - g * g / (2.0 * lam2) * (
        1.0 - np.exp(-2.0 * nbar * (1.0 - np.cos(2.0 * t * lam))))
    return float(out) if out.ndim == 0 else out


def _revival_time_average(n_bar: float) -> float:
    """Infinite-time average of exp(-2 n_bar (1 - cos 2 lambda t)),
    equal to e^{-2 n_bar} I0(2 n_bar)."""
    z = 2.0 * n_bar
    if z == 0.0:
        return 1.0
    if z < 600.0:
        return float(np.exp(-z) * np.i0(z))
    # asymptotic I0(z) ~ e^z / sqrt(2 pi z) (1 + 1/(8z))
    return float((1.0 + 1.0 / (8.0 * z)) / math.sqrt(2.0 * math.pi * z))


def purity_adiabatic_time_average(x, params: ModelParams,
                                  include_revival: bool = True):
    """Exact long-time average of the closed-form purity at fixed x:
    1/2 + zeta^2/(8 lambda^2) + (g^2 / 2 lambda^2) <revival>.

    With include_revival=False the Poisson-revival term is dropped, the
    semiclassical n_bar >> 1 simplification under which the coordinate
    average reproduces the quoted 1 - 2 Omega0^2/(zeta^2 + 4 Omega0^2).
    """
    zeta = params.zeta
    g = params.Omega0 * np.cos(np.asarray(x, dtype=float))
    lam2 = (zeta / 2.0) ** 2 + g * g
    rev = _revival_time_average(params.n_bar) if include_revival else 0.0
    out = 0.5 + zeta ** 2 / (8.0 * lam2) + g * g / (2.0 * lam2) * rev
    return float(out) if out.ndim == 0 else out


def purity_adiabatic_space_time_average(params: ModelParams, n_x: int = 4001,
                                        include_revival: bool = False) -> float:
    """Coordinate-and-time averaged adiabatic purity over x in [0, pi]."""
    xs = np.linspace(0.0, math.pi, n_x)
    vals = purity_adiabatic_time_average(xs, params,
                                         include_revival=include_revival)
    return float(np.trapezoid(vals, xs) / math.pi)


# ----------------------------------------------------------------------
# hybrid classical-quantum evolution
# ----------------------------------------------------------------------

def hybrid_mean_u(amps: QuantumAmplitudes, t: float, params: ModelParams) -> float:
    """Quantum average of the interaction quadrature,
    <u> = (2/sqrt(N)) Re( e^{-i dq t} sum sqrt((n+1)(n+2)) Ce* Cg ).

    The detuning phase is the conjugate of the one in the amplitude
    equations, so it cancels the intrinsic phase of Ce* Cg (the Ehrenfest
    force is the expectation of the operator that enters the interaction
    Hamiltonian the amplitude equations derive from)."""
    b = _coupling_ladder(amps.n_max)
    return float(2.0 / math.sqrt(params.N) * np.real(
        np.exp(-1j * params.delta_q * t)
        * np.sum(b * np.conj(amps.Ce) * amps.Cg)))


@dataclass
class HybridResult:
    """Output of the coupled classical-quantum run."""

    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    purity: np.ndarray
    Ce: np.ndarray          # shape (n_times, n_max+1)
    Cg: np.ndarray
    norm_drift: float
    tail_mass_max: float

    def amplitudes_at(self, i: int) -> QuantumAmplitudes:
        return QuantumAmplitudes(n_max=self.Ce.shape[1] - 1, Ce=self.Ce[i],
                                 Cg=self.Cg[i], t=float(self.times[i]))


def hybrid_evolve(amps0: QuantumAmplitudes, x0: float, p0: float,
                  t_end: float, params: ModelParams, dt_out: float = 0.1,
                  rtol: float = 1e-8, atol: float = 1e-10,
                  tail_tol: float = 1e-8) -> HybridResult:
    """Co-integrate the classical pair (x, p) with the quantum amplitudes:
    dx/dt = alpha p, dp/dt = -<u> sin x, amplitudes per amplitude_rhs with
    g(x) re-evaluated continuously."""
    M = amps0.n_max + 1
    n = np.arange(M)
    ladder = _coupling_ladder(amps0.n_max)

    def rhs(y, t, _):
        x, p = y[0], y[1]
        ce = y[2:2 + M] + 1j * y[2 + M:2 + 2 * M]
        cg = y[2 + 2 * M:2 + 3 * M] + 1j * y[2 + 3 * M:2 + 4 * M]
        b = params.Omega0 * math.cos(x) * ladder
        ph = np.exp(-1j * params.delta_q * t)
        mean_u = 2.0 / math.sqrt(params.N) * float(np.real(
            ph * np.sum(ladder * np.conj(ce) * cg)))
        dce = -1j * (params.zeta * n / 2.0 * ce + b * ph * cg)
        dcg = -1j * (-params.zeta * (n + 2.0) / 2.0 * cg + b * np.conj(ph) * ce)
        out = np.empty(2 + 4 * M)
        out[0] = params.alpha * p
        out[1] = -mean_u * math.sin(x)
        out[2:2 + M] = dce.real
        out[2 + M:2 + 2 * M] = dce.imag
        out[2 + 2 * M:2 + 3 * M] = dcg.real
        out[2 + 3 * M:2 + 4 * M] = dcg.imag
        return out

    y0 = np.concatenate(([x0, p0], amps0.Ce.real, amps0.Ce.imag,
                         amps0.Cg.real, amps0.Cg.imag))
    traj = integrate(rhs, y0, t_end, dt_out, rtol=rtol, atol=atol, params=None)
    Ce = traj.states[:, 2:2 + M] + 1j * traj.states[:, 2 + M:2 + 2 * M]
    Cg = traj.states[:, 2 + 2 * M:2 + 3 * M] + 1j * traj.states[:, 2 + 3 * M:2 + 4 * M]
    norms = np.sum(np.abs(Ce) ** 2 + np.abs(Cg) ** 2, axis=1)
    tails = np.abs(Ce[:, -1]) ** 2 + np.abs(Cg[:, -1]) ** 2
    if np.max(tails) > tail_tol:
        raise TruncationError(
            f"Fock tail mass reached {np.max(tails):.2e} > {tail_tol}; "
            "increase n_max")
    r11 = np.sum(np.abs(Ce) ** 2, axis=1)
    r22 = np.sum(np.abs(Cg) ** 2, axis=1)
    r12 = np.sum(Ce * np.conj(Cg), axis=1)
    pur = r11 ** 2 + r22 ** 2 + 2.0 * np.abs(r12) ** 2
    return HybridResult(times=traj.times, x=traj.states[:, 0],
                        p=traj.states[:, 1], purity=pur, Ce=Ce, Cg=Cg,
                        norm_drift=float(np.max(np.abs(norms - norms[0]))),
                        tail_mass_max=float(np.max(tails)))


# ----------------------------------------------------------------------
# weak-coupling regime
# ----------------------------------------------------------------------

def amplitudes_weak_resonant(t: float, n: int, phase: float, Ce0: complex,
                             Cg0: complex, params: ModelParams):
    """Weak-coupling resonant (dq = 0) amplitudes through the accumulated
    phase integral: with C1 = (Ce0+Cg0)/2, C2 = (Ce0-Cg0)/2 and
    Q = exp(i n phase),
        Ce = e^{-i n zeta t / 2} (C1 Q + C2 Q*),
        Cg = e^{+i (n+1) zeta t / 2} (C1 Q - C2 Q*).
    Exactly norm-preserving for every n."""
    c1 = 0.5 * (Ce0 + Cg0)
    c2 = 0.5 * (Ce0 - Cg0)
    q = np.exp(1j * n * phase)
    ce = np.exp(-0.5j * n * params.zeta * t) * (c1 * q + c2 * np.conj(q))
    cg = np.exp(0.5j * (n + 1.0) * params.zeta * t) * (c1 * q - c2 * np.conj(q))
    return complex(ce), complex(cg)


def density_weak(t, q2, n_bar: float, zeta: float) -> ReducedDensityMatrix:
    """Field-traced density matrix of the weak-coupling solution with the
    initial coherent field, expressed through Q[2 omega(t)]:
        rho11 = 1/2 + (1/2) e^{-nbar} Re e^{nbar q2},   rho22 = 1 - rho11,
        rho12 = (1/4) e^{-i zeta t} e^{-nbar}
                (e^{nbar q2* e^{-i zeta t}} - e^{nbar q2 e^{-i zeta t}}).
    Accepts scalar or array t/q2."""
    t = np.asarray(t, dtype=float)
    q2 = np.asarray(q2, dtype=complex)
    r11 = 0.5 + 0.5 * np.exp(-n_bar) * np.real(np.exp(n_bar * q2))
    inner = np.exp(-1j * zeta * t)
    r12 = 0.25 * np.exp(-1j * zeta * t) * np.exp(-n_bar) * (
        np.exp(n_bar * np.conj(q2) * inner) - np.exp(n_bar * q2 * inner))
    return ReducedDensityMatrix(rho11=r11, rho22=1.0 - r11, rho12=r12)


def q_regular(t, params: ModelParams):
    """Regular-motion phase factor
    Q[2 omega(t)] = exp[ 2i sqrt(Omega0/(alpha zeta))
                         (Ci(e^{t sqrt(alpha zeta/Omega0)}) - Ci(1)) ].
    Unimodular; saturates to a constant once the Ci argument is large."""
    if params.alpha <= 0 or params.zeta <= 0:
        raise DomainError("q_regular requires alpha > 0 and zeta > 0")
    s = math.sqrt(params.alpha * params.zeta / params.Omega0)
    pref = 2.0 / s
    t = np.asarray(t, dtype=float)
    ci = cosine_integral(np.exp(s * t))
    out = np.exp(1j * pref * (np.asarray(ci) - cosine_integral(1.0)))
    return complex(out) if out.ndim == 0 else out


def q_chaotic_mean(t, alpha0: float):
    """Ensemble-averaged phase factor over the random frequency,
    <Q> = exp[-(t/2) sqrt(pi/alpha0) Erf(t sqrt(alpha0))]; real,
    in (0, 1], monotone non-increasing."""
    if alpha0 <= 0:
        raise DomainError("q_chaotic_mean requires alpha0 > 0")
    t = np.asarray(t, dtype=float)
    erf_vals = np.asarray(error_function(t * math.sqrt(alpha0)))
    out = np.exp(-0.5 * t * math.sqrt(math.pi / alpha0) * erf_vals)
    return float(out) if out.ndim == 0 else out


@dataclass
class PurityCurve:
    times: np.ndarray
    purity: np.ndarray
    regime: Regime


def purity_weak(t_grid, regime, params: ModelParams,
                alpha0: float = None) -> PurityCurve:
    """Purity curve of the weak-coupling closed form; regime selects the
    regular (Ci-phase) or chaotic (Erf-averaged) Q factor."""
    t_grid = np.asarray(t_grid, dtype=float)
    if isinstance(regime, str):
        regime = Regime("weak_" + regime) if not regime.startswith("weak_") \
            else Regime(regime)
    if regime is Regime.WEAK_REGULAR:
        q2 = q_regular(t_grid, params)
    elif regime is Regime.WEAK_CHAOTIC:
        if alpha0 is None:
            raise ParameterError("chaotic regime requires alpha0")
        q2 = np.asarray(q_chaotic_mean(t_grid, alpha0), dtype=complex)
    else:
        raise ParameterError(f"purity_weak does not handle regime {regime}")
    rho = density_weak(t_grid, q2, params.n_bar, params.zeta)
    return PurityCurve(times=t_grid, purity=np.asarray(purity(rho)),
                       regime=regime)


def gaussian_phase_average_mc(t_grid, alpha0: float, n_realizations: int,
                              rng: np.random.Generator,
                              batch: int = 50000) -> np.ndarray:
    """Monte-Carlo oracle for q_chaotic_mean: sample a stationary Gaussian
    frequency process and average exp(i integral omega dt).

    The covariance kernel c(tau) = 2 (1 - alpha0 tau^2) exp(-alpha0 tau^2)
    is positive-definite and is exactly the kernel whose characteristic
    functional equals the Erf expression returned by q_chaotic_mean (the
    plain Gaussian kernel exp(-alpha0 tau^2) reproduces it only up to a
    bounded correction factor).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ParameterError("t_grid must start at 0 and increase")
    tau = t_grid[:, None] - t_grid[None, :]
    cov = 2.0 * (1.0 - alpha0 * tau ** 2) * np.exp(-alpha0 * tau ** 2)
    L = np.linalg.cholesky(cov + 1e-10 * np.eye(len(t_grid)))
    dt = np.diff(t_grid)
    acc = np.zeros(len(t_grid))
    done = 0
    while done < n_realizations:
        nb = min(batch, n_realizations - done)
        om = L @ rng.standard_normal((len(t_grid), nb))
        X = np.vstack([np.zeros(nb),
                       np.cumsum(0.5 * (om[1:] + om[:-1]) * dt[:, None], axis=0)])
        acc += np.cos(X).sum(axis=1)
        done += nb
    return acc / n_realizations
