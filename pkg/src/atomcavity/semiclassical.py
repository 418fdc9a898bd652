"""Model parameters, phase-space state, equations of motion and integrator.

The dimensionless time is tau = Omega0 * t.  The full semiclassical system
evolves (x, p, u, v, sz); the strong-coupling form replaces the factor
(N - s^2 + 2 sz^2) by N and writes the transition frequency through the
detuning g = delta + Delta/2.  The fast subsystem freezes c = cos x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DomainError, NonFiniteStateError, ParameterError,
                     StepSizeUnderflowError)

STATE_LABELS = ("x", "p", "u", "v", "sz")


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless model constants.

    alpha   recoil-to-coupling ratio k_f^2 / (m Omega0)
    delta   field-atom detuning (omega_f - omega_0) / Omega0
    Delta   Stark-shift ratio zeta / Omega0
    N       field invariant a_x^2 + a_y^2 - sz^2
    s       spin magnitude
    Omega0  cavity-atom coupling; sets the physical time unit (MHz scale)
    n_bar   mean photon number of the initial coherent field
    delta_q two-photon detuning omega_0 - 2 omega_f used by the quantum
            sections, in the same physical units as zeta

    Either ``Delta`` or ``zeta`` may be given; when both are present they
    must agree to 1e-12 relative.
    """

    alpha: float
    delta: float
    N: float
    Delta: float = None
    zeta: float = None
    s: float = 1.0
    Omega0: float = 1.0
    n_bar: float = 0.0
    delta_q: float = 0.0

    def __post_init__(self):
        if self.Omega0 <= 0:
            raise ParameterError(f"Omega0 must be positive, got {self.Omega0}")
        if self.N <= 0:
            raise ParameterError(f"N must be positive, got {self.N}")
        if self.n_bar < 0:
            raise ParameterError(f"n_bar must be non-negative, got {self.n_bar}")
        if self.Delta is None and self.zeta is None:
            object.__setattr__(self, "Delta", 0.0)
            object.__setattr__(self, "zeta", 0.0)
        elif self.Delta is None:
            object.__setattr__(self, "Delta", self.zeta / self.Omega0)
        elif self.zeta is None:
            object.__setattr__(self, "zeta", self.Delta * self.Omega0)
        else:
            ref = max(abs(self.zeta), abs(self.Delta * self.Omega0), 1e-300)
            if abs(self.zeta - self.Delta * self.Omega0) > 1e-12 * ref:
                raise ParameterError(
                    f"inconsistent Stark parameters: zeta={self.zeta} but "
                    f"Delta*Omega0={self.Delta * self.Omega0}")

    @property
    def g_detune(self) -> float:
        """Detuning parameter g = delta + Delta/2."""
        return self.delta + 0.5 * self.Delta

    @property
    def R0(self) -> float:
        """Radius of the fast-subsystem sphere, R0 = 4 sqrt(N)."""
        return 4.0 * math.sqrt(self.N)


@dataclass(frozen=True)
class SemiclassicalState:
    """Phase-space point (x, p, u, v, sz)."""

    x: float = 0.0
    p: float = 0.0
    u: float = 0.0
    v: float = 0.0
    sz: float = 1.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.u, self.v, self.sz], dtype=float)

    @classmethod
    def from_array(cls, y) -> "SemiclassicalState":
        x, p, u, v, sz = (float(c) for c in y)
        return cls(x=x, p=p, u=u, v=v, sz=sz)


def _as_state_array(state) -> np.ndarray:
    if isinstance(state, SemiclassicalState):
        return state.as_array()
    y = np.asarray(state, dtype=float)
    if y.shape != (5,):
        raise ParameterError(f"state must have 5 components, got shape {y.shape}")
    return y.copy()


@dataclass
class Trajectory:
    """Sampled solution with the worst relative drift of the invariants
    tracked for the integrated system."""

    times: np.ndarray
    states: np.ndarray
    conserved_drift: float = float("nan")
    invariant_drifts: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("trajectory times must be strictly increasing")

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_LABELS.index(name)]

    @property
    def x(self):
        return self.states[:, 0]

    @property
    def p(self):
        return self.states[:, 1]

    @property
    def u(self):
        return self.states[:, 2]

    @property
    def v(self):
        return self.states[:, 3]

    @property
    def sz(self):
        return self.states[:, 4]

    def final_state(self) -> SemiclassicalState:
        return SemiclassicalState.from_array(self.states[-1])

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("tau," + ",".join(STATE_LABELS) + "\n")
            for t, row in zip(self.times, self.states):
                fh.write("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n"
                         % (t, row[0], row[1], row[2], row[3], row[4]))


# ----------------------------------------------------------------------
# vector fields
# ----------------------------------------------------------------------

def rhs_full(state, tau, params: ModelParams) -> np.ndarray:
    """Full semiclassical vector field."""
    x, p, u, v, sz = _as_state_array(state)
    om = params.delta + 0.5 * params.Delta + params.Delta * sz
    cx = math.cos(x)
    return np.array([
        params.alpha * p,
        -math.sin(x) * u,
        -om * v,
        om * u + 16.0 * cx * sz * (params.N - params.s ** 2 + 2.0 * sz * sz),
        -cx * v,
    ])


def rhs_strong(state, tau, params: ModelParams) -> np.ndarray:
    """Strong-coupling vector field (N >> s^2 form)."""
    x, p, u, v, sz = _as_state_array(state)
    om = params.g_detune + params.Delta * sz
    cx = math.cos(x)
    return np.array([
        params.alpha * p,
        -math.sin(x) * u,
        -om * v,
        om * u + 16.0 * cx * sz * params.N,
        -cx * v,
    ])


def rhs_fast_subsystem(u, v, sz, c, params: ModelParams):
    """Frozen-c fast subsystem for (u, v, sz); c = cos x is an adiabatic
    constant in [-1, 1]."""
    om = params.g_detune + params.Delta * sz
    return (-om * v, om * u + 16.0 * c * params.N * sz, -c * v)


# ----------------------------------------------------------------------
# integrals of motion
# ----------------------------------------------------------------------

def invariant_W(state, params: ModelParams) -> float:
    """W = alpha p^2/2 - u cos x + (g + Delta sz)^2 / (2 Delta).

    Conserved by both the full and the strong-coupling flow; undefined at
    Delta = 0 (use invariant_energy_small_dss there).
    """
    if params.Delta == 0.0:
        raise DomainError("invariant_W is undefined for Delta = 0; "
                          "use invariant_energy_small_dss")
    x, p, u, v, sz = _as_state_array(state)
    g = params.g_detune
    return (0.5 * params.alpha * p * p - u * math.cos(x)
            + (g + params.Delta * sz) ** 2 / (2.0 * params.Delta))


def invariant_energy_small_dss(state, params: ModelParams) -> float:
    """Delta = 0 counterpart of W: alpha p^2/2 - u cos x + delta sz."""
    x, p, u, v, sz = _as_state_array(state)
    return 0.5 * params.alpha * p * p - u * math.cos(x) + params.delta * sz


def invariant_R2(state, params: ModelParams) -> float:
    """R^2 = u^2 + v^2 + 16 N sz^2 (conserved by the strong-coupling flow)."""
    x, p, u, v, sz = _as_state_array(state)
    return u * u + v * v + 16.0 * params.N * sz * sz


def invariant_R2_generalized(state, params: ModelParams) -> float:
    """u^2 + v^2 + 16 sz^2 (N - s^2 + sz^2), conserved by the full flow."""
    x, p, u, v, sz = _as_state_array(state)
    return (u * u + v * v
            + 16.0 * sz * sz * (params.N - params.s ** 2 + sz * sz))


def _tracked_invariants(system, params: ModelParams):
    funcs = {}
    if system == "full":
        funcs["R2_generalized"] = invariant_R2_generalized
    elif system in ("strong", "fast"):
        funcs["R2"] = invariant_R2
    if params is not None and system in ("full", "strong", "fast"):
        if params.Delta != 0.0:
            if system == "fast":
                def w_fast(state, prm):
                    x, p, u, v, sz = _as_state_array(state)
                    g = prm.g_detune
                    return (-u * math.cos(x)
                            + (g + prm.Delta * sz) ** 2 / (2.0 * prm.Delta))
                funcs["W_fast"] = w_fast
            else:
                funcs["W"] = invariant_W
        else:
            if system != "fast":
                funcs["E_small_dss"] = invariant_energy_small_dss
    return funcs


# ----------------------------------------------------------------------
# Dormand-Prince 5(4) with quartic dense output
# ----------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = (
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                  -17253 / 339200, 22 / 525, -1 / 40])
# quartic interpolation weights: y(t+h*th) = y + h * sum_i k_i * poly_i(th)
_DP_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


def _resolve_system(system, params):
    if callable(system):
        return system
    if system in ("full", "strong"):
        if params is None:
            raise ParameterError(f"system {system!r} requires params")
        alpha, delta, Delta = params.alpha, params.delta, params.Delta
        N, s2 = params.N, params.s ** 2
        full = system == "full"

        def f(y, tau, _):
            x, p, u, v, sz = y
            om = delta + 0.5 * Delta + Delta * sz
            cx = math.cos(x)
            amp = (N - s2 + 2.0 * sz * sz) if full else N
            return np.array([alpha * p, -math.sin(x) * u, -om * v,
                             om * u + 16.0 * cx * sz * amp, -cx * v])
        return f
    if system == "fast":
        # frozen cos x: the strong-coupling field with the recoil switched off
        if params is None:
            raise ParameterError("system 'fast' requires params")
        g, Delta, N = params.g_detune, params.Delta, params.N

        def fast(y, tau, _):
            c = math.cos(y[0])
            u, v, sz = y[2], y[3], y[4]
            om = g + Delta * sz
            return np.array([0.0, 0.0, -om * v, om * u + 16.0 * c * N * sz,
                             -c * v])
        return fast
    raise ParameterError(f"unknown system selector {system!r}")


def integrate(system, state0, t_end, dt_out, rtol=1e-9, atol=1e-12,
              params: ModelParams = None, max_step=np.inf) -> Trajectory:
    """Integrate one of the semiclassical systems from tau = 0 to t_end.

    system may be "full", "strong", "fast" (cos x frozen at its initial
    value) or a callable f(y, tau, params) -> dy/dtau.  Output is sampled
    on the uniform grid 0, dt_out, 2 dt_out, ... using the embedded
    quartic interpolant, so tightening the step controller does not change
    the sample times.  Deterministic for identical inputs.
    """
    if t_end <= 0:
        raise ParameterError(f"t_end must be positive, got {t_end}")
    if dt_out <= 0:
        raise ParameterError(f"dt_out must be positive, got {dt_out}")
    if rtol <= 0 or atol <= 0:
        raise ParameterError("rtol and atol must be positive")
    f = _resolve_system(system, params)
    if callable(system):
        y = np.atleast_1d(np.asarray(state0, dtype=float)).copy()
    else:
        y = _as_state_array(state0)
    t = 0.0

    n_out = int(math.floor(t_end / dt_out + 1e-9)) + 1
    out_times = np.arange(n_out) * dt_out
    if out_times[-1] < t_end - 1e-9 * dt_out:
        out_times = np.append(out_times, t_end)
    samples = np.empty((len(out_times), len(y)))
    samples[0] = y
    next_out = 1

    # initial step from the local derivative scale
    f0 = f(y, t, params)
    scale = atol + rtol * np.abs(y)
    d0 = math.sqrt(float(np.mean((y / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h = 0.01 * d0 / d1 if d1 > 1e-12 else 1e-6
    h = min(h, t_end, max_step, dt_out * 10.0)
    h = max(h, 1e-12)

    k0 = f0
    # PI step controller (Gustafsson): smooths the step sequence and keeps
    # the realized local error well below the per-step tolerance
    safety, min_fac, max_fac = 0.9, 0.2, 10.0
    beta_this, beta_prev = 0.7 / 5.0, 0.4 / 5.0
    err_prev = 1.0
    a4, a5, a6 = _DP_A[3], _DP_A[4], _DP_A[5]
    while t < t_end:
        h = min(h, t_end - t, max_step)
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflowError(
                f"step size underflow at tau={t}", t=t)
        k1 = f(y + h * (0.2 * k0), t + _DP_C[1] * h, params)
        k2 = f(y + h * (0.075 * k0 + 0.225 * k1), t + _DP_C[2] * h, params)
        k3 = f(y + h * (a4[0] * k0 + a4[1] * k1 + a4[2] * k2),
               t + _DP_C[3] * h, params)
        k4 = f(y + h * (a5[0] * k0 + a5[1] * k1 + a5[2] * k2 + a5[3] * k3),
               t + _DP_C[4] * h, params)
        k5 = f(y + h * (a6[0] * k0 + a6[1] * k1 + a6[2] * k2 + a6[3] * k3
                        + a6[4] * k4), t + _DP_C[5] * h, params)
        y_new = y + h * (_DP_B[0] * k0 + _DP_B[2] * k2 + _DP_B[3] * k3
                         + _DP_B[4] * k4 + _DP_B[5] * k5)
        k6 = f(y_new, t + h, params)
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteStateError(
                f"state became non-finite at tau={t + h}", t=t + h)
        err_vec = h * (_DP_E[0] * k0 + _DP_E[2] * k2 + _DP_E[3] * k3
                       + _DP_E[4] * k4 + _DP_E[5] * k5 + _DP_E[6] * k6)
        # target half the requested tolerance: keeps the realized error
        # comfortably inside rtol at ~15% extra steps
        scale = 0.5 * (atol + rtol * np.maximum(np.abs(y), np.abs(y_new)))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        if err <= 1.0:
            # accepted: fill output samples inside (t, t+h]
            t_new = t + h
            while next_out < len(out_times) and out_times[next_out] <= t_new + 1e-12 * max(1.0, t_new):
                th = (out_times[next_out] - t) / h
                pw = np.array([th, th * th, th ** 3, th ** 4])
                c = _DP_P @ pw
                samples[next_out] = y + h * (
                    c[0] * k0 + c[2] * k2 + c[3] * k3 + c[4] * k4
                    + c[5] * k5 + c[6] * k6)
                next_out += 1
            t = t_new
            y = y_new
            k0 = k6  # FSAL
            if err == 0.0:
                factor = max_fac
            else:
                factor = min(max_fac, max(
                    min_fac,
                    safety * err ** -beta_this * err_prev ** beta_prev))
            err_prev = max(err, 1e-10)
            h *= factor
        else:
            h *= max(min_fac, safety * err ** -0.2)

    samples[-1] = y
    traj = Trajectory(times=out_times, states=samples)
    _fill_drift(traj, system, params)
    return traj


def _fill_drift(traj: Trajectory, system, params):
    funcs = _tracked_invariants(system if not callable(system) else None, params)
    drifts = {}
    for name, fn in funcs.items():
        vals = np.array([fn(row, params) for row in traj.states])
        scale = max(abs(vals[0]), 1e-30)
        drifts[name] = float(np.max(np.abs(vals - vals[0])) / scale)
    traj.invariant_drifts = drifts
    traj.conserved_drift = max(drifts.values()) if drifts else 0.0
