"""Small-Stark-shift limit: rotation propagator, pendulum reduction,
separatrix, stochastic-layer width, and generic chaos diagnostics.

The diagnostics follow the line-width criterion: a chaotic signal has a
decaying correlation function whose spectrum is a finite-width Lorentzian,
while a regular signal keeps a resolution-limited line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CorrelationFitError, DomainError, ParameterError
from .semiclassical import ModelParams


@dataclass(frozen=True)
class SmallDssParams:
    """Frozen-x parameters of the Delta -> 0 subsystem.

    C0 = -R0 cos x, OmegaN^2 = delta^2 + C0^2, and the slow pendulum
    frequency omega_pend = 4 R0 sqrt(alpha |delta|) / OmegaN.
    """

    delta: float
    C0: float
    OmegaN: float
    omega_pend: float

    def __post_init__(self):
        if abs(self.OmegaN ** 2 - self.delta ** 2 - self.C0 ** 2) > 1e-12 * max(
                1.0, self.OmegaN ** 2):
            raise ParameterError("OmegaN^2 must equal delta^2 + C0^2")

    @classmethod
    def from_model(cls, params: ModelParams, x: float) -> "SmallDssParams":
        C0 = -params.R0 * math.cos(x)
        OmegaN = math.hypot(params.delta, C0)
        if OmegaN == 0.0:
            raise ParameterError("OmegaN = 0: delta and cos x both vanish")
        omega_pend = 4.0 * params.R0 * math.sqrt(
            params.alpha * abs(params.delta)) / OmegaN
        return cls(delta=params.delta, C0=C0, OmegaN=OmegaN,
                   omega_pend=omega_pend)


def propagator_matrix(tau: float, sd: SmallDssParams) -> np.ndarray:
    """Exact propagator of (u, v, R0 sz) at frozen x and Delta = 0; a
    rotation about the axis (C0, 0, delta)/OmegaN by angle OmegaN tau."""
    if sd.OmegaN <= 0:
        raise ParameterError("propagator requires OmegaN > 0")
    W, d, c0 = sd.OmegaN, sd.delta, sd.C0
    ct, st = math.cos(W * tau), math.sin(W * tau)
    return np.array([
        [c0 * c0 / W ** 2 + d * d / W ** 2 * ct, -d / W * st,
         c0 * d / W ** 2 * (1.0 - ct)],
        [d / W * st, ct, -c0 / W * st],
        [c0 * d / W ** 2 * (1.0 - ct), c0 / W * st,
         d * d / W ** 2 + c0 * c0 / W ** 2 * ct],
    ])


def evolve_small_dss(u0: float, v0: float, sz0: float, tau, sd: SmallDssParams,
                     R0: float):
    """Apply the rotation propagator to (u, v, R0 sz); tau may be an array.

    For u0 = v0 = 0, sz0 = 1 the inversion reduces to
    sz = delta^2/OmegaN^2 + (C0^2/OmegaN^2) cos(OmegaN tau).
    """
    W, d, c0 = sd.OmegaN, sd.delta, sd.C0
    tau = np.asarray(tau, dtype=float)
    ct, st = np.cos(W * tau), np.sin(W * tau)
    X0, Y0, Z0 = u0, v0, R0 * sz0
    X = (c0 * c0 / W ** 2 + d * d / W ** 2 * ct) * X0 \
        - d / W * st * Y0 + c0 * d / W ** 2 * (1.0 - ct) * Z0
    Y = d / W * st * X0 + ct * Y0 - c0 / W * st * Z0
    Z = c0 * d / W ** 2 * (1.0 - ct) * X0 + c0 / W * st * Y0 \
        + (d * d / W ** 2 + c0 * c0 / W ** 2 * ct) * Z0
    if tau.ndim == 0:
        return float(X), float(Y), float(Z) / R0
    return X, Y, Z / R0


def pendulum_rhs(x, xdot, tau, sd: SmallDssParams):
    """Parametrically driven pendulum acceleration
    d2x/dtau2 = omega^2 (1 - cos(OmegaN tau)) sin x."""
    return sd.omega_pend ** 2 * (1.0 - np.cos(sd.OmegaN * tau)) * np.sin(x)


def pendulum_energy(x, xdot, omega_pend: float):
    """First integral of the time-averaged drive, H0 = xdot^2/2
    + omega^2 cos x; the saddle sits at x = 0 with separatrix energy
    omega^2 (sign convention fixed by the driven equation above)."""
    return 0.5 * np.asarray(xdot, dtype=float) ** 2 \
        + omega_pend ** 2 * np.cos(np.asarray(x, dtype=float))


def separatrix_solution(tau, tau0: float, omega_pend: float, sign: int = 1):
    """Separatrix orbit of the averaged pendulum:
    x_s = 4 arctan exp(+-omega (tau - tau0)),
    xdot_s = +-2 omega / cosh(omega (tau - tau0))."""
    if omega_pend <= 0:
        raise ParameterError("separatrix requires omega_pend > 0")
    s = 1 if sign >= 0 else -1
    arg = s * omega_pend * (np.asarray(tau, dtype=float) - tau0)
    x = 4.0 * np.arctan(np.exp(arg))
    xdot = s * 2.0 * omega_pend / np.cosh(arg)
    if np.ndim(tau) == 0:
        return float(x), float(xdot)
    return x, xdot


def stochastic_layer_width(sd: SmallDssParams) -> float:
    """Energy width of the stochastic layer around the separatrix,
    dE = (4 pi OmegaN^3 / omega) exp(pi OmegaN / 2 omega)
         / sinh(pi OmegaN / omega), evaluated in log space."""
    w = sd.omega_pend
    if w <= 0:
        raise ParameterError("layer width requires omega_pend > 0")
    W = abs(sd.OmegaN)
    z = math.pi * W / w
    if z < 30.0:
        log_sinh = math.log(math.sinh(z))
    else:
        log_sinh = z - math.log(2.0) + math.log1p(-math.exp(-2.0 * z))
    log_de = (math.log(4.0 * math.pi) + 3.0 * math.log(W) - math.log(w)
              + 0.5 * z - log_sinh)
    return math.exp(log_de)


# ----------------------------------------------------------------------
# correlation diagnostics
# ----------------------------------------------------------------------

@dataclass
class SpectrumEstimate:
    """Autocorrelation, its cosine-transform spectrum and Lorentzian fit."""

    lags: np.ndarray
    autocorr: np.ndarray
    freqs: np.ndarray = field(default_factory=lambda: np.empty(0))
    power: np.ndarray = field(default_factory=lambda: np.empty(0))
    tau_c: float = float("nan")
    fit_residual: float = float("nan")
    series_length: float = float("nan")
    peak_height: float = float("nan")
    centered: bool = False


def autocorrelation(series, dt: float, max_lag: float) -> SpectrumEstimate:
    """Biased autocorrelation of a mean-removed series, normalized so the
    zero-lag value is 1, up to lag max_lag.

    Requires at least 10 * max_lag / dt samples so the long-lag estimates
    keep a usable number of averages.
    """
    x = np.asarray(series, dtype=float)
    if dt <= 0 or max_lag <= 0:
        raise ParameterError("dt and max_lag must be positive")
    n = len(x)
    m = int(round(max_lag / dt))
    if n < 10 * m or m < 2:
        raise DomainError(
            f"series too short: need >= 10 * max_lag/dt = {10 * m} samples, "
            f"got {n}")
    x = x - x.mean()
    f = np.fft.rfft(x, 2 * n)
    acov = np.fft.irfft(f * np.conj(f))[:m + 1] / n
    if acov[0] <= 0:
        raise DomainError("series has zero variance")
    est = SpectrumEstimate(lags=np.arange(m + 1) * dt,
                           autocorr=acov / acov[0])
    est.series_length = n * dt
    return est


def compute_spectrum(est: SpectrumEstimate, omega_max: float,
                     n_freq: int = 600) -> SpectrumEstimate:
    """One-sided cosine transform of the Hann-windowed autocorrelation,
    evaluated on a uniform grid [0, omega_max] (Blackman-Tukey estimate)."""
    m = len(est.autocorr) - 1
    window = 0.5 * (1.0 + np.cos(np.pi * np.arange(m + 1) / m))
    g = est.autocorr * window
    dt = est.lags[1] - est.lags[0]
    weights = np.ones(m + 1)
    weights[0] = weights[-1] = 0.5
    est.freqs = np.linspace(0.0, omega_max, n_freq)
    est.power = 2.0 * dt * (np.cos(np.outer(est.freqs, est.lags)) @ (weights * g))
    return est


def _lorentzian_gauss_newton(om: np.ndarray, S: np.ndarray):
    """Fit A tau / (1 + (om tau)^2); returns (A, tau).  Gauss-Newton in
    (A, log tau) with the analytic Jacobian, seeded from the half width."""
    S0 = max(S[0], 1e-300)
    below = np.where(S < 0.5 * S0)[0]
    tau = 1.0 / om[below[0]] if len(below) and om[below[0]] > 0 else 2.0 / max(
        om[-1], 1e-12)
    A = S0 / max(tau, 1e-300)
    theta = math.log(max(tau, 1e-300))
    for _ in range(300):
        tau = math.exp(theta)
        den = 1.0 + (om * tau) ** 2
        model = A * tau / den
        r = S - model
        J = np.stack([tau / den, A * tau * (1.0 - (om * tau) ** 2) / den ** 2],
                     axis=1)
        try:
            dp, *_ = np.linalg.lstsq(J, r, rcond=None)
        except np.linalg.LinAlgError:
            break
        A += dp[0]
        theta += float(np.clip(dp[1], -1.0, 1.0))
        if abs(dp[1]) < 1e-13:
            break
    return A, math.exp(theta)


def correlation_time(est: SpectrumEstimate, residual_threshold: float = 0.2,
                     band_factor: float = 2.0) -> float:
    """Correlation time from a Lorentzian fit to the central spectral peak.

    The model A tau_c / (1 + (omega tau_c)^2) is fitted over the band
    [0, band_factor * half-width]; the residual is the RMS misfit over that
    band normalized by the fitted peak height A tau_c.  Raises
    CorrelationFitError when the spectrum is not a centered Lorentzian line
    (peak away from zero frequency, or misfit above the threshold).
    """
    if est.power.size == 0:
        raise ParameterError("call compute_spectrum before correlation_time")
    om, S = est.freqs, est.power
    est.centered = bool(S[0] >= 0.5 * S.max())
    if not est.centered:
        est.tau_c = float("nan")
        est.fit_residual = float("inf")
        raise CorrelationFitError(
            "spectrum peaks away from zero frequency; not a centered "
            "Lorentzian line", tau_c=None, fit_residual=float("inf"))
    below = np.where(S < 0.5 * S[0])[0]
    w_half = om[below[0]] if len(below) else om[-1]
    band = om <= band_factor * w_half
    if band.sum() < 12:
        band = np.ones_like(om, dtype=bool)
    A, tau = _lorentzian_gauss_newton(om[band], S[band])
    peak = max(abs(A * tau), 1e-300)
    model = A * tau / (1.0 + (om[band] * tau) ** 2)
    resid = float(np.sqrt(np.mean((S[band] - model) ** 2)) / peak)
    est.tau_c = float(tau)
    est.fit_residual = resid
    est.peak_height = float(A * tau)
    if resid > residual_threshold:
        raise CorrelationFitError(
            f"Lorentzian misfit {resid:.3f} exceeds threshold "
            f"{residual_threshold}", tau_c=tau, fit_residual=resid)
    return float(tau)


def chaos_verdict(series, dt: float, max_lag: float, omega_max: float,
                  n_freq: int = 600, residual_threshold: float = 0.2) -> dict:
    """Full diagnostic chain: autocorrelation, spectrum, Lorentzian fit.

    Chaotic means all of: the spectrum is a zero-centered line, the
    Lorentzian fit residual is below threshold, the fitted width is
    resolved (1/tau_c above twice the spectral resolution 2 pi / max_lag),
    and tau_c is small against the series length (tau_c < T/10).
    """
    est = autocorrelation(series, dt, max_lag)
    compute_spectrum(est, omega_max, n_freq)
    T = est.series_length
    try:
        tau_c = correlation_time(est, residual_threshold)
        fit_ok = True
    except CorrelationFitError:
        tau_c = est.tau_c
        fit_ok = False
    resolved = bool(np.isfinite(tau_c) and tau_c > 0
                    and 1.0 / tau_c > 2.0 * (2.0 * math.pi / max_lag))
    chaotic = bool(fit_ok and resolved and tau_c < T / 10.0)
    return {
        "tau_c": float(tau_c) if np.isfinite(tau_c) else None,
        "fit_residual": float(est.fit_residual)
        if np.isfinite(est.fit_residual) else None,
        "centered": est.centered,
        "width_resolved": resolved,
        "chaotic": chaotic,
    }
