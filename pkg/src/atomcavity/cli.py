"""Scenario runner: reads a JSON config, dispatches to the library, writes
plot-ready CSV files plus a manifest with checksums and derived results.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 invariant
violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import analytic, chaos, quantum
from .errors import (AtomCavityError, ConfigError, IntegrationError,
                     InvariantViolationError, ParameterError)
from .semiclassical import ModelParams, SemiclassicalState, integrate

SCENARIO_INFO = {
    "ResonantBifurcation":
        "resonant adiabatic drift through the topological bifurcation; "
        "emits the composed inversion, the detected singularity time and "
        "the closed-form bifurcation time",
    "NonresonantSwitching":
        "non-resonant spin-orientation switching between 1 and the floor "
        "value; analytic solution cross-checked against direct integration",
    "ChaoticMotion":
        "non-adiabatic run: full-system trajectory, inversion "
        "autocorrelation, spectrum and chaos verdict",
    "PurityAdiabatic":
        "strong-coupling closed-form purity surface over time and atom "
        "position",
    "PurityWeakRegular":
        "weak-coupling purity with the regular-motion (cosine-integral) "
        "phase factor",
    "PurityWeakChaotic":
        "weak-coupling purity with the ensemble-averaged (error-function) "
        "phase factor",
    "Custom":
        "full-system integration with user-supplied parameters and "
        "initial state",
}

_PARAM_KEYS = {"alpha", "delta", "Delta", "zeta", "N", "s", "Omega0",
               "n_bar", "delta_q"}
_INITIAL_KEYS = {"x", "p", "u", "v", "sz"}
_INTEGRATE_KEYS = {"t_max", "dt_out", "rtol", "atol"}
_QUANTUM_KEYS = {"n_max", "alpha0"}
_TOP_KEYS = {"scenario", "params", "initial", "integrate", "quantum",
             "seed", "output_dir"}

_SCENARIO_DEFAULTS = {
    "ResonantBifurcation": {
        # R0 = 20, alpha = 5e-3, zeta/Omega0 = 2, resonant (g = 0)
        "params": {"alpha": 5e-3, "delta": -1.0, "Delta": 2.0, "N": 25.0,
                   "s": 1.0, "Omega0": 1.0, "n_bar": 0.0, "delta_q": 0.0},
        "initial": {"x": 0.0, "p": 0.0, "u": 0.0, "v": 0.0, "sz": 1.0},
        "integrate": {"t_max": 4.4, "dt_out": 0.002, "rtol": 1e-9,
                      "atol": 1e-12},
        "quantum": {"n_max": None, "alpha0": None},
    },
    "NonresonantSwitching": {
        # detuning set so the degenerate top root is exactly 2/3:
        # (g + Delta)/(c R0) = sqrt(3), floor = 1/2
        "params": {"alpha": 1e-4, "delta": 4.0 * math.sqrt(3.0) - 0.0012,
                   "Delta": 8e-4, "N": 1.0, "s": 1.0, "Omega0": 1.0,
                   "n_bar": 0.0, "delta_q": 0.0},
        "initial": {"x": 0.0, "p": 0.0, "u": 0.0, "v": 0.0, "sz": 1.0},
        "integrate": {"t_max": 2.4, "dt_out": 0.0005, "rtol": 1e-10,
                      "atol": 1e-13},
        "quantum": {"n_max": None, "alpha0": None},
    },
    "ChaoticMotion": {
        # p0 = 2 puts the atom above the trapping threshold so the motion
        # diffuses through the wells (p0 = 1 stays trapped and regular)
        "params": {"alpha": 0.5, "delta": -0.5, "Delta": 0.0, "N": 50.0,
                   "s": 1.0, "Omega0": 1.0, "n_bar": 0.0, "delta_q": 0.0},
        "initial": {"x": 0.0, "p": 2.0, "u": 0.0, "v": 0.0, "sz": 1.0},
        "integrate": {"t_max": 1200.0, "dt_out": 0.05, "rtol": 1e-7,
                      "atol": 1e-10},
        "quantum": {"n_max": None, "alpha0": None},
    },
    "PurityAdiabatic": {
        "params": {"alpha": 5e-3, "delta": 0.0, "zeta": 1.0, "N": 1.0,
                   "s": 1.0, "Omega0": 1.0, "n_bar": 1.0, "delta_q": 1.0},
        "initial": {"x": 0.0, "p": 0.0, "u": 0.0, "v": 0.0, "sz": 1.0},
        "integrate": {"t_max": 10.0, "dt_out": 0.05, "rtol": 1e-9,
                      "atol": 1e-12},
        "quantum": {"n_max": None, "alpha0": None},
    },
    "PurityWeakRegular": {
        "params": {"alpha": 1e-2, "delta": 0.0, "zeta": 0.2, "N": 1.0,
                   "s": 1.0, "Omega0": 0.1, "n_bar": 1.0, "delta_q": 0.0},
        "initial": {"x": 0.0, "p": 0.0, "u": 0.0, "v": 0.0, "sz": 1.0},
        "integrate": {"t_max": 150.0, "dt_out": 0.02, "rtol": 1e-9,
                      "atol": 1e-12},
        "quantum": {"n_max": None, "alpha0": None},
    },
    "PurityWeakChaotic": {
        "params": {"alpha": 0.5, "delta": 0.0, "zeta": 0.2, "N": 1.0,
                   "s": 1.0, "Omega0": 0.1, "n_bar": 1.0, "delta_q": 0.0},
        "initial": {"x": 0.0, "p": 0.0, "u": 0.0, "v": 0.0, "sz": 1.0},
        "integrate": {"t_max": 30.0, "dt_out": 0.01, "rtol": 1e-9,
                      "atol": 1e-12},
        "quantum": {"n_max": None, "alpha0": 1.0},
    },
    "Custom": {
        "params": {"alpha": 0.5, "delta": -0.5, "Delta": 0.0, "N": 50.0,
                   "s": 1.0, "Omega0": 1.0, "n_bar": 0.0, "delta_q": 0.0},
        "initial": {"x": 0.0, "p": 1.0, "u": 0.0, "v": 0.0, "sz": 1.0},
        "integrate": {"t_max": 100.0, "dt_out": 0.05, "rtol": 1e-9,
                      "atol": 1e-12},
        "quantum": {"n_max": None, "alpha0": None},
    },
}

# worst acceptable relative invariant drift per scenario trajectory
# (long chaotic horizons accumulate ~1e4 steps of controller-level error)
_DRIFT_TOL = {"ChaoticMotion": 1e-3, "Custom": 1e-3,
              "NonresonantSwitching": 1e-8}


@dataclass
class RunConfig:
    scenario: str
    params: ModelParams
    initial: SemiclassicalState
    t_max: float
    dt_out: float
    rtol: float
    atol: float
    n_max: int = None
    alpha0: float = None
    seed: int = 0
    output_dir: str = "."

    def echo(self) -> dict:
        return {
            "scenario": self.scenario,
            "params": {k: getattr(self.params, k) for k in sorted(_PARAM_KEYS)},
            "initial": asdict(self.initial),
            "integrate": {"t_max": self.t_max, "dt_out": self.dt_out,
                          "rtol": self.rtol, "atol": self.atol},
            "quantum": {"n_max": self.n_max, "alpha0": self.alpha0},
            "seed": self.seed,
            "output_dir": str(self.output_dir),
        }


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def validate_config(raw) -> RunConfig:
    """Parse and validate a config (JSON text or dict), applying the
    scenario defaults.  Unknown keys are a hard error."""
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "top level")
    scenario = raw.get("scenario")
    if scenario not in SCENARIO_INFO:
        raise ConfigError(
            f"scenario must be one of {sorted(SCENARIO_INFO)}, got {scenario!r}")
    defaults = _SCENARIO_DEFAULTS[scenario]
    p = dict(defaults["params"])
    user_params = raw.get("params", {})
    _check_keys(user_params, _PARAM_KEYS, "params")
    p.update(user_params)
    ini = dict(defaults["initial"])
    user_ini = raw.get("initial", {})
    _check_keys(user_ini, _INITIAL_KEYS, "initial")
    ini.update(user_ini)
    intg = dict(defaults["integrate"])
    user_intg = raw.get("integrate", {})
    _check_keys(user_intg, _INTEGRATE_KEYS, "integrate")
    intg.update(user_intg)
    qu = dict(defaults["quantum"])
    user_qu = raw.get("quantum", {})
    _check_keys(user_qu, _QUANTUM_KEYS, "quantum")
    qu.update(user_qu)

    for name, val in [("t_max", intg["t_max"]), ("dt_out", intg["dt_out"]),
                      ("rtol", intg["rtol"]), ("atol", intg["atol"])]:
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise ConfigError(f"integrate.{name} must be a positive finite "
                              f"number, got {val!r}")
    for name, val in {**p, **ini}.items():
        if val is not None and not (isinstance(val, (int, float))
                                    and math.isfinite(val)):
            raise ConfigError(f"field {name} must be finite, got {val!r}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    try:
        params = ModelParams(**p)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        scenario=scenario, params=params,
        initial=SemiclassicalState(**ini),
        t_max=float(intg["t_max"]), dt_out=float(intg["dt_out"]),
        rtol=float(intg["rtol"]), atol=float(intg["atol"]),
        n_max=qu["n_max"], alpha0=qu["alpha0"], seed=seed,
        output_dir=raw.get("output_dir", "."))


# ----------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------

def _write_csv(path: Path, header: str, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    fmt = ",".join(["%.17g"] * len(cols)) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in zip(*cols):
            fh.write(fmt % row)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


@dataclass
class RunManifest:
    scenario: str
    config: dict
    library_version: str
    wall_time_s: float
    outputs: dict = field(default_factory=dict)
    invariant_drift: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)

    def write(self, path: Path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ----------------------------------------------------------------------
# scenarios
# ----------------------------------------------------------------------

def _scenario_resonant_bifurcation(cfg: RunConfig, outdir: Path, man: RunManifest):
    params = cfg.params
    tau_b = analytic.bifurcation_time(params)
    taus = np.arange(0.0, cfg.t_max + 0.5 * cfg.dt_out, cfg.dt_out)
    # keep the grid clear of the mode-function node
    rate = math.sqrt(params.Delta / params.alpha
                     - params.Delta ** 2 / (8.0 * params.R0 ** 2)) * params.alpha
    tau_node = math.log(0.999 * math.pi / 2.0) / rate
    taus = taus[taus <= tau_node]
    xs, kappas, sz = analytic.composed_inversion(params, taus, form="exp")
    path = outdir / "inversion.csv"
    _write_csv(path, "tau,x,kappa,sz", [taus, xs, kappas, sz])
    man.outputs["inversion.csv"] = _sha256(path)
    tau_sing = analytic.singularity_time(params, tau_node, form="exp")
    man.results.update({
        "tau_bifurcation_formula": tau_b,
        "tau_singularity_detected": tau_sing,
        "detected_over_formula": tau_sing / tau_b,
    })


def _measure_full_periods(times, values):
    """Average spacing of successive minima of a 1-d oscillation."""
    v = np.asarray(values)
    mins = [i for i in range(1, len(v) - 1)
            if v[i] <= v[i - 1] and v[i] < v[i + 1]]
    if len(mins) < 2:
        raise IntegrationError("fewer than two oscillation minima found")
    return float(np.mean(np.diff(times[np.asarray(mins)])))


def _scenario_nonresonant_switching(cfg: RunConfig, outdir: Path, man: RunManifest):
    params = cfg.params
    sp = analytic.weierstrass_coeffs_nonresonant(params, cfg.initial.x)
    taus = np.arange(0.0, cfg.t_max + 0.5 * cfg.dt_out, cfg.dt_out)
    sz_an = analytic.sz_nonresonant(taus, sp)
    traj = integrate("fast", cfg.initial, cfg.t_max, cfg.dt_out,
                     rtol=cfg.rtol, atol=cfg.atol, params=params)
    man.invariant_drift = traj.invariant_drifts
    path = outdir / "switching.csv"
    n = min(len(taus), len(traj.times))
    _write_csv(path, "tau,sz_analytic,sz_numeric",
               [taus[:n], sz_an[:n], traj.sz[:n]])
    man.outputs["switching.csv"] = _sha256(path)
    ode_period = _measure_full_periods(traj.times, traj.sz)
    man.results.update({
        "floor_analytic": sp.floor,
        "floor_numeric": float(traj.sz.min()),
        "switch_interval": sp.period,
        "full_period_analytic": sp.full_period,
        "full_period_numeric": ode_period,
        "period_rel_error": abs(ode_period - sp.full_period) / sp.full_period,
        "top_root_degenerate": sp.e1,
    })


def _scenario_chaotic_motion(cfg: RunConfig, outdir: Path, man: RunManifest):
    traj = integrate("full", cfg.initial, cfg.t_max, cfg.dt_out,
                     rtol=cfg.rtol, atol=cfg.atol, params=cfg.params)
    man.invariant_drift = traj.invariant_drifts
    path = outdir / "trajectory.csv"
    traj.write_csv(path)
    man.outputs["trajectory.csv"] = _sha256(path)
    est = chaos.autocorrelation(traj.sz, cfg.dt_out, max_lag=4.0)
    chaos.compute_spectrum(est, omega_max=40.0)
    pa = outdir / "autocorr.csv"
    _write_csv(pa, "lag,corr", [est.lags, est.autocorr])
    man.outputs["autocorr.csv"] = _sha256(pa)
    ps = outdir / "spectrum.csv"
    _write_csv(ps, "omega,power", [est.freqs, est.power])
    man.outputs["spectrum.csv"] = _sha256(ps)
    verdict = chaos.chaos_verdict(traj.sz, cfg.dt_out, max_lag=4.0,
                                  omega_max=40.0)
    man.results["verdict"] = verdict
    pv = outdir / "verdict.json"
    with open(pv, "w", encoding="utf-8") as fh:
        json.dump({"tau_c": verdict["tau_c"],
                   "fit_residual": verdict["fit_residual"],
                   "chaotic": verdict["chaotic"]}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    man.outputs["verdict.json"] = _sha256(pv)


def _scenario_purity_adiabatic(cfg: RunConfig, outdir: Path, man: RunManifest):
    params = cfg.params
    ts = np.linspace(0.0, cfg.t_max, 200)
    xs = np.linspace(0.0, math.pi, 200)
    grid = quantum.purity_closed_adiabatic(ts[:, None], xs[None, :], params)
    path = outdir / "purity_grid.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,purity\n")
        for i, t in enumerate(ts):
            for j, x in enumerate(xs):
                fh.write("%.17g,%.17g,%.17g\n" % (t, x, grid[i, j]))
    man.outputs["purity_grid.csv"] = _sha256(path)
    rho = quantum.density_resonant_closed(ts, 0.0, params)
    pd = outdir / "density.csv"
    _write_csv(pd, "t,rho11,rho22,re_rho12,im_rho12",
               [ts, rho.rho11, rho.rho22, np.real(rho.rho12),
                np.imag(rho.rho12)])
    man.outputs["density.csv"] = _sha256(pd)
    pp = outdir / "purity.csv"
    _write_csv(pp, "t,purity",
               [ts, quantum.purity_closed_adiabatic(ts, 0.0, params)])
    man.outputs["purity.csv"] = _sha256(pp)
    man.results.update({
        "purity_min_at_antinode": float(np.min(grid[:, 0])),
        "space_time_average": quantum.purity_adiabatic_space_time_average(params),
    })


def dominant_frequency(times, values, t_lo, t_hi,
                       floor_rel: float = 1e-2) -> float:
    """Dominant oscillation frequency (cycles per time unit) of a window,
    from the peak of the Hann-windowed FFT power; 0 when the window's
    variation is below floor_rel times the full-series variation."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    full_std = float(np.std(values - values.mean()))
    m = (times >= t_lo) & (times <= t_hi)
    seg = values[m] - values[m].mean()
    if len(seg) < 16 or seg.std() < floor_rel * full_std:
        return 0.0
    w = np.hanning(len(seg))
    power = np.abs(np.fft.rfft(seg * w)) ** 2
    freqs = np.fft.rfftfreq(len(seg), d=times[1] - times[0])
    return float(freqs[1 + int(np.argmax(power[1:]))])


def _scenario_purity_weak(cfg: RunConfig, outdir: Path, man: RunManifest,
                          regime: quantum.Regime):
    ts = np.arange(0.0, cfg.t_max + 0.5 * cfg.dt_out, cfg.dt_out)
    curve = quantum.purity_weak(ts, regime, cfg.params, alpha0=cfg.alpha0)
    path = outdir / "purity.csv"
    _write_csv(path, "t,purity", [curve.times, curve.purity])
    man.outputs["purity.csv"] = _sha256(path)
    if regime is quantum.Regime.WEAK_REGULAR:
        f_early = dominant_frequency(ts, curve.purity, 0.0, 30.0)
        f_late = dominant_frequency(ts, curve.purity, 70.0,
                                    min(100.0, cfg.t_max))
        man.results.update({"freq_early": f_early, "freq_late": f_late})
    else:
        m = ts >= 2.0 * cfg.t_max / 3.0
        man.results.update({
            "final_window_mean_purity": float(np.mean(curve.purity[m])),
            "alpha0": cfg.alpha0,
        })


def _scenario_custom(cfg: RunConfig, outdir: Path, man: RunManifest):
    traj = integrate("full", cfg.initial, cfg.t_max, cfg.dt_out,
                     rtol=cfg.rtol, atol=cfg.atol, params=cfg.params)
    man.invariant_drift = traj.invariant_drifts
    path = outdir / "trajectory.csv"
    traj.write_csv(path)
    man.outputs["trajectory.csv"] = _sha256(path)
    man.results["final_state"] = asdict(traj.final_state())


def run_scenario(config: RunConfig) -> RunManifest:
    """Execute one scenario and write its outputs plus manifest.json."""
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    man = RunManifest(scenario=config.scenario, config=config.echo(),
                      library_version=__version__, wall_time_s=0.0)
    t0 = time.perf_counter()
    if config.scenario == "ResonantBifurcation":
        _scenario_resonant_bifurcation(config, outdir, man)
    elif config.scenario == "NonresonantSwitching":
        _scenario_nonresonant_switching(config, outdir, man)
    elif config.scenario == "ChaoticMotion":
        _scenario_chaotic_motion(config, outdir, man)
    elif config.scenario == "PurityAdiabatic":
        _scenario_purity_adiabatic(config, outdir, man)
    elif config.scenario == "PurityWeakRegular":
        _scenario_purity_weak(config, outdir, man, quantum.Regime.WEAK_REGULAR)
    elif config.scenario == "PurityWeakChaotic":
        _scenario_purity_weak(config, outdir, man, quantum.Regime.WEAK_CHAOTIC)
    elif config.scenario == "Custom":
        _scenario_custom(config, outdir, man)
    else:  # pragma: no cover - guarded by validate_config
        raise ConfigError(f"unhandled scenario {config.scenario}")
    man.wall_time_s = time.perf_counter() - t0
    tol = _DRIFT_TOL.get(config.scenario)
    if tol is not None and man.invariant_drift:
        worst = max(man.invariant_drift.values())
        if worst > tol:
            man.write(outdir / "manifest.json")
            raise InvariantViolationError(
                f"invariant drift {worst:.2e} exceeds tolerance {tol:.0e}")
    man.write(outdir / "manifest.json")
    return man


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="atomcavity",
        description="two-photon atom in a non-uniform cavity: scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one scenario from a JSON config")
    runp.add_argument("--config", required=True, help="path to the JSON config")
    runp.add_argument("--out", default=None, help="output directory override")
    runp.add_argument("--seed", type=int, default=None, help="seed override")
    sub.add_parser("scenarios", help="list built-in scenarios")
    args = parser.parse_args(argv)

    if args.command == "scenarios":
        for name in SCENARIO_INFO:
            print(f"{name}: {SCENARIO_INFO[name]}")
        return 0

    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if args.out is not None:
            raw["output_dir"] = args.out
        if args.seed is not None:
            raw["seed"] = args.seed
        config = validate_config(raw)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        man = run_scenario(config)
    except InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    except (IntegrationError, AtomCavityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(man.results, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
