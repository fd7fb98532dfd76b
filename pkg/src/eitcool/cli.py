"""Scenario runner: reproducible pipelines emitting CSV/JSON artifacts.

Every quantity in a config file is an ordinary laboratory unit (MHz, kHz,
us, uK, um, nm) and is converted to internal angular frequencies / SI at
this boundary.  Each artifact carries a provenance header (tool version,
hash of the resolved config, seed) from which it can be regenerated
exactly.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, bloch, cooling, fit, spectra, thermometry
from .core import (LambdaParams, Spectrum, khz_to_angular, mhz_to_angular,
                   saturation_to_rabi, CONSTANTS)
from .errors import (ConfigError, DegenerateFitError, FitConvergenceError,
                     GridEdgeError, HeatingError, IntegrationInstabilityError,
                     NonUniqueSteadyStateError)
from .presets import (available_presets, load_preset, multi_lambda_components,
                      parse_config_text)
from .rng import derive_key
from .trap import TrapGeometry

SCENARIOS = ("spectrum", "spectrum-obe", "cooling-map", "cooling-dynamics",
             "thermometry", "invert-temperature", "fit-fano", "fit-exp",
             "presets")

_NUMERIC_ERRORS = (HeatingError, GridEdgeError, NonUniqueSteadyStateError,
                   DegenerateFitError, FitConvergenceError,
                   IntegrationInstabilityError, np.linalg.LinAlgError)


# --- config helpers ---------------------------------------------------------

def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        return parse_config_text(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None


def set_override(config: dict, dotted: str, raw: str) -> None:
    """Apply a ``--set a.b.c=value`` override; values parse as JSON literals."""
    keys = dotted.split(".")
    node = config
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into non-mapping key {key!r} of {dotted!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node[keys[-1]] = value


def resolve_path(config: dict, dotted: str):
    node = config
    keys = dotted.split(".")
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"sweep path {dotted!r}: unknown key {key!r}")
        node = node[key]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"sweep path {dotted!r}: unknown key {keys[-1]!r}")
    return node, keys[-1]


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def provenance_lines(config: dict) -> list:
    return [f"eitcool {__version__}",
            f"config_hash: {config_hash(config)}",
            f"seed: {config.get('seed', 0)}",
            f"config: {json.dumps(config, sort_keys=True, separators=(',', ':'))}"]


def _require(params: dict, key: str):
    if key not in params:
        raise ConfigError(f"missing required key params.{key}")
    return params[key]


def _one_of(params: dict, *keys):
    present = [k for k in keys if k in params]
    if len(present) != 1:
        raise ConfigError(f"exactly one of params.{'/params.'.join(keys)} is required")
    return present[0]


def _build_lambda_params(params: dict, delta_p: float, delta_c: float) -> LambdaParams:
    gamma = mhz_to_angular(params.get("gamma_mhz", 6.07))
    key_c = _one_of(params, "omega_c_mhz", "coupling_saturation")
    omega_c = mhz_to_angular(params[key_c]) if key_c == "omega_c_mhz" \
        else saturation_to_rabi(params[key_c], gamma)
    key_p = _one_of(params, "omega_p_mhz", "probe_saturation")
    omega_p = mhz_to_angular(params[key_p]) if key_p == "omega_p_mhz" \
        else saturation_to_rabi(params[key_p], gamma)
    try:
        return LambdaParams(omega_p=omega_p, omega_c=omega_c, delta_p=delta_p,
                            delta_c=delta_c, gamma=gamma,
                            branch_g=params.get("branch_g", 0.5),
                            branch_gp=params.get("branch_gp", 0.5))
    except ValueError as exc:
        raise ConfigError(f"invalid drive parameters: {exc}") from None


def _build_grid(grid_cfg: dict) -> np.ndarray:
    for key in ("center_mhz", "span_mhz", "points"):
        if key not in grid_cfg:
            raise ConfigError(f"missing required key params.grid.{key}")
    center = mhz_to_angular(grid_cfg["center_mhz"])
    span = mhz_to_angular(grid_cfg["span_mhz"])
    points = int(grid_cfg["points"])
    if points < 1 or span <= 0:
        raise ConfigError("params.grid needs points >= 1 and span_mhz > 0")
    return np.linspace(center - span, center + span, points)


def _build_trap(trap_cfg: dict) -> tuple:
    """Returns (TrapGeometry, measured (radial, axial) sampling frequencies)."""
    for key in ("wavelength_nm", "waist_um", "omega_radial_khz", "omega_axial_khz"):
        if key not in trap_cfg:
            raise ConfigError(f"missing required key params.trap.{key}")
    om_r = khz_to_angular(trap_cfg["omega_radial_khz"])
    om_z = khz_to_angular(trap_cfg["omega_axial_khz"])
    trap = TrapGeometry.from_radial_frequency(
        om_r, waist=trap_cfg["waist_um"] * 1e-6,
        wavelength=trap_cfg["wavelength_nm"] * 1e-9)
    return trap, (om_r, om_z)


def _build_mode(params: dict) -> cooling.MotionalMode:
    omega_trap = khz_to_angular(_require(params, "omega_trap_khz"))
    if "eta" in params:
        eta = float(params["eta"])
    else:
        name = params.get("geometry", "orthogonal-radial")
        if name not in ("orthogonal-radial", "orthogonal-axial"):
            raise ConfigError(f"params.geometry {name!r} not recognized")
        geometry = cooling.orthogonal_beam_geometry(name.split("-")[1])
        eta = cooling.lamb_dicke(geometry, omega_trap, CONSTANTS.mass_rb87)
    try:
        return cooling.MotionalMode(omega_trap=omega_trap,
                                    mass=CONSTANTS.mass_rb87, eta=eta)
    except ValueError as exc:
        raise ConfigError(f"invalid motional mode: {exc}") from None


def _taus_seconds(params: dict) -> np.ndarray:
    spec = _require(params, "taus_us")
    if isinstance(spec, dict):
        for key in ("min", "max", "points"):
            if key not in spec:
                raise ConfigError(f"missing required key params.taus_us.{key}")
        return np.linspace(spec["min"], spec["max"], int(spec["points"])) * 1e-6
    return np.asarray(spec, dtype=float) * 1e-6


# --- scenario implementations ----------------------------------------------

def _run_spectrum(config, outdir):
    params = config.get("params", {})
    delta_c = mhz_to_angular(_require(params, "delta_c_mhz"))
    lam = _build_lambda_params(params, delta_p=delta_c, delta_c=delta_c)
    grid = _build_grid(_require(params, "grid"))
    mode = params.get("mode", "probe_corrected")
    if params.get("components") == "d2-sigma-chains":
        spectrum = spectra.multi_lambda_spectrum(
            multi_lambda_components(lam), grid, mode)
    elif "components" in params:
        raise ConfigError("params.components supports only 'd2-sigma-chains'")
    else:
        spectrum = spectra.fano_spectrum(grid, lam, mode)
    path = outdir / config.get("output", "spectrum.csv")
    spectrum.to_csv(path, header_lines=provenance_lines(config))
    return [path]


def _run_spectrum_obe(config, outdir):
    params = config.get("params", {})
    delta_c = mhz_to_angular(_require(params, "delta_c_mhz"))
    lam = _build_lambda_params(params, delta_p=delta_c, delta_c=delta_c)
    grid = _build_grid(_require(params, "grid"))
    spectrum = bloch.excitation_spectrum_obe(grid, lam)
    path = outdir / config.get("output", "spectrum_obe.csv")
    spectrum.to_csv(path, header_lines=provenance_lines(config))
    return [path]


def _run_cooling_map(config, outdir):
    params = config.get("params", {})
    dp0 = mhz_to_angular(_require(params, "delta_p_center_mhz"))
    dc0 = mhz_to_angular(_require(params, "delta_c_center_mhz"))
    span = mhz_to_angular(_require(params, "span_mhz"))
    points = int(_require(params, "points"))
    lam = _build_lambda_params(params, delta_p=dp0, delta_c=dc0)
    mode = _build_mode(params)
    result = cooling.cooling_map(
        np.linspace(dp0 - span, dp0 + span, points),
        np.linspace(dc0 - span, dc0 + span, points),
        lam, mode, alpha_tilde=params.get("alpha_tilde", cooling.ALPHA_DIPOLE),
        probe_response=params.get("probe_response", "exact"))
    path = outdir / config.get("output", "cooling_map.csv")
    result.to_csv(path, header_lines=provenance_lines(config))
    return [path]


def _run_cooling_dynamics(config, outdir):
    params = config.get("params", {})
    delta_p = mhz_to_angular(_require(params, "delta_p_mhz"))
    delta_c = mhz_to_angular(_require(params, "delta_c_mhz"))
    lam = _build_lambda_params(params, delta_p=delta_p, delta_c=delta_c)
    mode = _build_mode(params)
    rates = cooling.sideband_rates(
        lam, mode, alpha_tilde=params.get("alpha_tilde", cooling.ALPHA_DIPOLE),
        probe_response=params.get("probe_response", "exact"))
    times_cfg = _require(params, "times")
    times = np.linspace(0.0, times_cfg["max_ms"] * 1e-3, int(times_cfg["points"]))
    n0 = float(_require(params, "n_initial"))
    n_t = cooling.phonon_dynamics(rates, n0, times)
    rate = cooling.cooling_rate(rates)
    header = provenance_lines(config) + [
        f"a_plus_per_s: {rates.a_plus:.8g}",
        f"a_minus_per_s: {rates.a_minus:.8g}",
        f"cooling_rate_per_s: {rate:.8g}",
    ]
    if rate > 0:
        n_ss = cooling.steady_state_phonon(rates)
        header.append(f"n_ss: {n_ss:.8g}")
        header.append(f"t_ss_uk: {cooling.phonon_to_temperature(n_ss, mode.omega_trap) * 1e6:.6g}")
    else:
        header.append("n_ss: HEATING")
    path = outdir / config.get("output", "cooling_dynamics.csv")
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("t_ms,n_bar,temperature_uk\n")
        for t, n in zip(times, np.atleast_1d(n_t)):
            temp = cooling.phonon_to_temperature(max(n, 0.0), mode.omega_trap)
            fh.write(f"{t * 1e3:.6f},{n:.8g},{temp * 1e6:.6g}\n")
    return [path]


def _run_thermometry(config, outdir):
    params = config.get("params", {})
    trap, freqs = _build_trap(_require(params, "trap"))
    taus = _taus_seconds(params)
    gravity = thermometry.DEFAULT_GRAVITY if params.get("gravity", True) \
        else (0.0, 0.0, 0.0)
    curve = thermometry.recapture_curve(
        temperature=_require(params, "temperature_uk") * 1e-6,
        taus=taus, n_trials=int(_require(params, "n_trials")),
        trap=trap, seed=int(config.get("seed", 0)),
        frequencies=freqs, gravity=gravity)
    path = outdir / config.get("output", "recapture.csv")
    curve.to_csv(path, header_lines=provenance_lines(config))
    return [path]


def _run_invert_temperature(config, outdir):
    params = config.get("params", {})
    trap, freqs = _build_trap(_require(params, "trap"))
    measured = thermometry.RecaptureCurve.from_csv(_require(params, "input_csv"))
    grid_cfg = _require(params, "t_grid_uk")
    t_grid = np.linspace(grid_cfg["min"], grid_cfg["max"],
                         int(grid_cfg["points"])) * 1e-6
    gravity = thermometry.DEFAULT_GRAVITY if params.get("gravity", True) \
        else (0.0, 0.0, 0.0)
    estimate = thermometry.infer_temperature(
        measured, trap, t_grid, n_trials=int(_require(params, "n_trials")),
        seed=int(config.get("seed", 0)), frequencies=freqs, gravity=gravity)
    path = outdir / config.get("output", "temperature.json")
    payload = {
        "temperature_uk": estimate.temperature * 1e6,
        "sigma_uk": estimate.sigma * 1e6,
        "chi2": estimate.chi2,
        "dof": estimate.dof,
        "provenance": {"tool": f"eitcool {__version__}",
                       "config_hash": config_hash(config),
                       "seed": config.get("seed", 0),
                       "config": config},
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return [path]


def _run_fit_fano(config, outdir):
    params = config.get("params", {})
    data = Spectrum.from_csv(_require(params, "input_csv"))
    result = fit.fit_fano(data)
    path = outdir / config.get("output", "fano_fit.json")
    payload = json.loads(result.to_json())
    payload["provenance"] = {"tool": f"eitcool {__version__}",
                             "config_hash": config_hash(config),
                             "seed": config.get("seed", 0),
                             "config": config}
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return [path]


def _run_fit_exp(config, outdir):
    params = config.get("params", {})
    rows = np.loadtxt(_require(params, "input_csv"), delimiter=",",
                      comments="#", skiprows=params.get("skiprows", 1), ndmin=2)
    result = fit.fit_exponential(rows[:, 0] * 1e-3, rows[:, 1] * 1e-6)
    path = outdir / config.get("output", "exp_fit.json")
    payload = json.loads(result.to_json())
    payload["provenance"] = {"tool": f"eitcool {__version__}",
                             "config_hash": config_hash(config),
                             "seed": config.get("seed", 0),
                             "config": config}
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return [path]


def _run_presets(config, outdir):
    for name, description in available_presets().items():
        print(f"{name:18s} {description}")
    return []


_SCENARIO_RUNNERS = {
    "spectrum": _run_spectrum,
    "spectrum-obe": _run_spectrum_obe,
    "cooling-map": _run_cooling_map,
    "cooling-dynamics": _run_cooling_dynamics,
    "thermometry": _run_thermometry,
    "invert-temperature": _run_invert_temperature,
    "fit-fano": _run_fit_fano,
    "fit-exp": _run_fit_exp,
    "presets": _run_presets,
}


def run(config: dict, outdir) -> list:
    """Execute one scenario config; returns the artifact paths."""
    scenario = config.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, got {scenario!r}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return _SCENARIO_RUNNERS[scenario](config, outdir)


# --- sweeps ------------------------------------------------------------------

def _sweep_task(args):
    config, outdir = args
    return [str(p) for p in run(config, outdir)]


def sweep(config: dict, path: str, values, outdir, workers: int = 1) -> list:
    """One artifact per value plus an index file; output independent of workers."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = []
    for i, value in enumerate(values):
        sub = json.loads(json.dumps(config))
        node, leaf = resolve_path(sub, path)
        if not isinstance(node.get(leaf), (int, float)):
            raise ConfigError(f"sweep path {path!r} must point at a numeric key")
        node[leaf] = value
        sub["seed"] = derive_key(int(config.get("seed", 0)), i) % (1 << 63)
        stem = Path(sub.get("output", "artifact.csv"))
        sub["output"] = f"{stem.stem}_{i:03d}{stem.suffix}"
        tasks.append((sub, outdir))

    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            produced = list(pool.map(_sweep_task, tasks))
    else:
        produced = [_sweep_task(t) for t in tasks]

    index_path = outdir / "sweep_index.csv"
    with open(index_path, "w") as fh:
        for line in provenance_lines(config):
            fh.write(f"# {line}\n")
        fh.write(f"# sweep_path: {path}\n")
        fh.write("index,value,file\n")
        for i, (value, files) in enumerate(zip(values, produced)):
            names = ";".join(Path(f).name for f in files)
            fh.write(f"{i},{value},{names}\n")
    paths = [Path(f) for files in produced for f in files]
    return paths + [index_path]


# --- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitcool",
        description="Dark-resonance spectra, sideband cooling and "
                    "release-recapture thermometry pipelines")
    parser.add_argument("--config", help="scenario config JSON ('#' lines are comments)")
    parser.add_argument("--preset", help="bundled preset name (see scenario 'presets')")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        dest="overrides", help="override a config key (dotted path)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel workers for sweeps")
    parser.add_argument("--sweep", default=None, metavar="PATH=V1,V2,...",
                        help="run once per value of a numeric config key")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if (args.config is None) == (args.preset is None):
            raise ConfigError("exactly one of --config or --preset is required")
        config = load_preset(args.preset) if args.preset else load_config(args.config)
        for item in args.overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            set_override(config, *item.split("=", 1))
        if args.seed is not None:
            config["seed"] = args.seed
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")

        sweep_spec = args.sweep
        if sweep_spec is None and "sweep" in config:
            block = config.pop("sweep")
            sweep_spec = f"{block['path']}=" + ",".join(str(v) for v in block["values"])

        if sweep_spec is not None:
            if "=" not in sweep_spec:
                raise ConfigError("--sweep expects PATH=V1,V2,...")
            path, raw = sweep_spec.split("=", 1)
            values = [float(v) for v in raw.split(",") if v]
            if not values:
                raise ConfigError("--sweep needs at least one value")
            paths = sweep(config, path, values, args.out, workers=args.workers)
        else:
            paths = run(config, args.out)
        for p in paths:
            print(p)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure [{config.get('scenario', '?')}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
