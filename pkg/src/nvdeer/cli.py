"""Command-line front end: JSON config in, CSV/JSON results out.

Every subcommand is deterministic given (config, seed); output files
embed the fully resolved configuration so each result reproduces its
own inputs.  Exit codes: 0 success, 2 configuration error, 3 infeasible
computation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib.metadata import PackageNotFoundError, version as _pkg_version

import numpy as np

from .deer_single import (DEFAULT_NODES, DrivePulse, EchoConfig, QuadratureSpec,
                          deer_signal_quadrature)
from .deer_ensemble import ensemble_signal
from .fitting import ObservedPeaks, chi2_surface
from .hamiltonian import FieldConfig, SpinSystem, get_preset, transition_spectrum
from .sensing import (SampleGeometry, SensingModel, accumulate_nc2,
                      detectability_radius, kappa_constant, threshold_depth)

try:
    TOOL_VERSION = _pkg_version("nvdeer")
except PackageNotFoundError:  # running from a source tree
    TOOL_VERSION = "0.1.0"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


class ConfigError(Exception):
    """Invalid configuration; message carries the offending field."""


class InfeasibleError(Exception):
    """Computation has no feasible result for this configuration."""


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON "
                          f"(line {exc.lineno}, column {exc.colno}: {exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a JSON object")
    return cfg


def _require(cfg: dict, field: str, kind, where: str = "config"):
    if field not in cfg:
        raise ConfigError(f"{where}.{field}: required field is missing")
    return _check_type(cfg[field], field, kind, where)


def _check_type(value, field: str, kind, where: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}.{field}: expected a number, got {value!r}")
        return float(value)
    if kind is dict and not isinstance(value, dict):
        raise ConfigError(f"{where}.{field}: expected an object, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise ConfigError(f"{where}.{field}: expected a list, got {value!r}")
    if kind is str and not isinstance(value, str):
        raise ConfigError(f"{where}.{field}: expected a string, got {value!r}")
    return value


def _parse_grid(node, field: str, where: str = "config") -> np.ndarray:
    """Grid given either as an explicit list or as {start, stop, num|step}."""
    if isinstance(node, list):
        if not node:
            raise ConfigError(f"{where}.{field}: grid list must not be empty")
        try:
            arr = np.asarray([float(x) for x in node])
        except (TypeError, ValueError):
            raise ConfigError(f"{where}.{field}: grid entries must be numbers") from None
    elif isinstance(node, dict):
        start = _require(node, "start", float, f"{where}.{field}")
        stop = _require(node, "stop", float, f"{where}.{field}")
        if "num" in node:
            num = node["num"]
            if not isinstance(num, int) or num < 1:
                raise ConfigError(f"{where}.{field}.num: expected a positive integer")
            arr = np.linspace(start, stop, num)
        elif "step" in node:
            step = _check_type(node["step"], "step", float, f"{where}.{field}")
            if step <= 0:
                raise ConfigError(f"{where}.{field}.step: must be positive")
            arr = np.arange(start, stop + step / 2.0, step)
        else:
            raise ConfigError(f"{where}.{field}: grid object needs 'num' or 'step'")
    else:
        raise ConfigError(f"{where}.{field}: expected a list or a grid object")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{where}.{field}: grid values must be finite")
    if arr.size > 1 and np.any(np.diff(arr) < 0):
        raise ConfigError(f"{where}.{field}: grid must be ascending")
    return arr


def _parse_quadrature(cfg: dict) -> QuadratureSpec:
    node = cfg.get("quadrature")
    if node is None:
        return QuadratureSpec()
    _check_type(node, "quadrature", dict, "config")
    kwargs = {}
    for key in ("n_phi_rand", "n_cos_theta1", "n_phi1"):
        if key in node:
            if not isinstance(node[key], int):
                raise ConfigError(f"config.quadrature.{key}: expected an integer")
            kwargs[key] = node[key]
    try:
        return QuadratureSpec(**{k: kwargs.get(k, DEFAULT_NODES) for k in
                                 ("n_phi_rand", "n_cos_theta1", "n_phi1")})
    except ValueError as exc:
        raise ConfigError(f"config.quadrature: {exc}") from exc


def _parse_system(cfg: dict) -> SpinSystem:
    node = cfg.get("system")
    if node is None:
        raise ConfigError("config.system: required field is missing")
    if isinstance(node, str):
        try:
            return get_preset(node)
        except KeyError as exc:
            raise ConfigError(f"config.system: {exc.args[0]}") from exc
    _check_type(node, "system", dict, "config")
    try:
        return SpinSystem(
            s=_require(node, "S", float, "config.system"),
            i=_require(node, "I", float, "config.system"),
            g_tensor=tuple(_require(node, "g_tensor", list, "config.system")),
            a_tensor=tuple(_require(node, "A_tensor_mhz", list, "config.system")),
            g_n=_check_type(node.get("g_n", 0.0), "g_n", float, "config.system"),
            p_z=_check_type(node.get("P_z_mhz", 0.0), "P_z_mhz", float, "config.system"),
            name=str(node.get("name", "custom")),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.system: {exc}") from exc


def _parse_field(cfg: dict) -> FieldConfig:
    node = _require(cfg, "field", dict)
    try:
        if "B_cartesian_gauss" in node:
            vec = _check_type(node["B_cartesian_gauss"], "B_cartesian_gauss", list,
                              "config.field")
            if len(vec) != 3:
                raise ConfigError("config.field.B_cartesian_gauss: need 3 components")
            return FieldConfig.from_cartesian(*[float(x) for x in vec])
        b = _require(node, "B_gauss", float, "config.field")
        theta = math.radians(_require(node, "theta_deg", float, "config.field"))
        phi = math.radians(_check_type(node.get("phi_deg", 0.0), "phi_deg", float,
                                       "config.field"))
        return FieldConfig.from_angles(b, theta, phi)
    except ValueError as exc:
        raise ConfigError(f"config.field: {exc}") from exc


def _resolved_header(config: dict, seed: int) -> list[str]:
    resolved = dict(config)
    resolved["seed"] = seed
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return [f"# tool: nvdeer {TOOL_VERSION}", f"# config: {blob}"]


def _write_csv(path: str, header_lines: list[str], columns: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(x) for x in row) + "\n")


def _format_cell(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _envelope(config: dict, seed: int, results: dict, flags: dict | None = None) -> dict:
    return {
        "tool": {"name": "nvdeer", "version": TOOL_VERSION},
        "config": {**config, "seed": seed},
        "results": results,
        "flags": flags or {},
    }


# ---------------------------------------------------------------- deer commands

def _deer_points(cfg: dict, mode: str, sweep: str):
    """Common core of the deer-spectrum / deer-rabi commands."""
    if mode == "single":
        coupling = _require(cfg, "coupling", float)
    else:
        coupling = _require(cfg, "n_c2", float)
        if coupling < 0:
            raise ConfigError("config.n_c2: must be >= 0")
    rabi = _require(cfg, "rabi_mhz", float)
    tau = _check_type(cfg.get("tau_us", 6.0), "tau_us", float, "config")
    quad = _parse_quadrature(cfg)
    try:
        echo = EchoConfig(tau=tau, e_B=np.array([0.0, 0.0, 1.0]))
    except ValueError as exc:
        raise ConfigError(f"config.tau_us: {exc}") from exc

    if sweep == "detuning":
        has_det = "detuning_mhz" in cfg
        has_freq = "frequency_mhz" in cfg
        if has_det == has_freq:
            raise ConfigError("config: give exactly one of 'detuning_mhz' or "
                              "'frequency_mhz' (the latter with 'resonance_mhz')")
        if has_det:
            detunings = _parse_grid(cfg["detuning_mhz"], "detuning_mhz")
            axis = detunings
        else:
            freqs = _parse_grid(cfg["frequency_mhz"], "frequency_mhz")
            resonance = _require(cfg, "resonance_mhz", float)
            detunings = freqs - resonance
            axis = freqs
        length = _require(cfg, "pulse_us", float)
        if length < 0:
            raise ConfigError("config.pulse_us: must be >= 0")
        points = []
        for x, delta in zip(axis, detunings):
            pulse = DrivePulse(rabi_freq=rabi, detuning=float(delta), length=length)
            sig = (deer_signal_quadrature(coupling, echo, pulse, quad)
                   if mode == "single" else ensemble_signal(coupling, pulse))
            points.append((float(x), sig))
        return points

    lengths = _parse_grid(_require(cfg, "t_p_us", object), "t_p_us")
    if np.any(lengths < 0):
        raise ConfigError("config.t_p_us: pulse lengths must be >= 0")
    detuning = _check_type(cfg.get("detuning_mhz", 0.0), "detuning_mhz", float, "config")
    points = []
    for t_p in lengths:
        pulse = DrivePulse(rabi_freq=rabi, detuning=detuning, length=float(t_p))
        sig = (deer_signal_quadrature(coupling, echo, pulse, quad)
               if mode == "single" else ensemble_signal(coupling, pulse))
        points.append((float(t_p), sig))
    return points


def cmd_deer_spectrum(cfg: dict, out: str, seed: int, mode: str) -> int:
    points = _deer_points(cfg, mode, "detuning")
    rows = [(x, s.value, s.est_error, s.converged) for x, s in points]
    _write_csv(out, _resolved_header({**cfg, "mode": mode}, seed),
               ["delta_or_freq_mhz", "signal", "est_error", "converged"], rows)
    return EXIT_OK


def cmd_deer_rabi(cfg: dict, out: str, seed: int, mode: str) -> int:
    points = _deer_points(cfg, mode, "length")
    rows = [(x, s.value, s.est_error, s.converged) for x, s in points]
    _write_csv(out, _resolved_header({**cfg, "mode": mode}, seed),
               ["t_p_us", "signal", "est_error", "converged"], rows)
    return EXIT_OK


# ----------------------------------------------------------------- epr command

def _gaussian_broadened(freqs, ints, grid, fwhm):
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    out = np.zeros_like(grid)
    for f, s in zip(freqs, ints):
        out += s * np.exp(-0.5 * ((grid - f) / sigma) ** 2)
    if out.max() > 0:
        out /= out.max()
    return out


def cmd_epr(cfg: dict, out: str, seed: int) -> int:
    system = _parse_system(cfg)
    fieldcfg = _parse_field(cfg)
    floor = _check_type(cfg.get("intensity_floor", 1e-3), "intensity_floor", float, "config")
    merge = _check_type(cfg.get("merge_tol_mhz", 0.1), "merge_tol_mhz", float, "config")
    spectrum = transition_spectrum(system, fieldcfg, intensity_floor=floor, merge_tol=merge)
    header = _resolved_header(cfg, seed)
    if "broaden_fwhm_mhz" in cfg:
        fwhm = _check_type(cfg["broaden_fwhm_mhz"], "broaden_fwhm_mhz", float, "config")
        if fwhm <= 0:
            raise ConfigError("config.broaden_fwhm_mhz: must be positive")
        grid = _parse_grid(_require(cfg, "grid_mhz", object), "grid_mhz")
        broadened = _gaussian_broadened(spectrum.frequencies, spectrum.intensities,
                                        grid, fwhm)
        rows = list(zip(grid, broadened))
    else:
        rows = list(zip(spectrum.frequencies, spectrum.intensities))
    _write_csv(out, header, ["frequency_mhz", "intensity"], rows)
    return EXIT_OK


# ----------------------------------------------------------------- fit command

def cmd_fit(cfg: dict, out: str, seed: int) -> int:
    system = _parse_system(cfg)
    peak_list = _require(cfg, "peaks", list)
    if not peak_list:
        raise ConfigError("config.peaks: need at least one observed peak")
    freqs, sigmas = [], []
    for k, node in enumerate(peak_list):
        _check_type(node, f"peaks[{k}]", dict, "config")
        freqs.append(_require(node, "frequency_mhz", float, f"config.peaks[{k}]"))
        sigmas.append(_require(node, "uncertainty_mhz", float, f"config.peaks[{k}]"))
    try:
        peaks = ObservedPeaks(frequencies=np.array(freqs), uncertainties=np.array(sigmas))
    except ValueError as exc:
        raise ConfigError(f"config.peaks: {exc}") from exc
    b_grid = _parse_grid(_require(cfg, "b_gauss", object), "b_gauss")
    theta_grid = np.radians(_parse_grid(_require(cfg, "theta_deg", object), "theta_deg"))
    floor = _check_type(cfg.get("intensity_floor", 1e-3), "intensity_floor", float, "config")
    try:
        grid = chi2_surface(system, peaks, b_grid, theta_grid, intensity_floor=floor)
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from exc
    if not np.any(np.isfinite(grid.chi2)):
        raise InfeasibleError("no feasible fit: every grid cell has fewer usable "
                              "simulated lines than observed peaks")
    header = _resolved_header(cfg, seed)
    rows = [(b, t, grid.chi2[i, j])
            for i, b in enumerate(grid.b_values)
            for j, t in enumerate(grid.theta_values)]
    _write_csv(out, header, ["b_gauss", "theta_rad", "chi2"], rows)
    minima_payload = [{
        "b_gauss": m.b_gauss,
        "theta_deg": math.degrees(m.theta_rad),
        "chi2": m.chi2,
        "b_interval_gauss": {"lower": m.b_interval.lower, "upper": m.b_interval.upper,
                             "open": m.b_interval.is_open},
        "theta_interval_deg": {"lower": math.degrees(m.theta_interval.lower),
                               "upper": math.degrees(m.theta_interval.upper),
                               "open": m.theta_interval.is_open},
    } for m in grid.minima]
    _write_json(out + ".minima.json",
                _envelope(cfg, seed, {"minima": minima_payload}))
    return EXIT_OK


# -------------------------------------------------------------- volume command

def cmd_volume(cfg: dict, out: str, seed: int) -> int:
    tau = _require(cfg, "tau_us", float)
    depth = _require(cfg, "nv_depth_nm", float)
    rho = _require(cfg, "spin_density_per_nm3", float)
    thickness = cfg.get("film_thickness_nm")
    thickness = math.inf if thickness is None else _check_type(
        thickness, "film_thickness_nm", float, "config")
    threshold = _check_type(cfg.get("threshold", 1.0), "threshold", float, "config")
    fraction = _check_type(cfg.get("signal_fraction", 0.7), "signal_fraction",
                           float, "config")
    try:
        kappa = kappa_constant(tau)
        geom = SampleGeometry(nv_depth=depth, spin_density=rho,
                              film_thickness=thickness)
        model = SensingModel(kappa=kappa, threshold=threshold)
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from exc
    total = accumulate_nc2(geom, model)
    results = {
        "kappa_nm3": kappa,
        "kappa_side_nm": kappa ** (1.0 / 3.0),
        "n_c2": total,
        "detectable": total >= threshold,
    }
    flags = {}
    if rho > 0.0:
        results["threshold_depth_nm"] = threshold_depth(geom, model)
        radius = detectability_radius(geom, model, fraction)
        results["sensing_radius_nm"] = radius.radius
        results["signal_fraction"] = fraction
        flags["radius_open_ended"] = radius.open_ended
        if not radius.detectable:
            flags["nothing_detectable"] = True
    else:
        flags["nothing_detectable"] = True
    _write_json(out, _envelope(cfg, seed, results, flags))
    return EXIT_OK


# -------------------------------------------------------------------- plumbing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvdeer",
        description="Simulate sensor-detected DEER signals, spin-Hamiltonian EPR "
                    "spectra, field fits, and sensing volumes.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, deer_mode=False):
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for any stochastic evaluation (default 0)")
        p.add_argument("--threads", type=int, default=1,
                       help="evaluation thread hint (grid math is vectorized; "
                            "accepted for interface compatibility)")
        if deer_mode:
            p.add_argument("--mode", choices=("single", "ensemble"), default="single",
                           help="single-spin quadrature or ensemble closed form")

    add_common(sub.add_parser("deer-spectrum",
                              help="DEER signal vs drive detuning/frequency"),
               deer_mode=True)
    add_common(sub.add_parser("deer-rabi", help="DEER signal vs drive pulse length"),
               deer_mode=True)
    add_common(sub.add_parser("epr", help="transition stick spectrum of a spin system"))
    add_common(sub.add_parser("fit", help="chi-square (B, theta) grid fit to "
                                          "observed resonances"))
    add_common(sub.add_parser("volume", help="sensing-volume report"))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        if args.command == "deer-spectrum":
            return cmd_deer_spectrum(cfg, args.out, args.seed, args.mode)
        if args.command == "deer-rabi":
            return cmd_deer_rabi(cfg, args.out, args.seed, args.mode)
        if args.command == "epr":
            return cmd_epr(cfg, args.out, args.seed)
        if args.command == "fit":
            return cmd_fit(cfg, args.out, args.seed)
        if args.command == "volume":
            return cmd_volume(cfg, args.out, args.seed)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
