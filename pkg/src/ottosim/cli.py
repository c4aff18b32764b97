"""Command-line front end.

Each run takes a JSON manifest, executes one experiment, and writes CSV files
plus a summary.json into the output directory.  Manifests are fail-closed:
unknown or missing keys abort before any computation.  Floats are written with
'%.17g' so CSV values round-trip float64 exactly.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .fock import FockBasis, InvariantViolation, Temperature
from .protocols import (
    BathSegment,
    BathSequenceConfig,
    EngineConfig,
    benchmark_slope,
    run_adiabaticity_sweep,
    run_benchmark,
    run_engine_detailed,
    run_equilibration_detailed,
    steady_state_metrics,
    thermal_distance_scan,
)

FLOAT_FMT = "%.17g"

_MISSING = object()


class ConfigError(Exception):
    """Bad manifest or command-line input."""


# --------------------------------------------------------------------------
# manifest schema helpers

def _check_keys(obj, where: str, required=(), optional=()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - set(required) - set(optional))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ConfigError(f"{where}: missing required key(s) {missing}")


def _number(params, key, where, default=_MISSING, minimum=None, above=None):
    if key not in params:
        if default is _MISSING:
            raise ConfigError(f"{where}: missing required key '{key}'")
        return default
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: '{key}' must be a number, got {value!r}")
    value = float(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: '{key}' must be >= {minimum}, got {value}")
    if above is not None and not value > above:
        raise ConfigError(f"{where}: '{key}' must be > {above}, got {value}")
    return value


def _integer(params, key, where, default=_MISSING, minimum=1):
    if key not in params:
        if default is _MISSING:
            raise ConfigError(f"{where}: missing required key '{key}'")
        return default
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: '{key}' must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{where}: '{key}' must be >= {minimum}, got {value}")
    return value


def _number_list(params, key, where, above=None):
    value = params.get(key)
    if (not isinstance(value, list) or not value
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
        raise ConfigError(f"{where}: '{key}' must be a non-empty list of numbers")
    out = [float(v) for v in value]
    if above is not None and any(not v > above for v in out):
        raise ConfigError(f"{where}: every entry of '{key}' must be > {above}")
    return out


def _temperature(params, key, where, default=_MISSING) -> Temperature:
    value = _number(params, key, where, default=default, above=0.0)
    return Temperature(float(value))


# --------------------------------------------------------------------------
# experiment runners: params -> (csv files, summary results, effective params)

def _run_adiabaticity(params, n_workers):
    where = "parameters"
    _check_keys(params, where,
                required=("omega_grid", "tau_grid", "omega_T_values"),
                optional=("n_levels", "divisor"))
    omega_grid = _number_list(params, "omega_grid", where)
    if any(om < 1.0 for om in omega_grid):
        raise ConfigError(f"{where}: omega_grid entries must be >= 1")
    tau_grid = _number_list(params, "tau_grid", where, above=0.0)
    omega_T_values = _number_list(params, "omega_T_values", where, above=0.0)
    n_levels = _integer(params, "n_levels", where, default=41, minimum=2)
    divisor = _integer(params, "divisor", where, default=5)

    cells = run_adiabaticity_sweep(omega_grid, tau_grid, omega_T_values,
                                   FockBasis(n_levels), divisor, n_workers)
    rows = [(c.omega, c.tau_alpha, c.omega_T, c.direction, c.ratio) for c in cells]
    ratios = [c.ratio for c in cells]
    files = {"ratios.csv": (("omega", "tau_alpha", "omega_T", "direction", "ratio"), rows)}
    results = {
        "n_cells": len(cells),
        "min_ratio": min(ratios),
        "max_ratio": max(ratios),
    }
    effective = {"omega_grid": omega_grid, "tau_grid": tau_grid,
                 "omega_T_values": omega_T_values, "n_levels": n_levels, "divisor": divisor}
    return files, results, effective


def _run_equilibrate(params, n_workers):
    where = "parameters"
    _check_keys(params, where,
                required=("alpha", "omega_T_gas", "omega_T_bath", "segments"),
                optional=("n_levels", "sigma", "x0", "thermal_scan"))
    segments_raw = params["segments"]
    if not isinstance(segments_raw, list) or not segments_raw:
        raise ConfigError(f"{where}: 'segments' must be a non-empty list")
    segments = []
    for i, seg in enumerate(segments_raw):
        seg_where = f"{where}.segments[{i}]"
        _check_keys(seg, seg_where, required=("phi0", "n_baths"),
                    optional=("n_steps", "dtau"))
        segments.append(BathSegment(_number(seg, "phi0", seg_where),
                                    _integer(seg, "n_baths", seg_where),
                                    _integer(seg, "n_steps", seg_where, default=10),
                                    _number(seg, "dtau", seg_where, default=5.0, above=0.0)))
    scan = params.get("thermal_scan", {"omega_T_min": 0.5, "omega_T_max": 6.0, "omega_T_step": 0.05})
    _check_keys(scan, f"{where}.thermal_scan",
                required=("omega_T_min", "omega_T_max", "omega_T_step"))
    scan_min = _number(scan, "omega_T_min", "thermal_scan", above=0.0)
    scan_max = _number(scan, "omega_T_max", "thermal_scan", above=scan_min)
    scan_step = _number(scan, "omega_T_step", "thermal_scan", above=0.0)

    config = BathSequenceConfig(
        alpha=_number(params, "alpha", where, above=-1.0),
        omega_T_gas=_temperature(params, "omega_T_gas", where),
        omega_T_bath=_temperature(params, "omega_T_bath", where),
        segments=tuple(segments),
        n_levels=_integer(params, "n_levels", where, default=41, minimum=2),
        sigma=_number(params, "sigma", where, default=1.0, above=0.0),
        x0=_number(params, "x0", where, default=1.0),
    )
    result = run_equilibration_detailed(config)

    n_points = int(round((scan_max - scan_min) / scan_step)) + 1
    grid = np.linspace(scan_min, scan_min + (n_points - 1) * scan_step, n_points)
    scan_rows = thermal_distance_scan(result.final_state, config.alpha, grid,
                                      FockBasis(config.n_levels))
    closest = min(scan_rows, key=lambda pair: pair[1])

    files = {
        "contacts.csv": (("tau", "trace_distance", "bath_index", "step", "phi0"),
                         [(r.tau, r.trace_distance, r.bath_index, r.step, r.phi0)
                          for r in result.records]),
        "thermal_scan.csv": (("omega_T", "trace_distance"), scan_rows),
    }
    results = {
        "final_distance": result.records[-1].trace_distance,
        "closest_omega_T": closest[0],
        "closest_distance": closest[1],
        "n_baths": sum(s.n_baths for s in segments),
    }
    effective = {
        "alpha": config.alpha, "omega_T_gas": config.omega_T_gas.omega_T,
        "omega_T_bath": config.omega_T_bath.omega_T,
        "segments": [{"phi0": s.phi0, "n_baths": s.n_baths,
                      "n_steps": s.n_steps, "dtau": s.dtau} for s in segments],
        "n_levels": config.n_levels, "sigma": config.sigma, "x0": config.x0,
        "thermal_scan": {"omega_T_min": scan_min, "omega_T_max": scan_max,
                         "omega_T_step": scan_step},
    }
    return files, results, effective


def _run_engine(params, n_workers):
    where = "parameters"
    _check_keys(params, where,
                required=("omega", "tau_stroke", "tau_contact", "omega_T_hot", "omega_T_cold"),
                optional=("n_levels", "phi0", "sigma", "x0", "n_cycles"))
    config = EngineConfig(
        omega=_number(params, "omega", where),
        tau_stroke=_number(params, "tau_stroke", where, above=0.0),
        tau_contact=_number(params, "tau_contact", where, above=0.0),
        omega_T_hot=_temperature(params, "omega_T_hot", where),
        omega_T_cold=_temperature(params, "omega_T_cold", where),
        n_levels=_integer(params, "n_levels", where, default=41, minimum=2),
        phi0=_number(params, "phi0", where, default=1.0),
        sigma=_number(params, "sigma", where, default=1.0, above=0.0),
        x0=_number(params, "x0", where, default=1.0),
        n_cycles=_integer(params, "n_cycles", where, default=50),
    )
    diag = run_engine_detailed(config)
    steady = steady_state_metrics(diag.records)

    header = ("cycle", "e_expanded_cold", "e_compressed_cold", "e_compressed_hot",
              "e_expanded_hot", "work", "heat_in", "efficiency", "power", "state_change")
    rows = [(r.cycle, r.e_expanded_cold, r.e_compressed_cold, r.e_compressed_hot,
             r.e_expanded_hot, r.work, r.heat_in, r.efficiency, r.power, change)
            for r, change in zip(diag.records, diag.state_changes)]
    files = {"cycles.csv": (header, rows)}
    results = {
        "steady_state": steady,
        "efficiency_ideal": 1.0 - 1.0 / config.omega,
        "final_state_change": diag.state_changes[-1],
        "stroke_unitarity_defect": diag.stroke_defect,
        "contact_unitarity_defects": list(diag.contact_defects),
        "max_trace_error": diag.max_trace_error,
    }
    effective = {
        "omega": config.omega, "tau_stroke": config.tau_stroke,
        "tau_contact": config.tau_contact,
        "omega_T_hot": config.omega_T_hot.omega_T,
        "omega_T_cold": config.omega_T_cold.omega_T,
        "n_levels": config.n_levels, "phi0": config.phi0, "sigma": config.sigma,
        "x0": config.x0, "n_cycles": config.n_cycles,
    }
    return files, results, effective


def _run_benchmark(params, n_workers):
    where = "parameters"
    _check_keys(params, where,
                optional=("n_levels", "omega_T", "alpha_targets", "tau_final", "divisors"))
    n_levels = _integer(params, "n_levels", where, default=101, minimum=2)
    omega_T = _temperature(params, "omega_T", where, default=5.0)
    alpha_targets = (_number_list(params, "alpha_targets", where, above=0.0)
                     if "alpha_targets" in params else [3.0, 8.0])
    tau_final = _number(params, "tau_final", where, default=5.0, above=0.0)
    divisors = params.get("divisors", [3, 4, 5, 6, 7, 8, 10, 12, 14, 16, 32])
    if (not isinstance(divisors, list) or len(divisors) < 2
            or any(isinstance(d, bool) or not isinstance(d, int) or d < 1 for d in divisors)):
        raise ConfigError(f"{where}: 'divisors' must be a list of >= 2 positive integers")

    rows = run_benchmark(n_levels, omega_T, alpha_targets, tau_final, divisors, n_workers)
    files = {"errors.csv": (("mode", "alpha", "divisor", "error"),
                            [(r.mode, r.alpha, r.divisor, r.error) for r in rows])}
    slopes = {}
    for mode in ("fixed", "ramped"):
        for alpha in alpha_targets:
            key = f"{mode}_alpha_{FLOAT_FMT % alpha}"
            slopes[key] = benchmark_slope(rows, mode, alpha,
                                          n_levels=n_levels, tau_final=tau_final)
    results = {"slopes": slopes}
    effective = {"n_levels": n_levels, "omega_T": omega_T.omega_T,
                 "alpha_targets": alpha_targets, "tau_final": tau_final,
                 "divisors": sorted(set(divisors))}
    return files, results, effective


_RUNNERS = {
    "adiabaticity": _run_adiabaticity,
    "equilibrate": _run_equilibrate,
    "engine": _run_engine,
    "benchmark": _run_benchmark,
}


# --------------------------------------------------------------------------
# output

def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans do not belong in CSV output")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return FLOAT_FMT % float(value)


def _write_outputs(out_dir: Path, experiment: str, files, results, effective):
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, (header, rows) in files.items():
            path = out_dir / name
            with open(path, "w") as fh:
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(_format_cell(v) for v in row) + "\n")
            written.append(path)
        summary = {"experiment": experiment, "parameters": effective, "results": results}
        path = out_dir / "summary.json"
        with open(path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def _load_manifest(path: str):
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read manifest {path}: {err}") from err
    try:
        manifest = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"manifest {path} is not valid JSON: {err}") from err
    _check_keys(manifest, "manifest", required=("experiment", "parameters"),
                optional=("output_dir",))
    experiment = manifest["experiment"]
    if experiment not in _RUNNERS:
        raise ConfigError(f"manifest: unknown experiment {experiment!r}; "
                          f"expected one of {sorted(_RUNNERS)}")
    out = manifest.get("output_dir")
    if out is not None and not isinstance(out, str):
        raise ConfigError("manifest: 'output_dir' must be a string")
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ottosim",
        description="Quantum Otto engine experiments on a truncated Fock basis.")
    parser.add_argument("experiment", choices=sorted(_RUNNERS),
                        help="which experiment to run (must match the manifest)")
    parser.add_argument("--config", required=True, metavar="PATH",
                        help="JSON manifest with 'experiment' and 'parameters'")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (overrides the manifest's output_dir)")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker processes for grid-style experiments (default 1)")
    args = parser.parse_args(argv)

    try:
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        manifest = _load_manifest(args.config)
        if manifest["experiment"] != args.experiment:
            raise ConfigError(f"manifest is for experiment {manifest['experiment']!r} "
                              f"but {args.experiment!r} was requested")
        out_dir = args.out or manifest.get("output_dir")
        if not out_dir:
            raise ConfigError("no output directory: pass --out or set output_dir in the manifest")

        try:
            files, results, effective = _RUNNERS[args.experiment](
                manifest["parameters"], args.threads)
        except ValueError as err:
            # parameter validation inside the physics layer
            raise ConfigError(str(err)) from err

        written = _write_outputs(Path(out_dir), args.experiment, files, results, effective)
    except ConfigError as err:
        print(f"ottosim: configuration error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"ottosim: cannot write outputs: {err}", file=sys.stderr)
        return 2
    except (InvariantViolation, FloatingPointError, np.linalg.LinAlgError, RuntimeError) as err:
        print(f"ottosim: numerical failure: {err}", file=sys.stderr)
        return 3

    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
