"""
lambda_fcs: photon-counting statistics and slow light of a driven Lambda system.

Each subcommand evaluates one dataset and writes it as CSV or
JSON (stdout when --out is omitted). Logs go to stderr and, unless
--no-log-file is given, to logs/lambda_fcs_<timestamp>.log.

Usage:
    python lambda_fcs.py spectrum [--preset na] [--set sweep.delta_p.count=101] [--out spectrum.csv]
    python lambda_fcs.py tradeoff --preset cs --format json
    python lambda_fcs.py fano-map --jobs 4 --out fano_map.csv
    python lambda_fcs.py fcs --set omega_c=0.5
    python lambda_fcs.py oracle --set delta_p=1.5
    python lambda_fcs.py dressed --set delta_p=0.2 --set delta_c=0.2
    python lambda_fcs.py presets

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(sweeps still write every row; failed cells carry the error in "status").
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from dressed import (
    LABELS,
    autler_townes_doublet,
    dark_state_overlap,
    dipole_sum_13,
    dressed_eigensystem,
    effective_hamiltonian,
    interference_amplitude,
    numeric_eigensystem,
)
from dynamics import steady_state
from errors import ConfigError, LambdaFcsError, LinearizationViolated, OutOfValidityRegime
from fcs import (
    CumulantMethod,
    coherence_sums,
    cumulants_secular,
    fano_closed_form,
    fano_resonance,
    n_resolved_oracle,
    q_factor,
)
from load_env import env_int, env_path, load_env_file
from model import SystemParams
from optics import (
    MediumParams,
    group_velocity_resonant,
    intensity_from_rabi,
    susceptibility_from_coherence,
    transparency_window,
    velocity_from_xi,
)
from run_config import PRESETS, RunConfig, load_run_config, preset_summary

REPO_ROOT = Path(__file__).resolve().parent
LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
FAILED = "Failed"
APEX_TOL = 1e-12

# Reference drive used by the spectrum, fcs and dressed commands.
REFERENCE_SYSTEM = {"gamma": 0.9, "omega_c": 0.56, "omega_p": 0.5, "delta_c": 0.0}

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "spectrum": {
        "system": dict(REFERENCE_SYSTEM),
        "sweep": {"delta_p": {"min": -3.0, "max": 3.0, "count": 301}},
    },
    "tradeoff": {
        "preset": "na",
        "sweep": {"xi": {"min": 1.0, "max": 1000.0, "count": 200, "scale": "log"}},
    },
    "fano-map": {
        "system": {"gamma": 0.9, "omega_c": 0.56, "delta_c": 0.0, "calA": 47.0},
        "sweep": {
            "delta_p": {"min": -3.0, "max": 3.0, "count": 121},
            "omega_p": {"min": 0.05, "max": 1.5, "count": 30},
        },
    },
    "fcs": {"system": dict(REFERENCE_SYSTEM), "output": {"format": "json"}},
    "oracle": {
        "system": {**REFERENCE_SYSTEM, "delta_p": 1.5},
        "oracle": {"tau_end": 200.0, "n_max": 64},
        "output": {"format": "json"},
    },
    "dressed": {"system": dict(REFERENCE_SYSTEM), "output": {"format": "json"}},
    "presets": {},
}

Evaluator = Callable[[SystemParams, Optional[MediumParams]], Dict[str, Any]]


@dataclass
class ResultTable:
    command: str
    columns: List[str]
    rows: List[Dict[str, Any]]
    summary: Optional[Dict[str, Any]] = None
    failures: int = 0


def _run_cells(config: RunConfig, cells: Sequence[Dict[str, float]], evaluate: Evaluator) -> Tuple[List[Dict[str, Any]], int]:
    """
    Evaluate every grid cell. Rows land in slots indexed by grid position, so
    the output order never depends on which worker finishes first.
    """
    rows: List[Optional[Dict[str, Any]]] = [None] * len(cells)
    logging.info(f"Evaluating {len(cells)} cell(s) with {config.jobs} worker(s)")

    def run(index: int) -> Dict[str, Any]:
        coords = cells[index]
        try:
            system, medium = config.cell_params(coords)
            values = evaluate(system, medium)
        except (LambdaFcsError, np.linalg.LinAlgError) as exc:
            logging.error(f"Cell {index} {coords} failed: {type(exc).__name__}: {exc}")
            return {
                **coords,
                "method": FAILED,
                "residual": math.nan,
                "status": f"error: {type(exc).__name__}: {exc}",
            }
        values.setdefault("status", "ok")
        logging.debug(f"Cell {index} {coords}: {values.get('method')}")
        return {**coords, **values}

    if config.jobs == 1 or len(cells) <= 1:
        for index in range(len(cells)):
            rows[index] = run(index)
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures = {pool.submit(run, index): index for index in range(len(cells))}
            for future in as_completed(futures):
                rows[futures[future]] = future.result()

    failures = sum(1 for row in rows if row["method"] == FAILED)
    if failures:
        logging.warning(f"{failures} of {len(cells)} cell(s) failed")
    return rows, failures


def _sweep_names(config: RunConfig) -> List[str]:
    return [axis.variable for axis in config.sweeps]


def _method_name(method: Any) -> str:
    return method.value if isinstance(method, Enum) else str(method)


# --- spectrum ---------------------------------------------------------------

SPECTRUM_COLUMNS = [
    "rho11", "rho22", "rho33",
    "rho12_re", "rho12_im", "rho13_re", "rho13_im", "rho23_re", "rho23_im",
    "rho_sum_abs",
]


def cmd_spectrum(config: RunConfig) -> ResultTable:
    """Steady-state density matrix over the sweep (probe detuning by default)."""
    with_medium = config.medium is not None

    def evaluate(params: SystemParams, medium: Optional[MediumParams]) -> Dict[str, Any]:
        steady = steady_state(params)
        rho = steady.rho
        p1, p2, p3 = rho.populations
        values: Dict[str, Any] = {"rho11": p1, "rho22": p2, "rho33": p3}
        for i, j in ((1, 2), (1, 3), (2, 3)):
            values[f"rho{i}{j}_re"] = rho.real_part(i, j)
            values[f"rho{i}{j}_im"] = rho.imag_part(i, j)
        values["rho_sum_abs"] = abs(rho.coherence(1, 2) + rho.coherence(1, 3))
        if medium is not None:
            try:
                chi = susceptibility_from_coherence(rho.coherence(1, 3), medium).chi
                values["chi_re"], values["chi_im"] = chi.real, chi.imag
            except LinearizationViolated as exc:
                values["chi_re"] = values["chi_im"] = math.nan
                values["status"] = f"warning: LinearizationViolated: {exc}"
        values["method"] = _method_name(steady.method)
        values["residual"] = steady.residual
        return values

    rows, failures = _run_cells(config, config.grid(), evaluate)
    columns = _sweep_names(config) + SPECTRUM_COLUMNS
    if with_medium:
        columns += ["chi_re", "chi_im"]
    return ResultTable("spectrum", columns + ["method", "residual", "status"], rows, failures=failures)


# --- tradeoff ---------------------------------------------------------------

TRADEOFF_COLUMNS = ["xi", "v_g", "F_upper", "F_lower", "xi_lower", "method", "residual", "status"]


def cmd_tradeoff(config: RunConfig) -> ResultTable:
    """
    Resonant group velocity against Fano factor, one row per xi >= 1.
    The lower branch xi -> 1/xi has the same v_g and is carried in F_lower.
    """
    medium = config.medium
    if medium is None:
        raise ConfigError("tradeoff needs a medium: use --preset na|cs or a [medium] table")
    if len(config.sweeps) != 1 or config.sweeps[0].variable != "xi":
        raise ConfigError("tradeoff sweeps exactly one variable, xi")
    xis = [float(x) for x in config.sweeps[0].values()]
    if min(xis) < 1 - APEX_TOL:
        raise ConfigError(f"tradeoff xi values must be >= 1 (the lower branch is 1/xi), got min {min(xis)}")
    if abs(xis[0] - 1) > APEX_TOL:
        xis.insert(0, 1.0)

    def evaluate(params: SystemParams, medium: Optional[MediumParams]) -> Dict[str, Any]:
        xi = params.xi()
        v_g = velocity_from_xi(xi, medium)
        resonant = group_velocity_resonant(params.replace(delta_p=0.0), medium)
        return {
            "v_g": v_g,
            "F_upper": fano_resonance(params.gamma, xi, params.calA),
            "F_lower": fano_resonance(params.gamma, 1 / xi, params.calA),
            "xi_lower": 1 / xi,
            "method": CumulantMethod.CLOSED_FORM.value,
            "residual": abs(resonant - v_g) / v_g,
        }

    rows, failures = _run_cells(config, [{"xi": xi} for xi in xis], evaluate)
    summary = {
        "atom_preset": config.atom_preset,
        "gamma": config.system.gamma,
        "vg_min": medium.vg_min,
        "calN": medium.calN,
        "n_d": medium.n_d,
        "apex": {"v_g": medium.vg_min, "fano": fano_resonance(config.system.gamma, 1.0, config.system.calA)},
    }
    logging.info(f"Trade-off apex: v_g = {medium.vg_min:.6g} m/s for {config.atom_preset}")
    return ResultTable("tradeoff", TRADEOFF_COLUMNS, rows, summary, failures)


# --- fano-map ---------------------------------------------------------------

FANO_MAP_COLUMNS = ["F", "J", "D", "R", "I", "q", "fano_closed", "flagged"]


def cmd_fano_map(config: RunConfig) -> ResultTable:
    """
    Fano factor from the secular formula over the sweep grid, with the
    coherence sums R and I and the correction q. Cells evaluated through a
    resonance limit are flagged.
    """

    def evaluate(params: SystemParams, medium: Optional[MediumParams]) -> Dict[str, Any]:
        steady = steady_state(params)
        result = cumulants_secular(params, steady)
        real_sum, imag_sum = coherence_sums(steady.rho)
        try:
            q = q_factor(params)
        except OutOfValidityRegime:
            q = math.nan
        # same convention as F: temperature only through the generator's nbar
        closed_params = params if params.has_thermal_photons else params.replace(calA=math.inf)
        try:
            closed = fano_closed_form(closed_params)
        except OutOfValidityRegime:
            closed = math.nan
        return {
            "F": result.fano,
            "J": result.j_ph,
            "D": result.d_ph,
            "R": real_sum,
            "I": imag_sum,
            "q": q,
            "fano_closed": closed,
            "flagged": result.method is not CumulantMethod.SECULAR_FORMULA,
            "method": result.method.value,
            "residual": result.residual,
        }

    rows, failures = _run_cells(config, config.grid(), evaluate)
    fanos = np.array([row.get("F", math.nan) for row in rows], dtype=float)
    finite = fanos[np.isfinite(fanos)]
    summary = {
        "cells": len(rows),
        "flagged": sum(1 for row in rows if row.get("flagged")),
        "f_min": float(finite.min()) if finite.size else None,
        "f_max": float(finite.max()) if finite.size else None,
        "cells_below_one": int(np.sum(finite < 1)),
    }
    columns = _sweep_names(config) + FANO_MAP_COLUMNS + ["method", "residual", "status"]
    return ResultTable("fano-map", columns, rows, summary, failures)


# --- fcs --------------------------------------------------------------------

FCS_COLUMNS = ["j_ph", "d_ph", "fano", "j12", "j13"]


def cmd_fcs(config: RunConfig) -> ResultTable:
    def evaluate(params: SystemParams, medium: Optional[MediumParams]) -> Dict[str, Any]:
        result = cumulants_secular(params)
        for message in result.warnings:
            logging.warning(message)
        return {
            "j_ph": result.j_ph,
            "d_ph": result.d_ph,
            "fano": result.fano,
            "j12": result.j12,
            "j13": result.j13,
            "method": result.method.value,
            "residual": result.residual,
        }

    rows, failures = _run_cells(config, config.grid(), evaluate)
    columns = _sweep_names(config) + FCS_COLUMNS + ["method", "residual", "status"]
    return ResultTable("fcs", columns, rows, failures=failures)


# --- oracle -----------------------------------------------------------------

ORACLE_COLUMNS = ["tau", "mean", "var", "norm", "method", "residual", "status"]


def _require_single_point(config: RunConfig, command: str) -> None:
    if config.sweeps:
        raise ConfigError(f"{command} evaluates a single parameter point; remove the [sweep] tables")


def _relative_deviation(measured: float, reference: float) -> Optional[float]:
    if not math.isfinite(reference) or reference == 0:
        return None
    return abs(measured - reference) / abs(reference)


def cmd_oracle(config: RunConfig) -> ResultTable:
    """
    Brute-force count-resolved integration, reported as the (tau, <n>, var)
    series with the fitted slopes next to the secular-formula values.
    """
    _require_single_point(config, "oracle")
    params = config.system
    tau_end = float(config.oracle.get("tau_end", 200.0))
    n_max = config.oracle.get("n_max", 64)
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
        raise ConfigError(f"oracle.n_max must be a positive integer, got {n_max!r}")
    if tau_end <= 0:
        raise ConfigError(f"oracle.tau_end must be > 0, got {tau_end}")

    formula = cumulants_secular(params)
    oracle = n_resolved_oracle(params, tau_end=tau_end, n_max=n_max)
    method = CumulantMethod.N_RESOLVED_ORACLE.value
    rows = [
        {"tau": tau, "mean": mean, "var": var, "norm": norm, "method": method, "residual": abs(norm - 1), "status": "ok"}
        for tau, mean, var, norm in zip(oracle.taus, oracle.mean, oracle.var, oracle.norm)
    ]
    summary = {
        "j_oracle": oracle.j_slope,
        "d_oracle": oracle.d_slope,
        "fano_oracle": oracle.fano,
        "j_formula": formula.j_ph,
        "d_formula": formula.d_ph,
        "fano_formula": formula.fano,
        "formula_method": formula.method.value,
        "j_deviation": _relative_deviation(oracle.j_slope, formula.j_ph),
        "d_deviation": _relative_deviation(oracle.d_slope, formula.d_ph),
        "norm_error": oracle.norm_error,
        "boundary_mass": oracle.boundary_mass,
        "n_min": oracle.n_min,
        "n_max": oracle.n_max,
        "tau_end": tau_end,
    }
    logging.info(
        f"Oracle vs formula: J {oracle.j_slope:.8g} / {formula.j_ph:.8g}, D {oracle.d_slope:.8g} / {formula.d_ph:.8g}"
    )
    return ResultTable("oracle", ORACLE_COLUMNS, rows, summary)


# --- dressed ----------------------------------------------------------------

DRESSED_COLUMNS = [
    "label", "eigenvalue",
    "c1_re", "c1_im", "c2_re", "c2_im", "c3_re", "c3_im",
    "method", "residual", "status",
]


def cmd_dressed(config: RunConfig) -> ResultTable:
    """Dressed eigenstates of H_eff (delta_p must equal delta_c)."""
    _require_single_point(config, "dressed")
    params = config.system
    system = dressed_eigensystem(params)
    residuals = system.residuals(effective_hamiltonian(params))

    rows = []
    for label in LABELS:
        vector = system.state(label)
        row: Dict[str, Any] = {"label": label, "eigenvalue": system.eigenvalues[label]}
        for k, component in enumerate(vector, start=1):
            row[f"c{k}_re"] = component.real
            row[f"c{k}_im"] = component.imag
        row.update({"method": CumulantMethod.CLOSED_FORM.value, "residual": residuals[label], "status": "ok"})
        rows.append(row)

    numeric_values, _ = numeric_eigensystem(params)
    window = transparency_window(params)
    summary = {
        "mixing_theta": system.mixing_theta,
        "mixing_phi": system.mixing_phi,
        "numeric_eigenvalues": numeric_values,
        "dark_state_overlap": dark_state_overlap(steady_state(params).rho, params),
        "interference_amplitude": interference_amplitude(params),
        "autler_townes_doublet": list(autler_townes_doublet(params)),
        "dipole_sum_13": abs(dipole_sum_13(system)),
        "transparency_window": window.width,
        "cpt_advisory": window.cpt_advisory,
    }
    return ResultTable("dressed", DRESSED_COLUMNS, rows, summary)


# --- presets ----------------------------------------------------------------

PRESET_COLUMNS = [
    "name", "gamma", "omega_p", "n_density", "dipole_13", "gamma13_si", "lambda_p",
    "n_d", "n_d_derived", "calN", "calN_derived", "omega_p_scaled", "vg_min", "probe_intensity",
    "method", "residual", "status",
]


def cmd_presets(config: RunConfig) -> ResultTable:
    """Pinned atom constants next to the values derived from the raw inputs."""
    rows = []
    for key, chosen in PRESETS.items():
        if config.atom_preset != "Custom" and chosen.name != config.atom_preset:
            continue
        pinned = MediumParams(**chosen.medium)
        derived = MediumParams(**{**chosen.medium, "n_d_pinned": None, "calN_pinned": None})
        row = {k: v for k, v in preset_summary(key).items() if k in PRESET_COLUMNS}
        row.update(
            {
                "n_d": pinned.n_d,
                "n_d_derived": derived.n_d,
                "calN": pinned.calN,
                "calN_derived": derived.calN,
                "omega_p_scaled": pinned.omega_p_dimless,
                "vg_min": pinned.vg_min,
                "probe_intensity": intensity_from_rabi(pinned.omega_p_rabi, pinned.gamma13_si, pinned.lambda_p),
                "method": "Pinned",
                "residual": abs(derived.calN - pinned.calN) / pinned.calN,
                "status": "ok",
            }
        )
        rows.append(row)
    return ResultTable("presets", PRESET_COLUMNS, rows)


COMMANDS: Dict[str, Callable[[RunConfig], ResultTable]] = {
    "spectrum": cmd_spectrum,
    "tradeoff": cmd_tradeoff,
    "fano-map": cmd_fano_map,
    "fcs": cmd_fcs,
    "oracle": cmd_oracle,
    "dressed": cmd_dressed,
    "presets": cmd_presets,
}


# --- output -----------------------------------------------------------------

def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def render_json(table: ResultTable, config: RunConfig) -> str:
    payload: Dict[str, Any] = {
        "command": table.command,
        "config": config.to_dict(),
        "columns": table.columns,
        "rows": [{column: row.get(column) for column in table.columns} for row in table.rows],
    }
    if table.summary is not None:
        payload["summary"] = table.summary
    return json.dumps(to_jsonable(payload), indent=2) + "\n"


def render_csv(table: ResultTable) -> str:
    frame = pd.DataFrame(table.rows, columns=table.columns)
    return frame.to_csv(index=False, float_format="%.17g", na_rep="nan", lineterminator="\n")


def write_output(table: ResultTable, config: RunConfig) -> None:
    path = config.output.path
    if config.output.format == "json":
        text = render_json(table, config)
    else:
        text = render_csv(table)

    if path is None:
        sys.stdout.write(text)
        if table.summary is not None and config.output.format == "csv":
            logging.info(f"Summary: {json.dumps(to_jsonable(table.summary))}")
        return

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logging.info(f"Wrote {len(table.rows)} row(s) to {path}")
    if table.summary is not None and config.output.format == "csv":
        sidecar = path.with_name(f"{path.stem}.summary.json")
        sidecar.write_text(json.dumps(to_jsonable(table.summary), indent=2) + "\n", encoding="utf-8")
        logging.info(f"Wrote summary: {sidecar}")


# --- entry point ------------------------------------------------------------

def configure_logging(log_dir: Optional[Path], verbose: bool = False) -> Optional[Path]:
    """Log to stderr and, when log_dir is given, to a timestamped file in it."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = None
    if log_dir is not None:
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"lambda_fcs_{datetime.now().strftime('%Y%m%d-%H%M%S')}.log"
        handlers.insert(0, logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    return log_file


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML run configuration")
    common.add_argument("--preset", help="Atom preset: na (Na23) or cs (Cs133)")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="Override a configuration value, e.g. system.omega_c=0.6 or sweep.delta_p.count=101 (repeatable)",
    )
    common.add_argument("--out", type=Path, help="Output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="Output format")
    common.add_argument("--jobs", type=int, help="Worker threads for sweeps (default: LAMBDA_FCS_JOBS or 1)")
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    common.add_argument("--log-dir", type=Path, help="Directory for the run log (default: logs/ or LAMBDA_FCS_LOG_DIR)")
    common.add_argument("--no-log-file", action="store_true", help="Log to stderr only")

    parser = argparse.ArgumentParser(
        description="Photon-counting statistics and slow light of a driven three-level Lambda system",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Steady-state spectrum over the probe detuning
  python lambda_fcs.py spectrum --out spectrum.csv

  # Group velocity vs Fano factor for cesium, as JSON
  python lambda_fcs.py tradeoff --preset cs --format json --out tradeoff_cs.json

  # Fano-factor map with 4 workers
  python lambda_fcs.py fano-map --jobs 4 --out fano_map.csv

  # Cumulants at the CPT point (xi = 1)
  python lambda_fcs.py fcs --set omega_c=0.5

  # Brute-force check of J and D
  python lambda_fcs.py oracle --set delta_p=1.5
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Command to execute", required=True)
    subparsers.add_parser("spectrum", parents=[common], help="Steady-state density matrix vs detuning")
    subparsers.add_parser("tradeoff", parents=[common], help="Group velocity vs Fano factor along xi")
    subparsers.add_parser("fano-map", parents=[common], help="Fano factor over probe detuning and Rabi frequency")
    subparsers.add_parser("fcs", parents=[common], help="Current, diffusion and Fano factor at one point")
    subparsers.add_parser("oracle", parents=[common], help="n-resolved master-equation check of J and D")
    subparsers.add_parser("dressed", parents=[common], help="Dressed eigenstates at equal detunings")
    subparsers.add_parser("presets", parents=[common], help="List atom presets and derived constants")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_env_file()
    args = build_parser().parse_args(argv)

    try:
        log_dir = None if args.no_log_file else (args.log_dir or env_path("LAMBDA_FCS_LOG_DIR", REPO_ROOT / "logs"))
        log_file = configure_logging(log_dir, args.verbose)
        if log_file is not None:
            logging.info(f"Logging to {log_file}")

        config = load_run_config(
            COMMAND_DEFAULTS[args.command],
            preset=args.preset,
            config_path=args.config,
            overrides=args.overrides,
            out=args.out,
            fmt=args.format,
            jobs=args.jobs,
            env_jobs=env_int("LAMBDA_FCS_JOBS"),
        )
        logging.info(f"=== {args.command} ({config.atom_preset}) ===")
        table = COMMANDS[args.command](config)
        write_output(table, config)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except LambdaFcsError as e:
        logging.error(f"{type(e).__name__}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return 3

    if table.failures:
        print(f"Error: {table.failures} cell(s) failed; see the status column", file=sys.stderr)
        return 3
    logging.info(f"[OK] {args.command} completed successfully.")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
