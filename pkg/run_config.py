"""
Run configuration for the lambda_fcs command line.

A RunConfig is assembled in layers, later layers winning:

    command defaults < --preset < --config file.toml < --set key=value < flags

TOML layout:

    preset = "na"            # optional
    jobs = 4                 # optional

    [system]                 # SystemParams fields
    omega_c = 0.56

    [medium]                 # MediumParams fields
    n_density = 8e13

    [sweep.delta_p]          # one table per swept variable
    min = -3.0
    max = 3.0
    count = 301
    scale = "linear"         # or "log"

    [oracle]                 # n-resolved oracle settings
    tau_end = 200.0
    n_max = 64

    [output]
    format = "csv"           # or "json"
    path = "spectrum.csv"
"""
from __future__ import annotations

import copy
import itertools
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigError, InvalidParams
from model import SystemParams
from optics import MediumParams

SYSTEM_FIELDS = tuple(f.name for f in fields(SystemParams))
MEDIUM_FIELDS = tuple(f.name for f in fields(MediumParams))
DERIVED_AXES = ("xi",)
SECTIONS = ("system", "medium", "sweep", "oracle", "output")
TOP_LEVEL_KEYS = ("preset", "jobs")
ORACLE_KEYS = ("tau_end", "n_max")
OUTPUT_FORMATS = ("csv", "json")
SCALES = ("linear", "log")


@dataclass(frozen=True)
class AtomPreset:
    name: str
    system: Dict[str, Any]
    medium: Dict[str, Any]


# Published constants: sodium (slow-light experiment parameters) and cesium.
# n_d_pinned / calN_pinned carry the published N_d and calN.
PRESETS: Dict[str, AtomPreset] = {
    "na": AtomPreset(
        name="Na23",
        system={"gamma": 0.9, "omega_p": 0.2, "omega_c": 0.2, "nbar12": 0.0, "nbar13": 0.0},
        medium={
            "n_density": 8e13,
            "dipole_13": 4.2e-18,
            "gamma13_si": 0.62e8,
            "omega_p_rabi": 0.2,
            "lambda_p": 589e-7,
            "n_d_pinned": 0.11,
            "calN_pinned": 1.78e8,
        },
    ),
    "cs": AtomPreset(
        name="Cs133",
        # no published branching ratio for the Cs estimate; apex values do not depend on gamma
        system={"gamma": 1.0, "omega_p": 0.5, "omega_c": 0.5, "nbar12": 0.0, "nbar13": 0.0},
        medium={
            "n_density": 1e12,
            "dipole_13": 8.09e-18,
            "gamma13_si": 1e8,
            "omega_p_rabi": 0.5,
            "lambda_p": 894e-7,
            "n_d_pinned": 0.12,
            "calN_pinned": 3.2e7,
        },
    ),
}
PRESET_ALIASES = {"na": "na", "na23": "na", "cs": "cs", "cs133": "cs"}


def get_preset(name: str) -> AtomPreset:
    key = PRESET_ALIASES.get(str(name).strip().lower())
    if key is None:
        raise ConfigError(f"unknown preset {name!r}; choose one of {sorted(PRESETS)}")
    return PRESETS[key]


@dataclass(frozen=True)
class SweepAxis:
    variable: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.variable not in SYSTEM_FIELDS + MEDIUM_FIELDS + DERIVED_AXES:
            raise ConfigError(f"sweep variable {self.variable!r} is not a SystemParams/MediumParams field")
        if self.variable == "equal_gaps":
            raise ConfigError("equal_gaps cannot be swept")
        if isinstance(self.count, bool) or not isinstance(self.count, int) or self.count < 2:
            raise ConfigError(f"sweep {self.variable}: count must be an integer >= 2, got {self.count!r}")
        if self.scale not in SCALES:
            raise ConfigError(f"sweep {self.variable}: scale must be one of {SCALES}, got {self.scale!r}")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError(f"sweep {self.variable}: log scale needs positive bounds")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.count)
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def from_table(cls, variable: str, table: Dict[str, Any]) -> "SweepAxis":
        unknown = set(table) - {"min", "max", "count", "scale"}
        if unknown:
            raise ConfigError(f"sweep {variable}: unknown keys {sorted(unknown)}")
        try:
            return cls(
                variable=variable,
                start=float(table["min"]),
                stop=float(table["max"]),
                count=table["count"],
                scale=table.get("scale", "linear"),
            )
        except ConfigError:
            raise
        except KeyError as exc:
            raise ConfigError(f"sweep {variable}: missing key {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sweep {variable}: {exc}") from exc

    def as_dict(self) -> Dict[str, Any]:
        return {"variable": self.variable, "min": self.start, "max": self.stop, "count": self.count, "scale": self.scale}


@dataclass(frozen=True)
class OutputSpec:
    format: str = "csv"
    path: Optional[Path] = None


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    medium: Optional[MediumParams] = None
    sweeps: Tuple[SweepAxis, ...] = ()
    output: OutputSpec = field(default_factory=OutputSpec)
    jobs: int = 1
    atom_preset: str = "Custom"
    oracle: Dict[str, Any] = field(default_factory=dict)

    def grid(self) -> List[Dict[str, float]]:
        """Sweep coordinates in row-major order, first axis slowest."""
        if not self.sweeps:
            return [{}]
        names = [axis.variable for axis in self.sweeps]
        return [
            dict(zip(names, (float(v) for v in combo)))
            for combo in itertools.product(*(axis.values() for axis in self.sweeps))
        ]

    def cell_params(self, coords: Dict[str, float]) -> Tuple[SystemParams, Optional[MediumParams]]:
        """Apply one grid cell's coordinates; raises InvalidParams for an invalid cell."""
        system_changes = {k: v for k, v in coords.items() if k in SYSTEM_FIELDS}
        medium_changes = {k: v for k, v in coords.items() if k in MEDIUM_FIELDS}
        system = self.system.replace(**system_changes) if system_changes else self.system
        if "xi" in coords:
            system = system.replace(omega_c=coords["xi"] * system.omega_p)
        medium = self.medium
        if medium_changes:
            if medium is None:
                raise InvalidParams("sweeping a medium field needs a medium (--preset or [medium])")
            medium = MediumParams(**{**medium.as_dict(), **medium_changes})
        return system, medium

    def to_dict(self) -> Dict[str, Any]:
        return {
            "atom_preset": self.atom_preset,
            "system": self.system.as_dict(),
            "medium": self.medium.as_dict() if self.medium is not None else None,
            "sweep": [axis.as_dict() for axis in self.sweeps],
            "oracle": dict(self.oracle),
            "output": {"format": self.output.format, "path": str(self.output.path) if self.output.path else None},
            "jobs": self.jobs,
        }


def parse_scalar(text: str) -> Any:
    """Parse a --set value as a TOML scalar, falling back to the raw string."""
    text = text.strip()
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text


def _empty_layers() -> Dict[str, Any]:
    return {"system": {}, "medium": {}, "sweep": {}, "oracle": {}, "output": {}}


def _merge(base: Dict[str, Any], layer: Dict[str, Any], replace_sweep: bool) -> None:
    for section in SECTIONS:
        if section not in layer:
            continue
        if not isinstance(layer[section], dict):
            raise ConfigError(f"[{section}] must be a table")
        if section == "sweep" and replace_sweep:
            base["sweep"] = copy.deepcopy(layer["sweep"])
        else:
            base[section].update(copy.deepcopy(layer[section]))
    for key in TOP_LEVEL_KEYS:
        if key in layer:
            base[key] = layer[key]


def _check_sections(data: Dict[str, Any], source: str) -> None:
    unknown = set(data) - set(SECTIONS) - set(TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"{source}: unknown keys or sections {sorted(unknown)}")


def load_toml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    _check_sections(data, str(path))
    return data


def apply_override(layers: Dict[str, Any], assignment: str) -> None:
    """Apply one --set key=value to the layered raw configuration."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    parts = [p.strip() for p in key.strip().split(".") if p.strip()]
    value = parse_scalar(raw)
    if not parts:
        raise ConfigError(f"--set has an empty key: {assignment!r}")

    if len(parts) == 1:
        name = parts[0]
        if name in TOP_LEVEL_KEYS:
            layers[name] = value
        elif name in SYSTEM_FIELDS:
            layers["system"][name] = value
        elif name in MEDIUM_FIELDS:
            layers["medium"][name] = value
        else:
            raise ConfigError(f"--set: unknown key {name!r}")
        return

    section = parts[0]
    if section not in SECTIONS:
        raise ConfigError(f"--set: unknown section {section!r}")
    if section == "sweep":
        if len(parts) != 3:
            raise ConfigError(f"--set: sweep keys look like sweep.<variable>.<min|max|count|scale>, got {key!r}")
        layers["sweep"].setdefault(parts[1], {})[parts[2]] = value
    elif len(parts) == 2:
        layers[section][parts[1]] = value
    else:
        raise ConfigError(f"--set: key too deep: {key!r}")


def build_run_config(layers: Dict[str, Any]) -> RunConfig:
    """Validate the merged raw layers into a RunConfig."""
    system_raw = dict(layers["system"])
    unknown = set(system_raw) - set(SYSTEM_FIELDS)
    if unknown:
        raise ConfigError(f"[system]: unknown keys {sorted(unknown)}")
    try:
        system = SystemParams(**system_raw)
    except InvalidParams as exc:
        raise ConfigError(f"[system]: {exc}") from exc

    medium = None
    if layers["medium"]:
        unknown = set(layers["medium"]) - set(MEDIUM_FIELDS)
        if unknown:
            raise ConfigError(f"[medium]: unknown keys {sorted(unknown)}")
        try:
            medium = MediumParams(**layers["medium"])
        except (InvalidParams, TypeError) as exc:
            raise ConfigError(f"[medium]: {exc}") from exc

    sweeps = []
    for variable, table in layers["sweep"].items():
        if not isinstance(table, dict):
            raise ConfigError(f"[sweep.{variable}] must be a table")
        sweeps.append(SweepAxis.from_table(variable, table))

    oracle = dict(layers["oracle"])
    unknown = set(oracle) - set(ORACLE_KEYS)
    if unknown:
        raise ConfigError(f"[oracle]: unknown keys {sorted(unknown)}")

    output_raw = dict(layers["output"])
    unknown = set(output_raw) - {"format", "path"}
    if unknown:
        raise ConfigError(f"[output]: unknown keys {sorted(unknown)}")
    fmt = str(output_raw.get("format", "csv")).lower()
    if fmt not in OUTPUT_FORMATS:
        raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}, got {fmt!r}")
    path = output_raw.get("path")
    output = OutputSpec(format=fmt, path=Path(path) if path else None)

    jobs = layers.get("jobs", 1)
    if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
        raise ConfigError(f"jobs must be a positive integer, got {jobs!r}")

    return RunConfig(
        system=system,
        medium=medium,
        sweeps=tuple(sweeps),
        output=output,
        jobs=jobs,
        atom_preset=layers.get("atom_preset", "Custom"),
        oracle=oracle,
    )


def load_run_config(
    defaults: Optional[Dict[str, Any]] = None,
    preset: Optional[str] = None,
    config_path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    out: Optional[Path] = None,
    fmt: Optional[str] = None,
    jobs: Optional[int] = None,
    env_jobs: Optional[int] = None,
) -> RunConfig:
    """
    Merge the configuration layers. env_jobs (LAMBDA_FCS_JOBS) only replaces
    the built-in worker count; a jobs key in the file or --jobs wins over it.
    """
    layers = _empty_layers()
    if defaults:
        _check_sections(defaults, "command defaults")
        _merge(layers, defaults, replace_sweep=True)
    if env_jobs is not None:
        layers["jobs"] = env_jobs

    file_data = load_toml(config_path) if config_path is not None else {}

    preset_name = preset or file_data.get("preset") or layers.get("preset")
    if preset_name:
        chosen = get_preset(preset_name)
        layers["system"].update(chosen.system)
        layers["medium"] = dict(chosen.medium)
        layers["atom_preset"] = chosen.name

    if file_data:
        _merge(layers, file_data, replace_sweep="sweep" in file_data)

    for assignment in overrides:
        apply_override(layers, assignment)

    if out is not None:
        layers["output"]["path"] = str(out)
    if fmt is not None:
        layers["output"]["format"] = fmt
    if jobs is not None:
        layers["jobs"] = jobs

    layers.pop("preset", None)
    return build_run_config(layers)


def preset_summary(key: str) -> Dict[str, Any]:
    chosen = get_preset(key)
    return {"name": chosen.name, **chosen.system, **chosen.medium}

