"""
Run configuration files.

A config is TOML with one table per concern::

    [modes]        # wavevectors, polarization, volume  (commutator, povm-check, perturbation-scaling)
    [atom]         # gap, dipole_e, dipole_m, coupling (povm-check, perturbation-scaling)
    [lineshape]    # exactly one experiment table
    [output]       # path

Experiment table names use underscores (``povm_check``,
``perturbation_scaling``); subcommands use dashes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import experiments as ex
from .errors import ConfigurationError
from .modes import mode_grid

EXPERIMENTS = ("lineshape", "mzi", "commutator", "povm-check", "perturbation-scaling")

Vec3 = tuple[float, float, float]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class ModesSection(_Section):
    wavevectors: list[Vec3] = Field(default_factory=lambda: [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)], min_length=1)
    polarization: Union[Literal[1, 2], Literal["both"]] = 1
    volume: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _nonzero_k(self):
        for k in self.wavevectors:
            if math.hypot(*k) == 0:
                raise ValueError("wavevectors must be nonzero")
        return self


class AtomSection(_Section):
    gap: float = Field(1.0, gt=0)
    dipole_e: Vec3 = (1.0, 0.0, 0.0)
    dipole_m: Vec3 = (0.0, 0.0, 0.0)
    coupling: float = Field(0.05, ge=0)

    @model_validator(mode="after")
    def _some_dipole(self):
        if not any(self.dipole_e) and not any(self.dipole_m):
            raise ValueError("atom needs a nonzero electric or magnetic dipole")
        return self


class LineshapeSection(_Section):
    omega: float = Field(gt=0)
    window_length: float = Field(gt=0)
    grid_min: Optional[float] = None
    grid_max: Optional[float] = None
    grid_points: int = Field(4001, ge=2)
    dipole: Vec3 = (1.0, 0.0, 0.0)
    coupling: float = Field(0.01, ge=0)
    volume: float = Field(1.0, gt=0)


class MziSection(_Section):
    wavenumber: float = Field(1.0, gt=0)
    half_angle: float = Field(math.pi / 4, gt=0, lt=math.pi / 2)
    relative_phase: float = 0.0
    film_z: float = 0.0
    detector_kind: Literal["electric", "magnetic"] = "electric"
    orientation: Optional[Vec3] = None
    window_length: float = Field(20.0, gt=0)
    coupling: float = Field(0.01, ge=0)
    volume: float = Field(1.0, gt=0)
    scan_start: float = 0.0
    scan_periods: float = Field(4.0, ge=3)
    scan_points: int = Field(256, ge=2)


class CommutatorPoint(_Section):
    j: int = Field(ge=0, le=2)
    k: int = Field(ge=0, le=2)
    x: Vec3 = (0.0, 0.0, 0.0)
    y: Vec3 = (0.0, 0.0, 0.0)


class CommutatorSection(_Section):
    cutoff: int = Field(1, ge=1)
    times: list[float] = Field(default_factory=lambda: [0.0, 1.7], min_length=1)
    points: list[CommutatorPoint] = Field(min_length=1)


class PovmSection(_Section):
    window_length: float = Field(10.0, gt=0)
    steps: int = Field(2000, ge=1)
    photon_amplitudes: Optional[list[float]] = None


class ScalingSection(PovmSection):
    target_probability: float = Field(1e-4, gt=0, lt=1)
    halvings: int = Field(1, ge=1)


class OutputSection(_Section):
    path: Optional[str] = None


class RunConfigModel(_Section):
    modes: Optional[ModesSection] = None
    atom: Optional[AtomSection] = None
    lineshape: Optional[LineshapeSection] = None
    mzi: Optional[MziSection] = None
    commutator: Optional[CommutatorSection] = None
    povm_check: Optional[PovmSection] = None
    perturbation_scaling: Optional[ScalingSection] = None
    output: OutputSection = Field(default_factory=OutputSection)


_SECTION_OF = {name: name.replace("-", "_") for name in EXPERIMENTS}


@dataclass
class RunConfig:
    """Validated configuration: the experiment name, its built experiment object and the raw echo."""

    experiment: str
    model: RunConfigModel
    setup: Any
    output_path: Optional[str]

    def echo(self) -> dict:
        """All values including defaults, as plain JSON-able data."""
        return self.model.model_dump(mode="json", exclude_none=True)

    def digest(self) -> str:
        payload = json.dumps({"experiment": self.experiment, **self.echo()}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _format_errors(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def _indirect(model: RunConfigModel, section: PovmSection) -> ex.IndirectConfig:
    modes = model.modes or ModesSection()
    atom = model.atom or AtomSection()
    if modes.polarization == "both":
        raise ConfigurationError("modes.polarization: povm-check and perturbation-scaling need a single polarization")
    return ex.IndirectConfig(
        wavevectors=modes.wavevectors, polarization=modes.polarization, volume=modes.volume,
        gap=atom.gap, dipole_e=atom.dipole_e, dipole_m=atom.dipole_m, coupling=atom.coupling,
        window_length=section.window_length, steps=section.steps, photon_amplitudes=section.photon_amplitudes)


def build_setup(experiment: str, model: RunConfigModel):
    """Turn the validated tables into the experiment's own config object."""
    sec = getattr(model, _SECTION_OF[experiment])
    if experiment == "lineshape":
        grid = None
        if sec.grid_min is not None or sec.grid_max is not None:
            if sec.grid_min is None or sec.grid_max is None:
                raise ConfigurationError("lineshape: give both grid_min and grid_max or neither")
            if not sec.grid_max > sec.grid_min:
                raise ConfigurationError("lineshape.grid_max must exceed lineshape.grid_min")
            grid = np.linspace(sec.grid_min, sec.grid_max, sec.grid_points)
        return ex.LineshapeConfig(sec.omega, sec.window_length, grid, sec.dipole, sec.coupling, sec.volume)
    if experiment == "mzi":
        period = math.pi / (sec.wavenumber * math.sin(sec.half_angle))
        step = sec.scan_periods * period / sec.scan_points
        scan = sec.scan_start + step * np.arange(sec.scan_points)
        return ex.MziConfig(sec.wavenumber, sec.half_angle, sec.relative_phase, sec.film_z, sec.detector_kind,
                            sec.orientation, sec.window_length, sec.coupling, sec.volume, scan)
    if experiment == "commutator":
        modes = model.modes or ModesSection()
        pols = (1, 2) if modes.polarization == "both" else (modes.polarization,)
        ms = mode_grid(modes.wavevectors, modes.volume, pols)
        return ms, sec
    return _indirect(model, sec)


def parse_config(path: str | Path, experiment: str | None = None) -> RunConfig:
    """Read, validate and build a run configuration.

    ``experiment`` (a subcommand name) must match the single experiment
    table in the file when given.
    """
    path = Path(path)
    text = path.read_text()
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigurationError(f"{path}: not valid TOML ({err})") from err
    try:
        model = RunConfigModel.model_validate(raw)
    except ValidationError as err:
        raise ConfigurationError(f"{path}: {_format_errors(err)}") from err
    present = [name for name in EXPERIMENTS if getattr(model, _SECTION_OF[name]) is not None]
    if len(present) != 1:
        raise ConfigurationError(
            f"{path}: exactly one experiment table required, found {present or 'none'}")
    found = present[0]
    if experiment is not None and experiment != found:
        raise ConfigurationError(f"{path}: subcommand {experiment!r} but config holds a [{_SECTION_OF[found]}] table")
    try:
        setup = build_setup(found, model)
    except ValueError as err:
        raise ConfigurationError(f"{path}: {err}") from err
    return RunConfig(found, model, setup, model.output.path)
