"""
Scenario configuration

JSON scenario files are validated into a tree of pydantic models. Unknown
keys are rejected, every default is filled in, and ``dump_config`` echoes
the validated tree so that load, dump and load again give the same config.
``build_problem`` turns a validated config into the solver objects.
"""

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator, model_validator

from src.model.errors import ConfigurationError
from src.model.mesh import Mesh, SegmentPiece, build_uniform_mesh
from src.model.state import BoundarySpec, ContactData, ModelParams, State, initial_state
from src.transport.stepper import TimeStepper

from .profiles import ConstantProfile, ProfileSpec

CONVERGENCE_CASES = ("poisson-manufactured", "poisson-mixed", "porous-medium")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SegmentPieceConfig(_Section):
    side: str = Field(..., description="Box side: left, right, bottom or top")
    lower: Optional[float] = Field(None, description="Lower tangential bound (2D only)")
    upper: Optional[float] = Field(None, description="Upper tangential bound (2D only)")


class MeshConfig(_Section):
    dim: Literal[1, 2] = 1
    lengths: List[float] = Field(..., description="Box extent per axis")
    counts: List[int] = Field(..., description="Cells per axis")
    segments: Dict[str, List[Union[str, SegmentPieceConfig]]] = Field(
        default_factory=dict, description="Named boundary segments"
    )

    @model_validator(mode="after")
    def _shape(self) -> "MeshConfig":
        if len(self.lengths) != self.dim or len(self.counts) != self.dim:
            raise ValueError(f"lengths and counts need {self.dim} entries each")
        if any(x <= 0.0 for x in self.lengths):
            raise ValueError("lengths must be positive")
        if any(c < 2 for c in self.counts):
            raise ValueError("counts must be at least 2")
        return self


class ModelConfig(_Section):
    alpha_n: float
    alpha_p: float
    alpha_d: float
    debye_length: float = Field(1.0, description="Scaled Debye length lambda")
    doping: ProfileSpec = Field(default_factory=lambda: ConstantProfile(value=0.0))
    cutoff_k: Optional[float] = Field(None, description="Cutoff level k >= 2, null for the plain scheme")

    @field_validator("alpha_n", "alpha_p", "alpha_d")
    @classmethod
    def _exponent(cls, value: float, info: ValidationInfo) -> float:
        if not value > 1.0:
            raise ValueError(f"{info.field_name} must exceed 1")
        return value

    @field_validator("debye_length")
    @classmethod
    def _debye(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError("debye_length must be positive")
        return value

    @field_validator("cutoff_k")
    @classmethod
    def _cutoff(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value >= 2.0:
            raise ValueError("cutoff_k must be at least 2")
        return value


class ContactConfig(_Section):
    n_d: Union[float, List[float]]
    p_d: Union[float, List[float]]
    v_d: Union[float, List[float]]


class BoundaryConfig(_Section):
    contacts: Dict[str, ContactConfig] = Field(default_factory=dict)
    gauge: bool = Field(False, description="Pin the mean potential (all-insulating boundaries)")


class InitialConfig(_Section):
    n: ProfileSpec
    p: ProfileSpec
    d: ProfileSpec


class StepperConfig(_Section):
    dt: float = 1e-3
    t_end: float = 0.1
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    max_damping_halvings: int = 30
    dt_min: float = 1e-8
    floor_epsilon: Optional[float] = None
    mobility: Literal["arithmetic", "upwind"] = "arithmetic"
    drift: bool = True
    jacobian: Literal["analytic", "finite-difference"] = "analytic"

    @field_validator("dt", "t_end", "newton_tol", "dt_min")
    @classmethod
    def _positive(cls, value: float, info: ValidationInfo) -> float:
        if not value > 0.0:
            raise ValueError(f"{info.field_name} must be positive")
        return value


class SweepConfig(_Section):
    schedule: List[Tuple[float, float]] = Field(
        ..., description="(time, V_D multiplier) breakpoints, linearly interpolated"
    )
    contact: Optional[str] = Field(None, description="Contact whose current traces the I-V loop")

    @field_validator("schedule")
    @classmethod
    def _increasing(cls, value: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        if len(value) < 2:
            raise ValueError("schedule needs at least two breakpoints")
        times = [t for t, _ in value]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("schedule times must increase strictly")
        return value

    def multiplier(self, t: float) -> float:
        times, values = zip(*self.schedule)
        return float(np.interp(t, times, values))


class OutputConfig(_Section):
    directory: str = "runs/scenario"
    record_every: int = Field(1, ge=1)
    snapshot_times: List[float] = Field(default_factory=list)
    lq_exponents: List[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    gradient_norm_exponent: float = 3.0

    @field_validator("lq_exponents")
    @classmethod
    def _exponents(cls, value: List[float]) -> List[float]:
        if any(not q >= 1.0 for q in value):
            raise ValueError("lq_exponents must be at least 1")
        return value


class MonitorConfig(_Section):
    enabled: bool
    tolerance: float = Field(..., ge=0.0)


class MonitorsConfig(_Section):
    energy_decay: MonitorConfig = Field(default_factory=lambda: MonitorConfig(enabled=False, tolerance=1e-10))
    d_mass: MonitorConfig = Field(default_factory=lambda: MonitorConfig(enabled=True, tolerance=1e-12))
    nonnegativity: MonitorConfig = Field(default_factory=lambda: MonitorConfig(enabled=True, tolerance=1e-10))
    gradient_flow: MonitorConfig = Field(default_factory=lambda: MonitorConfig(enabled=False, tolerance=1e-8))


class ConvergenceConfig(_Section):
    case: Literal["poisson-manufactured", "poisson-mixed", "porous-medium"]
    levels: int = Field(4, description="Number of refinement levels")
    base_cells: int = Field(16, ge=2)
    dim: Literal[1, 2] = 1
    t_end: float = Field(0.05, gt=0.0)
    dt: float = Field(1e-3, gt=0.0, description="Coarsest step, halved with each level")


class ScenarioConfig(_Section):
    name: str = "scenario"
    kind: Literal["relax", "sweep", "convergence", "insulated-energy-test"] = "relax"
    mesh: MeshConfig
    model: ModelConfig
    boundary: BoundaryConfig = Field(default_factory=BoundaryConfig)
    initial: InitialConfig
    stepper: StepperConfig = Field(default_factory=StepperConfig)
    sweep: Optional[SweepConfig] = None
    output: OutputConfig = Field(default_factory=OutputConfig)
    monitors: MonitorsConfig = Field(default_factory=MonitorsConfig)
    convergence: Optional[ConvergenceConfig] = None

    @model_validator(mode="after")
    def _kind_sections(self) -> "ScenarioConfig":
        if self.kind == "sweep" and self.sweep is None:
            raise ValueError("kind 'sweep' requires a sweep section")
        if self.kind == "convergence" and self.convergence is None:
            raise ValueError("kind 'convergence' requires a convergence section")
        if self.kind == "insulated-energy-test" and (self.boundary.contacts or not self.boundary.gauge):
            raise ValueError("kind 'insulated-energy-test' requires no contacts and boundary.gauge = true")
        if self.sweep is not None and self.sweep.contact is not None:
            if self.sweep.contact not in self.boundary.contacts:
                raise ValueError(f"sweep.contact '{self.sweep.contact}' is not a contact")
        return self


# ---------------------------------------------------------------- loading


def _format_location(loc) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_config(data: dict, source: str = "<config>") -> ScenarioConfig:
    """
    Validate a decoded config document.

    Raises:
        ConfigurationError: Naming the dotted key path of the first problem
    """
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = _format_location(first["loc"])
        raise ConfigurationError(f"{source}: {key}: {first['msg']}", key=key) from exc


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Load and validate a JSON scenario file.

    Args:
        path: Scenario file

    Returns:
        The validated config with all defaults filled

    Raises:
        ConfigurationError: Missing file, JSON syntax error (with line and
            column), or a validation error naming the offending key
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}", key=None)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", key=None) from exc
    return parse_config(data, source=str(path))


def dump_config(config: ScenarioConfig) -> str:
    """Validated config as JSON with every default written out."""
    return config.model_dump_json(indent=2)


def resolve_output_dir(config: ScenarioConfig) -> Path:
    """Output directory, prefixed by MEMDRIFT_OUTPUT_ROOT when relative."""
    directory = Path(config.output.directory)
    root = os.getenv("MEMDRIFT_OUTPUT_ROOT")
    if root and not directory.is_absolute():
        directory = Path(root) / directory
    return directory


# --------------------------------------------------------------- building


@dataclass
class Problem:
    """Solver-ready objects built from a scenario."""

    mesh: Mesh
    params: ModelParams
    bc: BoundarySpec
    state: State
    stepper: TimeStepper


def build_mesh(section: MeshConfig) -> Mesh:
    layout = {
        name: [
            piece if isinstance(piece, str) else SegmentPiece(piece.side, piece.lower, piece.upper)
            for piece in pieces
        ]
        for name, pieces in section.segments.items()
    }
    return build_uniform_mesh(section.dim, section.lengths, section.counts, layout or None)


def build_boundary(section: BoundaryConfig, bias: float = 1.0) -> BoundarySpec:
    contacts = {
        name: ContactData(
            n_d=np.asarray(c.n_d, dtype=float) if isinstance(c.n_d, list) else c.n_d,
            p_d=np.asarray(c.p_d, dtype=float) if isinstance(c.p_d, list) else c.p_d,
            v_d=np.asarray(c.v_d, dtype=float) if isinstance(c.v_d, list) else c.v_d,
        )
        for name, c in section.contacts.items()
    }
    return BoundarySpec(contacts=contacts, gauge=section.gauge, bias=bias)


def build_stepper(section: StepperConfig) -> TimeStepper:
    return TimeStepper(
        dt=section.dt,
        newton_tol=section.newton_tol,
        newton_max_iter=section.newton_max_iter,
        max_damping_halvings=section.max_damping_halvings,
        dt_min=section.dt_min,
        floor_epsilon=section.floor_epsilon,
        mobility=section.mobility,
        drift=section.drift,
        jacobian=section.jacobian,
    )


def build_problem(config: ScenarioConfig) -> Problem:
    """
    Mesh, parameters, boundary data, initial state and stepper of a scenario.

    Raises:
        ConfigurationError: Unknown segments, bad mesh layout
        DataError: Negative initial or contact densities, wrong table sizes
        ParameterError: Parameters outside the solver range
    """
    mesh = build_mesh(config.mesh)
    params = ModelParams(
        alpha_n=config.model.alpha_n,
        alpha_p=config.model.alpha_p,
        alpha_d=config.model.alpha_d,
        debye_length=config.model.debye_length,
        doping=config.model.doping.evaluate(mesh),
        cutoff_k=config.model.cutoff_k,
    )
    bias = config.sweep.multiplier(0.0) if config.sweep is not None else 1.0
    bc = build_boundary(config.boundary, bias)
    bc.validate(mesh)
    state = initial_state(
        mesh,
        config.initial.n.evaluate(mesh),
        config.initial.p.evaluate(mesh),
        config.initial.d.evaluate(mesh),
    )
    return Problem(mesh=mesh, params=params, bc=bc, state=state, stepper=build_stepper(config.stepper))
