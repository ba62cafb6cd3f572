"""
Initial and doping profiles

Named presets that scenario files use for per-cell fields. Each preset is a
pydantic model tagged by ``kind`` and knows how to sample itself at the cell
centres of a mesh.
"""

from typing import Annotated, List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from src.diagnostics.oracles import barenblatt_profile
from src.model.errors import DataError
from src.model.mesh import Mesh


class _Profile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        raise NotImplementedError

    @staticmethod
    def _coordinate(mesh: Mesh, axis: int) -> np.ndarray:
        if axis >= mesh.dim:
            raise DataError(f"Profile axis {axis} does not exist on a {mesh.dim}D mesh", field="axis")
        return mesh.centers[:, axis]


class ConstantProfile(_Profile):
    kind: Literal["constant"] = "constant"
    value: float = Field(..., description="Value in every cell")

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        return np.full(mesh.num_cells, self.value)


class LinearProfile(_Profile):
    kind: Literal["linear"] = "linear"
    start: float = Field(..., description="Value at coordinate 0")
    end: float = Field(..., description="Value at the far end of the axis")
    axis: int = Field(0, ge=0, le=1)

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        x = self._coordinate(mesh, self.axis) / mesh.lengths[self.axis]
        return self.start + (self.end - self.start) * x


class StepProfile(_Profile):
    kind: Literal["step"] = "step"
    left: float
    right: float
    position: float = Field(..., description="Jump location along the axis")
    axis: int = Field(0, ge=0, le=1)

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        x = self._coordinate(mesh, self.axis)
        return np.where(x < self.position, self.left, self.right)


class GaussianProfile(_Profile):
    kind: Literal["gaussian"] = "gaussian"
    amplitude: float
    center: List[float] = Field(..., description="Peak location, one coordinate per axis")
    width: float = Field(..., description="Standard deviation")
    baseline: float = 0.0

    @field_validator("width")
    @classmethod
    def _positive_width(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError("width must be positive")
        return value

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        if len(self.center) != mesh.dim:
            raise DataError(f"Gaussian center needs {mesh.dim} coordinates", field="center")
        r2 = np.sum((mesh.centers - np.asarray(self.center)) ** 2, axis=1)
        return self.baseline + self.amplitude * np.exp(-0.5 * r2 / self.width ** 2)


class BumpProfile(_Profile):
    """Smooth sin^2 bump on [lower, upper] above a baseline."""

    kind: Literal["bump"] = "bump"
    baseline: float = 0.0
    amplitude: float
    lower: float
    upper: float
    axis: int = Field(0, ge=0, le=1)

    @field_validator("upper")
    @classmethod
    def _ordered(cls, value: float, info: ValidationInfo) -> float:
        if "lower" in info.data and not value > info.data["lower"]:
            raise ValueError("upper must exceed lower")
        return value

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        x = self._coordinate(mesh, self.axis)
        inside = (x >= self.lower) & (x <= self.upper)
        phase = np.pi * (x - self.lower) / (self.upper - self.lower)
        return self.baseline + np.where(inside, self.amplitude * np.sin(phase) ** 2, 0.0)


class BarenblattProfile(_Profile):
    kind: Literal["barenblatt"] = "barenblatt"
    alpha: float = Field(..., gt=1.0)
    c: float = Field(..., gt=0.0, description="Height constant of the self-similar profile")
    t0: float = Field(..., gt=0.0, description="Self-similar time the profile is taken at")
    center: float = 0.0

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        return barenblatt_profile(mesh.centers[:, 0], self.t0, self.alpha, self.c, self.center)


class TableProfile(_Profile):
    kind: Literal["table"] = "table"
    values: List[float] = Field(..., description="One value per cell, C order")

    def evaluate(self, mesh: Mesh) -> np.ndarray:
        if len(self.values) != mesh.num_cells:
            raise DataError(
                f"Table has {len(self.values)} values for {mesh.num_cells} cells",
                field="values",
            )
        return np.asarray(self.values, dtype=float)


ProfileSpec = Annotated[
    Union[
        ConstantProfile,
        LinearProfile,
        StepProfile,
        GaussianProfile,
        BumpProfile,
        BarenblattProfile,
        TableProfile,
    ],
    Field(discriminator="kind"),
]
