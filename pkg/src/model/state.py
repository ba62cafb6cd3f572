"""
Model parameters, fields and boundary data

The data model shared by the solver, the diagnostics and the harness:
physical exponents and Debye length, the cell-averaged state (n, p, D, V),
and per-segment Ohmic contact data.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from .errors import ConfigurationError, DataError, ParameterError
from .mesh import Mesh


FaceData = Union[float, np.ndarray]
Initializer = Union[float, np.ndarray, Callable[..., np.ndarray]]

SPECIES = ("n", "p", "d")


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Exponents, scaled Debye length, doping and optional cutoff level."""

    alpha_n: float
    alpha_p: float
    alpha_d: float
    debye_length: float = 1.0
    doping: Union[float, np.ndarray] = 0.0
    cutoff_k: Optional[float] = None

    def __post_init__(self):
        for name in ("alpha_n", "alpha_p", "alpha_d"):
            value = getattr(self, name)
            if not value > 1.0:
                raise ParameterError(f"{name} must exceed 1, got {value}", name=name, value=value)
        if not self.debye_length > 0.0:
            raise ParameterError(
                f"debye_length must be positive, got {self.debye_length}",
                name="debye_length",
                value=self.debye_length,
            )
        if self.cutoff_k is not None and not self.cutoff_k >= 2.0:
            raise ParameterError(
                f"cutoff_k must be at least 2, got {self.cutoff_k}",
                name="cutoff_k",
                value=self.cutoff_k,
            )

    def alpha(self, species: str) -> float:
        return {"n": self.alpha_n, "p": self.alpha_p, "d": self.alpha_d}[species]

    def doping_field(self, mesh: Mesh) -> np.ndarray:
        doping = np.asarray(self.doping, dtype=float)
        if doping.ndim == 0:
            return np.full(mesh.num_cells, float(doping))
        if doping.shape != (mesh.num_cells,):
            raise DataError(
                f"doping has {doping.size} values for {mesh.num_cells} cells",
                field="doping",
            )
        return doping

    def validate_for_solver(self) -> None:
        """Solver runs need every exponent in (1, 2]."""
        for name in ("alpha_n", "alpha_p", "alpha_d"):
            value = getattr(self, name)
            if value > 2.0:
                raise ParameterError(
                    f"{name} must not exceed 2 for solver runs, got {value}",
                    name=name,
                    value=value,
                )


@dataclass(frozen=True, eq=False)
class State:
    """Cell-averaged fields at one time level. ``v`` is None until a Poisson solve."""

    time: float
    n: np.ndarray
    p: np.ndarray
    d: np.ndarray
    v: Optional[np.ndarray] = None

    @property
    def num_cells(self) -> int:
        return int(self.n.size)

    def species(self, name: str) -> np.ndarray:
        return {"n": self.n, "p": self.p, "d": self.d}[name]

    def with_potential(self, v: np.ndarray) -> "State":
        return replace(self, v=np.asarray(v, dtype=float))

    def copy(self) -> "State":
        return State(
            time=self.time,
            n=self.n.copy(),
            p=self.p.copy(),
            d=self.d.copy(),
            v=None if self.v is None else self.v.copy(),
        )


@dataclass(frozen=True)
class ContactData:
    """Dirichlet data of one Ohmic contact: scalars or one value per face."""

    n_d: FaceData
    p_d: FaceData
    v_d: FaceData


@dataclass(frozen=True)
class BoundarySpec:
    """
    Boundary conditions by segment.

    Segments named in ``contacts`` are Ohmic contacts carrying Dirichlet data
    for n, p and V. Every other segment is insulating (zero flux for all
    unknowns), and the vacancy density never has boundary data. ``bias``
    multiplies V_D and drives voltage sweeps. ``gauge`` pins the mean of V
    for all-insulating test configurations.
    """

    contacts: Dict[str, ContactData] = field(default_factory=dict)
    gauge: bool = False
    bias: float = 1.0

    def scaled(self, multiplier: float) -> "BoundarySpec":
        return replace(self, bias=float(multiplier))

    def validate(self, mesh: Mesh) -> None:
        """
        Check segment names, face counts and signs against a mesh.

        Raises:
            ConfigurationError: Unknown segments or an underdetermined potential
            DataError: Negative contact densities or wrong per-face lengths
        """
        for name, contact in self.contacts.items():
            faces = mesh.segment_faces(name)
            for label in ("n_d", "p_d", "v_d"):
                values = np.asarray(getattr(contact, label), dtype=float)
                if values.ndim > 0 and values.shape != (faces.size,):
                    raise DataError(
                        f"Contact '{name}': {label} has {values.size} values for {faces.size} faces",
                        field=label,
                    )
                if label != "v_d" and np.any(values < 0.0):
                    raise DataError(f"Contact '{name}': {label} must be nonnegative", field=label)
        if not self.contacts and not self.gauge:
            raise ConfigurationError(
                "Poisson problem is singular: no contact segment and gauge mode is off",
                key="gauge",
            )
        if self.contacts and self.gauge:
            raise ConfigurationError(
                "Gauge mode is only for all-insulating boundaries; remove the contacts or the gauge",
                key="gauge",
            )

    def dirichlet_faces(self, mesh: Mesh) -> np.ndarray:
        """Indices of all contact faces, in ascending order."""
        if not self.contacts:
            return np.zeros(0, dtype=int)
        faces = np.concatenate([mesh.segment_faces(name) for name in self.contacts])
        return np.sort(faces)

    def face_values(self, mesh: Mesh) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(n_D, p_D, bias * V_D) on the faces returned by ``dirichlet_faces``."""
        faces = self.dirichlet_faces(mesh)
        slot = {int(f): i for i, f in enumerate(faces)}
        n_d = np.zeros(faces.size)
        p_d = np.zeros(faces.size)
        v_d = np.zeros(faces.size)
        for name, contact in self.contacts.items():
            idx = np.array([slot[int(f)] for f in mesh.segment_faces(name)], dtype=int)
            n_d[idx] = contact.n_d
            p_d[idx] = contact.p_d
            v_d[idx] = contact.v_d
        return n_d, p_d, self.bias * v_d


def _sample(mesh: Mesh, init: Initializer, label: str) -> np.ndarray:
    if callable(init):
        values = np.asarray(init(*mesh.centers.T), dtype=float)
        values = np.broadcast_to(values, (mesh.num_cells,)).copy()
    else:
        values = np.asarray(init, dtype=float)
        if values.ndim == 0:
            values = np.full(mesh.num_cells, float(values))
        elif values.shape != (mesh.num_cells,):
            raise DataError(
                f"Initial {label} has {values.size} values for {mesh.num_cells} cells",
                field=label,
            )
        else:
            values = values.copy()
    if not np.all(np.isfinite(values)):
        raise DataError(f"Initial {label} contains non-finite values", field=label)
    negative = np.flatnonzero(values < 0.0)
    if negative.size:
        i = int(negative[0])
        raise DataError(
            f"Initial {label} is negative in cell {i} ({values[i]})",
            field=label,
            index=i,
        )
    return values


def initial_state(mesh: Mesh, n0: Initializer, p0: Initializer, d0: Initializer) -> State:
    """
    Sample initial densities at cell centres.

    Args:
        mesh: The mesh
        n0, p0, d0: A scalar, a per-cell array, or a callable ``f(x)`` /
            ``f(x, y)`` evaluated at cell centres

    Raises:
        DataError: If any sampled value is negative or the shape is wrong
    """
    return State(
        time=0.0,
        n=_sample(mesh, n0, "n"),
        p=_sample(mesh, p0, "p"),
        d=_sample(mesh, d0, "d"),
        v=None,
    )
