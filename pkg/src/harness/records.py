"""
Diagnostics records and result files

One ``DiagnosticsRecord`` per recorded step, written as CSV rows with a
fixed column order and 17 significant digits. Snapshots are per-cell tables
of the cell centres and the four fields.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.cutoff.functions import CutoffFamily
from src.diagnostics.energy import BoundaryLifts, dissipation, free_energy
from src.diagnostics.norms import lq_norm
from src.model.mesh import Mesh
from src.model.state import SPECIES, State
from src.poisson.solver import elliptic_norm_pair
from src.transport.stepper import DriftDiffusionSolver, species_masses


def format_value(value: float) -> str:
    return format(float(value), ".17g")


def _norm_label(q: float) -> str:
    return "inf" if np.isinf(q) else format(q, "g")


@dataclass
class DiagnosticsRecord:
    time: float
    bias: float
    energy_total: float
    energy_n: float
    energy_p: float
    energy_d: float
    energy_electric: float
    energy_cross: float
    dissipation: float
    mass_n: float
    mass_p: float
    mass_d: float
    min_n: float
    max_n: float
    min_p: float
    max_p: float
    min_d: float
    max_d: float
    grad_v_norm: float
    source_norm: float
    newton_iterations: int
    norms: Dict[str, float] = field(default_factory=dict)
    currents: Dict[str, float] = field(default_factory=dict)

    FIXED = (
        "time",
        "bias",
        "energy_total",
        "energy_n",
        "energy_p",
        "energy_d",
        "energy_electric",
        "energy_cross",
        "dissipation",
        "mass_n",
        "mass_p",
        "mass_d",
        "min_n",
        "max_n",
        "min_p",
        "max_p",
        "min_d",
        "max_d",
    )

    def row(self) -> Dict[str, str]:
        values = {name: format_value(getattr(self, name)) for name in self.FIXED}
        values.update({name: format_value(v) for name, v in self.norms.items()})
        values["grad_v_norm"] = format_value(self.grad_v_norm)
        values["source_norm"] = format_value(self.source_norm)
        values.update({f"current_{name}": format_value(v) for name, v in self.currents.items()})
        values["newton_iterations"] = str(self.newton_iterations)
        return values


def record_columns(lq_exponents: Sequence[float], contacts: Sequence[str]) -> List[str]:
    columns = list(DiagnosticsRecord.FIXED)
    columns += [f"norm_{s}_L{_norm_label(q)}" for s in SPECIES for q in lq_exponents]
    columns.append("grad_v_norm")
    columns.append("source_norm")
    columns += [f"current_{name}" for name in contacts]
    columns.append("newton_iterations")
    return columns


def collect_record(
    solver: DriftDiffusionSolver,
    state: State,
    lifts: BoundaryLifts,
    lq_exponents: Sequence[float],
    gradient_exponent: float = 3.0,
    newton_iterations: int = 0,
) -> DiagnosticsRecord:
    """Evaluate every diagnostic of one state, which must carry its potential."""
    mesh, params, bc = solver.mesh, solver.params, solver.bc
    energy = free_energy(mesh, bc, params, state, lifts=lifts)
    masses = species_masses(mesh, state)
    cutoff: Optional[CutoffFamily] = solver.cutoff
    norms = {
        f"norm_{s}_L{_norm_label(q)}": lq_norm(mesh, state.species(s), q)
        for s in SPECIES
        for q in lq_exponents
    }
    grad_v_norm, source_norm = elliptic_norm_pair(
        mesh, bc, params, state.n, state.p, state.d, state.v, gradient_exponent
    )
    return DiagnosticsRecord(
        time=state.time,
        bias=bc.bias,
        energy_total=energy.total,
        energy_n=energy.internal_n,
        energy_p=energy.internal_p,
        energy_d=energy.internal_d,
        energy_electric=energy.electric,
        energy_cross=energy.cross_term,
        dissipation=dissipation(
            mesh,
            params,
            state,
            cutoff=cutoff,
            bc=bc,
            mobility=solver.stepper.mobility,
            floor=solver.floor,
            drift=solver.stepper.drift,
        ),
        mass_n=masses["n"],
        mass_p=masses["p"],
        mass_d=masses["d"],
        min_n=float(state.n.min()),
        max_n=float(state.n.max()),
        min_p=float(state.p.min()),
        max_p=float(state.p.max()),
        min_d=float(state.d.min()),
        max_d=float(state.d.max()),
        grad_v_norm=grad_v_norm,
        source_norm=source_norm,
        newton_iterations=newton_iterations,
        norms=norms,
        currents={name: solver.contact_current(state, name) for name in bc.contacts},
    )


def write_diagnostics_csv(path: Path, records: Sequence[DiagnosticsRecord], columns: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(record.row())


def read_diagnostics_csv(path: Path) -> Dict[str, np.ndarray]:
    """Columns of a diagnostics file as float arrays."""
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    if not rows:
        return {}
    return {name: np.array([float(row[name]) for row in rows]) for name in rows[0]}


def snapshot_name(index: int, time: float) -> str:
    return f"snapshot_{index:04d}_t{time:.6e}.csv"


def write_snapshot(path: Path, mesh: Mesh, state: State) -> None:
    """Per-cell table: centre coordinates, n, p, d and v."""
    axes = ["x", "y"][: mesh.dim]
    v = state.v if state.v is not None else np.full(mesh.num_cells, np.nan)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(axes + ["n", "p", "d", "v"])
        for i in range(mesh.num_cells):
            values = list(mesh.centers[i]) + [state.n[i], state.p[i], state.d[i], v[i]]
            writer.writerow([format_value(x) for x in values])
