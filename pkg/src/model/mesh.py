"""
Uniform tensor meshes

Cell-centred finite-volume meshes on boxes in one or two dimensions. Cells
are indexed in C order over (i_x, i_y), interior faces join axis-adjacent
cells, and every boundary face belongs to exactly one named segment.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigurationError


SIDES_1D = ("left", "right")
SIDES_2D = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class SegmentPiece:
    """Part of a box side, optionally restricted to a tangential interval."""

    side: str
    lower: Optional[float] = None
    upper: Optional[float] = None


SegmentLayout = Dict[str, Sequence[Union[str, SegmentPiece]]]


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Cell-centred uniform mesh.

    Interior faces are stored as cell pairs ``edge_cells[e] = (left, right)``
    with ``left < right``; boundary faces carry the half-cell distance from
    the cell centre to the face centre.
    """

    dim: int
    lengths: Tuple[float, ...]
    counts: Tuple[int, ...]
    spacing: Tuple[float, ...]
    centers: np.ndarray
    volumes: np.ndarray
    edge_cells: np.ndarray
    edge_area: np.ndarray
    edge_dist: np.ndarray
    edge_axis: np.ndarray
    bface_cell: np.ndarray
    bface_area: np.ndarray
    bface_dist: np.ndarray
    bface_center: np.ndarray
    bface_side: Tuple[str, ...]
    bface_segment: np.ndarray
    segment_names: Tuple[str, ...]
    _segment_index: Dict[str, int] = field(default_factory=dict, repr=False)

    @property
    def num_cells(self) -> int:
        return int(self.volumes.size)

    @property
    def num_edges(self) -> int:
        return int(self.edge_area.size)

    @property
    def num_boundary_faces(self) -> int:
        return int(self.bface_area.size)

    @property
    def measure(self) -> float:
        return float(np.prod(self.lengths))

    def segment_faces(self, name: str) -> np.ndarray:
        """Boundary-face indices of a named segment, in ascending order."""
        if name not in self._segment_index:
            raise ConfigurationError(
                f"Unknown boundary segment '{name}'. Available: {list(self.segment_names)}",
                key=name,
            )
        return np.flatnonzero(self.bface_segment == self._segment_index[name])

    def has_segment(self, name: str) -> bool:
        return name in self._segment_index

    def cell_index(self, *ijk: int) -> int:
        return int(np.ravel_multi_index(ijk, self.counts))


def _axis_centres(length: float, count: int) -> np.ndarray:
    h = length / count
    return (np.arange(count) + 0.5) * h


def build_uniform_mesh(
    dim: int,
    lengths: Sequence[float],
    counts: Sequence[int],
    segment_layout: Optional[SegmentLayout] = None,
) -> Mesh:
    """
    Build a uniform mesh on ``[0, L_x]`` or ``[0, L_x] x [0, L_y]``.

    Args:
        dim: 1 or 2
        lengths: Extent per axis
        counts: Cells per axis, at least 2 each
        segment_layout: Mapping from segment name to the sides (or
            ``SegmentPiece`` parts of sides) it covers. Faces left unclaimed
            form a segment named after their side.

    Returns:
        The mesh

    Raises:
        ConfigurationError: For bad sizes, unknown sides or faces claimed twice
    """
    if dim not in (1, 2):
        raise ConfigurationError(f"Mesh dimension must be 1 or 2, got {dim}", key="dim")
    lengths = tuple(float(x) for x in lengths)
    counts = tuple(int(c) for c in counts)
    if len(lengths) != dim or len(counts) != dim:
        raise ConfigurationError(
            f"Expected {dim} lengths and counts, got {len(lengths)} and {len(counts)}",
            key="counts",
        )
    for axis, (length, count) in enumerate(zip(lengths, counts)):
        if not np.isfinite(length) or length <= 0.0:
            raise ConfigurationError(f"Length on axis {axis} must be positive, got {length}", key="lengths")
        if count < 2:
            raise ConfigurationError(f"Cell count on axis {axis} must be at least 2, got {count}", key="counts")

    spacing = tuple(length / count for length, count in zip(lengths, counts))
    axes = [_axis_centres(length, count) for length, count in zip(lengths, counts)]
    grids = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([g.ravel() for g in grids], axis=1)
    num_cells = int(np.prod(counts))
    volumes = np.full(num_cells, float(np.prod(spacing)))
    index = np.arange(num_cells).reshape(counts)

    edge_cells: List[np.ndarray] = []
    edge_area: List[np.ndarray] = []
    edge_dist: List[np.ndarray] = []
    edge_axis: List[np.ndarray] = []
    for axis in range(dim):
        lo = np.take(index, np.arange(counts[axis] - 1), axis=axis).ravel()
        hi = np.take(index, np.arange(1, counts[axis]), axis=axis).ravel()
        area = float(np.prod([spacing[a] for a in range(dim) if a != axis]))
        edge_cells.append(np.stack([lo, hi], axis=1))
        edge_area.append(np.full(lo.size, area))
        edge_dist.append(np.full(lo.size, spacing[axis]))
        edge_axis.append(np.full(lo.size, axis))

    sides = SIDES_1D if dim == 1 else SIDES_2D
    bcell: List[np.ndarray] = []
    barea: List[np.ndarray] = []
    bdist: List[np.ndarray] = []
    bcenter: List[np.ndarray] = []
    bside: List[str] = []
    for side in sides:
        axis = 0 if side in ("left", "right") else 1
        at_end = side in ("right", "top")
        layer = counts[axis] - 1 if at_end else 0
        cells = np.take(index, layer, axis=axis).ravel()
        area = float(np.prod([spacing[a] for a in range(dim) if a != axis]))
        face_centre = centers[cells].copy()
        face_centre[:, axis] = lengths[axis] if at_end else 0.0
        bcell.append(cells)
        barea.append(np.full(cells.size, area))
        bdist.append(np.full(cells.size, 0.5 * spacing[axis]))
        bcenter.append(face_centre)
        bside.extend([side] * cells.size)

    bface_center = np.concatenate(bcenter, axis=0)
    bface_segment, segment_names = _assign_segments(dim, sides, bside, bface_center, segment_layout or {})

    return Mesh(
        dim=dim,
        lengths=lengths,
        counts=counts,
        spacing=spacing,
        centers=centers,
        volumes=volumes,
        edge_cells=np.concatenate(edge_cells, axis=0),
        edge_area=np.concatenate(edge_area),
        edge_dist=np.concatenate(edge_dist),
        edge_axis=np.concatenate(edge_axis),
        bface_cell=np.concatenate(bcell),
        bface_area=np.concatenate(barea),
        bface_dist=np.concatenate(bdist),
        bface_center=bface_center,
        bface_side=tuple(bside),
        bface_segment=bface_segment,
        segment_names=segment_names,
        _segment_index={name: i for i, name in enumerate(segment_names)},
    )


def _assign_segments(
    dim: int,
    sides: Tuple[str, ...],
    bside: List[str],
    bface_center: np.ndarray,
    layout: SegmentLayout,
) -> Tuple[np.ndarray, Tuple[str, ...]]:
    side_array = np.array(bside)
    owner = np.full(side_array.size, -1, dtype=int)
    names: List[str] = []

    for name, pieces in layout.items():
        if isinstance(pieces, (str, SegmentPiece)):
            pieces = [pieces]
        seg_id = len(names)
        names.append(name)
        for piece in pieces:
            if isinstance(piece, str):
                piece = SegmentPiece(piece)
            if piece.side not in sides:
                raise ConfigurationError(
                    f"Segment '{name}' refers to unknown side '{piece.side}'. Sides: {list(sides)}",
                    key=name,
                )
            mask = side_array == piece.side
            if piece.lower is not None or piece.upper is not None:
                if dim == 1:
                    raise ConfigurationError(
                        f"Segment '{name}': 1D sides are single faces and take no interval",
                        key=name,
                    )
                tangential = 1 if piece.side in ("left", "right") else 0
                coord = bface_center[:, tangential]
                lower = -np.inf if piece.lower is None else piece.lower
                upper = np.inf if piece.upper is None else piece.upper
                mask &= (coord >= lower) & (coord <= upper)
            clash = mask & (owner >= 0) & (owner != seg_id)
            if np.any(clash):
                other = names[owner[np.flatnonzero(clash)[0]]]
                raise ConfigurationError(
                    f"Boundary face claimed by both '{other}' and '{name}'",
                    key=name,
                )
            owner[mask] = seg_id
        if not np.any(owner == seg_id):
            raise ConfigurationError(f"Segment '{name}' covers no boundary face", key=name)

    for side in sides:
        free = (owner < 0) & (side_array == side)
        if np.any(free):
            if side in names:
                raise ConfigurationError(
                    f"Segment '{side}' leaves faces of its own side unassigned",
                    key=side,
                )
            owner[free] = len(names)
            names.append(side)

    return owner, tuple(names)
