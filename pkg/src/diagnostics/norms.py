"""Cell-based norms and growth checks for recorded time series."""

import math
from typing import Sequence

import numpy as np

from src.model.errors import DataError, ParameterError
from src.model.mesh import Mesh


def lq_norm(mesh: Mesh, field: np.ndarray, q: float) -> float:
    """
    (sum of vol * |field|^q)^(1/q), or max |field| for q = inf.

    Raises:
        ParameterError: If q < 1
    """
    if not q >= 1.0:
        raise ParameterError(f"Norm exponent q must be at least 1, got {q}", name="q", value=q)
    values = np.abs(np.asarray(field, dtype=float))
    if values.shape != (mesh.num_cells,):
        raise DataError("Field does not match the mesh", field="field")
    if math.isinf(q):
        return float(np.max(values))
    return float(np.sum(mesh.volumes * values ** q) ** (1.0 / q))


def bounded_growth(series: Sequence[float], transient_fraction: float = 0.1, factor: float = 2.0) -> bool:
    """
    True when no value exceeds ``factor`` times the peak of the initial transient.

    The transient is the leading ``transient_fraction`` of the samples (at
    least one sample).
    """
    values = np.asarray(series, dtype=float)
    if values.size == 0:
        raise DataError("Empty series", field="series")
    if not 0.0 < transient_fraction <= 1.0:
        raise ParameterError("transient_fraction must lie in (0, 1]", name="transient_fraction", value=transient_fraction)
    if not np.all(np.isfinite(values)):
        return False
    head = max(1, int(math.ceil(transient_fraction * values.size)))
    peak = float(np.max(np.abs(values[:head])))
    return bool(np.max(np.abs(values)) <= factor * peak)
