"""Data model: meshes, parameters, fields, boundary data and errors."""

from .errors import (
    ConfigurationError,
    DataError,
    DomainError,
    MemDriftError,
    NumericalError,
    ParameterError,
    StepFailure,
)
from .mesh import Mesh, SegmentPiece, build_uniform_mesh
from .state import SPECIES, BoundarySpec, ContactData, ModelParams, State, initial_state

__all__ = [
    'ConfigurationError',
    'DataError',
    'DomainError',
    'MemDriftError',
    'NumericalError',
    'ParameterError',
    'StepFailure',
    'Mesh',
    'SegmentPiece',
    'build_uniform_mesh',
    'SPECIES',
    'BoundarySpec',
    'ContactData',
    'ModelParams',
    'State',
    'initial_state',
]
