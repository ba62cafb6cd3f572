"""Scenario configuration, execution, monitors and result files."""

from .config import (
    Problem,
    ScenarioConfig,
    build_problem,
    dump_config,
    load_config,
    parse_config,
    resolve_output_dir,
)
from .convergence import ConvergenceTable, convergence_study, poisson_convergence, porous_medium_convergence
from .experiments import RelativeEntropyResult, relative_entropy_experiment
from .monitors import InvariantMonitor, MonitorViolationError
from .records import DiagnosticsRecord, read_diagnostics_csv, record_columns
from .runner import RunResult, hysteresis_area, run_many, run_scenario
from .tables import exponent_rows, exponent_table

__all__ = [
    'Problem',
    'ScenarioConfig',
    'build_problem',
    'dump_config',
    'load_config',
    'parse_config',
    'resolve_output_dir',
    'ConvergenceTable',
    'convergence_study',
    'poisson_convergence',
    'porous_medium_convergence',
    'RelativeEntropyResult',
    'relative_entropy_experiment',
    'InvariantMonitor',
    'MonitorViolationError',
    'DiagnosticsRecord',
    'read_diagnostics_csv',
    'record_columns',
    'RunResult',
    'hysteresis_area',
    'run_many',
    'run_scenario',
    'exponent_rows',
    'exponent_table',
]
