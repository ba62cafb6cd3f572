"""
Scenario runner

Executes relaxation, sweep and insulated energy-test scenarios step by step,
records diagnostics, runs the invariant monitors and writes the result
files of one output directory:

    config.json          validated config with defaults
    diagnostics.csv      one row per recorded step
    snapshot_*.csv       per-cell fields at the requested times
    summary.txt          status, monitor verdicts, hysteresis area

Independent scenarios can run in parallel processes via ``run_many``.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from src.diagnostics.energy import BoundaryLifts
from src.model.errors import ConfigurationError, DataError, NumericalError, StepFailure
from src.model.state import State
from src.transport.stepper import DriftDiffusionSolver, integrate_interval

from .config import ScenarioConfig, build_problem, dump_config, resolve_output_dir
from .monitors import InvariantMonitor
from .records import (
    DiagnosticsRecord,
    collect_record,
    record_columns,
    snapshot_name,
    write_diagnostics_csv,
    write_snapshot,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass
class RunResult:
    name: str
    exit_code: int
    output_dir: Path
    records: List[DiagnosticsRecord] = field(default_factory=list)
    monitors_passed: bool = True
    message: str = ""
    hysteresis: Optional[float] = None


def hysteresis_area(multipliers: Sequence[float], currents: Sequence[float]) -> float:
    """
    Signed area enclosed by the (V_D multiplier, current) polyline, trapezoid rule.

    Positive for a counter-clockwise loop in the (multiplier, current) plane.
    """
    x = np.asarray(multipliers, dtype=float)
    y = np.asarray(currents, dtype=float)
    if x.shape != y.shape:
        raise DataError("Multiplier and current series differ in length", field="currents")
    if x.size < 2:
        return 0.0
    return float(-0.5 * np.sum(np.diff(x) * (y[1:] + y[:-1])))


def time_grid(t_start: float, t_end: float, dt: float) -> np.ndarray:
    """Step times from ``t_start`` to ``t_end``; the last step is shortened to land on ``t_end``."""
    count = int(np.ceil((t_end - t_start) / dt - 1e-9))
    if count < 1:
        return np.zeros(0)
    times = t_start + dt * np.arange(1, count + 1)
    times[-1] = t_end
    return times


class _OutputLock:
    """Exclusive marker file that keeps two jobs out of one directory."""

    def __init__(self, directory: Path):
        self.path = directory / ".lock"

    def __enter__(self):
        try:
            with open(self.path, "x", encoding="utf-8") as handle:
                handle.write("locked\n")
        except FileExistsError as exc:
            raise ConfigurationError(
                f"Output directory {self.path.parent} is in use by another run", key="output.directory"
            ) from exc
        return self

    def __exit__(self, *exc_info):
        self.path.unlink(missing_ok=True)
        return False


def _scaled_lifts(base: BoundaryLifts, bias: float) -> BoundaryLifts:
    return BoundaryLifts(n=base.n, p=base.p, v=bias * base.v)


def _write_summary(
    path: Path,
    config: ScenarioConfig,
    status: str,
    exit_code: int,
    monitor: InvariantMonitor,
    records: Sequence[DiagnosticsRecord],
    hysteresis: Optional[float],
    message: str,
) -> None:
    lines = [
        f"scenario: {config.name}",
        f"kind: {config.kind}",
        f"status: {status}",
        f"exit_code: {exit_code}",
        f"recorded_steps: {len(records)}",
    ]
    if records:
        lines.append(f"final_time: {records[-1].time:.17g}")
        lines.append(f"final_energy: {records[-1].energy_total:.17g}")
    if hysteresis is not None:
        lines.append(f"hysteresis_area: {hysteresis:.17g}")
    if message:
        lines.append(f"message: {message}")
    lines.append("")
    lines.append(monitor.get_summary())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_scenario(config: ScenarioConfig, output_dir: Optional[Path] = None) -> RunResult:
    """
    Run one time-dependent scenario and write its result files.

    Args:
        config: Validated scenario (kind relax, sweep or insulated-energy-test)
        output_dir: Overrides ``config.output.directory``

    Returns:
        RunResult whose ``exit_code`` is 0 when every step succeeded and every
        enabled monitor passed, 3 otherwise

    Raises:
        ConfigurationError, DataError, ParameterError: Invalid scenario data
    """
    if config.kind == "convergence":
        raise ConfigurationError("Convergence scenarios run through convergence_study", key="kind")
    problem = build_problem(config)
    directory = Path(output_dir) if output_dir is not None else resolve_output_dir(config)
    directory.mkdir(parents=True, exist_ok=True)

    with _OutputLock(directory):
        (directory / "config.json").write_text(dump_config(config) + "\n", encoding="utf-8")
        return _execute(config, problem, directory)


def _execute(config: ScenarioConfig, problem, directory: Path) -> RunResult:
    mesh = problem.mesh
    solver = DriftDiffusionSolver(mesh, problem.bc, problem.params, problem.stepper)
    base_lifts = BoundaryLifts.build(mesh, problem.bc.scaled(1.0))
    lq = config.output.lq_exponents
    contacts = list(problem.bc.contacts)
    columns = record_columns(lq, contacts)
    monitor = InvariantMonitor(config.monitors)
    sweep = config.sweep
    follow_bias = None
    if sweep is not None:
        def follow_bias(t: float) -> None:
            solver.set_bias(sweep.multiplier(t))

    def record_of(state: State, iterations: int) -> DiagnosticsRecord:
        return collect_record(
            solver,
            state,
            _scaled_lifts(base_lifts, solver.bc.bias),
            lq,
            config.output.gradient_norm_exponent,
            iterations,
        )

    state = solver.with_potential(problem.state)
    current = record_of(state, 0)
    records = [current]
    monitor.observe_initial(current)
    pending_snapshots = sorted(config.output.snapshot_times)
    snapshot_index = 0
    if pending_snapshots and pending_snapshots[0] <= state.time:
        write_snapshot(directory / snapshot_name(snapshot_index, state.time), mesh, state)
        snapshot_index += 1
        pending_snapshots = [t for t in pending_snapshots if t > state.time]

    logger.info("Running scenario '%s' (%s) to t=%g", config.name, config.kind, config.stepper.t_end)
    status, exit_code, message = "completed", EXIT_OK, ""
    times = time_grid(state.time, config.stepper.t_end, config.stepper.dt)
    for step, t_next in enumerate(times, start=1):
        try:
            new_state, reports = integrate_interval(solver, state, float(t_next), follow_bias)
        except StepFailure as failure:
            status, exit_code, message = "step-failure", EXIT_NUMERICAL, str(failure)
            logger.error("Step %d failed: %s", step, failure)
            write_snapshot(directory / f"snapshot_last_good_t{state.time:.6e}.csv", mesh, state)
            break
        except NumericalError as failure:
            status, exit_code, message = "numerical-failure", EXIT_NUMERICAL, str(failure)
            logger.error("Step %d failed: %s", step, failure)
            write_snapshot(directory / f"snapshot_last_good_t{state.time:.6e}.csv", mesh, state)
            break

        previous, state = current, new_state
        current = record_of(state, sum(r.iterations for r in reports))
        monitor.observe(step, previous, current)
        if step % config.output.record_every == 0 or step == len(times) or sweep is not None:
            records.append(current)
            logger.info("t=%.6g energy=%.10e", state.time, current.energy_total)
        while pending_snapshots and pending_snapshots[0] <= state.time + 1e-12:
            write_snapshot(directory / snapshot_name(snapshot_index, state.time), mesh, state)
            snapshot_index += 1
            pending_snapshots.pop(0)

    if exit_code == EXIT_OK:
        write_snapshot(directory / snapshot_name(snapshot_index, state.time), mesh, state)
        if not monitor.passed:
            status, exit_code = "monitor-failure", EXIT_NUMERICAL

    hysteresis = None
    if sweep is not None and contacts:
        contact = sweep.contact or contacts[0]
        hysteresis = hysteresis_area([r.bias for r in records], [r.currents[contact] for r in records])

    write_diagnostics_csv(directory / "diagnostics.csv", records, columns)
    _write_summary(directory / "summary.txt", config, status, exit_code, monitor, records, hysteresis, message)
    return RunResult(
        name=config.name,
        exit_code=exit_code,
        output_dir=directory,
        records=records,
        monitors_passed=monitor.passed,
        message=message,
        hysteresis=hysteresis,
    )


def _run_job(payload: str) -> RunResult:
    return run_scenario(ScenarioConfig.model_validate_json(payload))


def run_many(configs: Sequence[ScenarioConfig], jobs: int = 1) -> List[RunResult]:
    """
    Run independent scenarios, optionally in a process pool.

    Raises:
        ConfigurationError: If two scenarios share an output directory
    """
    directories = [resolve_output_dir(c).resolve() for c in configs]
    if len(set(directories)) != len(directories):
        raise ConfigurationError("Concurrent scenarios need distinct output directories", key="output.directory")
    if jobs <= 1 or len(configs) <= 1:
        return [run_scenario(c) for c in configs]
    payloads = [dump_config(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_job, payloads))
