"""
Invariant monitors

Checks the structural invariants of a run step by step: free energy decay,
conservation of the vacancy mass, nonnegative densities and the discrete
gradient-flow inequality. Each enabled monitor validates every accepted
step; a violation raises ``MonitorViolationError``, which the runner
records without stopping the run so the summary can report every monitor.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

from .config import MonitorsConfig
from .records import DiagnosticsRecord

logger = logging.getLogger(__name__)

MONITORS = ("energy_decay", "d_mass", "nonnegativity", "gradient_flow")


class MonitorViolationError(Exception):
    """Raised when a step breaks an enabled invariant."""

    def __init__(self, message: str, monitor: str, step: int, value: float, limit: float):
        self.monitor = monitor
        self.step = step
        self.value = value
        self.limit = limit
        super().__init__(message)


@dataclass
class MonitorVerdict:
    name: str
    enabled: bool
    tolerance: float
    checks: int = 0
    violations: int = 0
    worst: float = float("-inf")
    first_violation: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


class InvariantMonitor:
    """
    Validates consecutive diagnostics records against the enabled invariants.

    The monitor is configured from the ``monitors`` section of a scenario
    and keeps one verdict per invariant.
    """

    def __init__(self, settings: MonitorsConfig):
        """
        Args:
            settings: Enabled flags and tolerances per monitor
        """
        self.settings = settings
        self.verdicts: Dict[str, MonitorVerdict] = {
            name: MonitorVerdict(
                name=name,
                enabled=getattr(settings, name).enabled,
                tolerance=getattr(settings, name).tolerance,
            )
            for name in MONITORS
        }
        self._d_mass_scale: Optional[float] = None

    def enabled_monitors(self) -> List[str]:
        return [name for name in MONITORS if self.verdicts[name].enabled]

    def _limit(self, name: str) -> float:
        return self.verdicts[name].tolerance

    def check(self, name: str, step: int, value: float, limit: float) -> bool:
        """
        Compare one measured quantity against its limit.

        Raises:
            MonitorViolationError: If ``value`` exceeds ``limit``
        """
        verdict = self.verdicts[name]
        verdict.checks += 1
        verdict.worst = max(verdict.worst, value)
        if not value <= limit:
            verdict.violations += 1
            if verdict.first_violation is None:
                verdict.first_violation = step
            raise MonitorViolationError(
                f"Monitor '{name}' violated at step {step}: {value:.3e} > {limit:.3e}",
                monitor=name,
                step=step,
                value=value,
                limit=limit,
            )
        return True

    def _measurements(self, previous: DiagnosticsRecord, current: DiagnosticsRecord) -> Dict[str, tuple]:
        if self._d_mass_scale is None:
            self._d_mass_scale = max(1.0, abs(previous.mass_d))
        dt = current.time - previous.time
        energy_change = current.energy_total - previous.energy_total
        scale = max(1.0, abs(previous.energy_total))
        lowest = min(current.min_n, current.min_p, current.min_d)
        return {
            "energy_decay": (energy_change, self._limit("energy_decay") * scale),
            "d_mass": (abs(current.mass_d - previous.mass_d), self._limit("d_mass") * self._d_mass_scale),
            "nonnegativity": (-lowest, self._limit("nonnegativity")),
            "gradient_flow": (energy_change + dt * current.dissipation, self._limit("gradient_flow") * dt),
        }

    def observe(self, step: int, previous: DiagnosticsRecord, current: DiagnosticsRecord) -> List[MonitorViolationError]:
        """Run every enabled monitor on one accepted step and collect the violations."""
        violations = []
        measured = self._measurements(previous, current)
        for name in self.enabled_monitors():
            value, limit = measured[name]
            try:
                self.check(name, step, value, limit)
            except MonitorViolationError as violation:
                logger.warning(str(violation))
                violations.append(violation)
        return violations

    def observe_initial(self, record: DiagnosticsRecord) -> List[MonitorViolationError]:
        """Only nonnegativity applies to the initial state."""
        if not self.verdicts["nonnegativity"].enabled:
            return []
        lowest = min(record.min_n, record.min_p, record.min_d)
        try:
            self.check("nonnegativity", 0, -lowest, self._limit("nonnegativity"))
        except MonitorViolationError as violation:
            logger.warning(str(violation))
            return [violation]
        return []

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values() if v.enabled)

    def get_summary(self) -> str:
        """Human-readable verdict table."""
        lines = [
            "╔════════════════════════════════════════════════════════════════╗",
            "║  INVARIANT MONITORS                                            ║",
            "╠════════════════════════════════════════════════════════════════╣",
        ]
        lines.extend(self._format_verdict(v) for v in self.verdicts.values())
        lines.append("╚════════════════════════════════════════════════════════════════╝")
        return "\n".join(lines)

    def _format_verdict(self, verdict: MonitorVerdict) -> str:
        if not verdict.enabled:
            status = "disabled"
        elif verdict.passed:
            status = f"✓ pass ({verdict.checks} checks)"
        else:
            status = f"❌ FAIL ({verdict.violations}/{verdict.checks}, first at step {verdict.first_violation})"
        return f"║    • {verdict.name:<16} {status:<39} ║"
