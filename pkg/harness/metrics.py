# harness/metrics.py - Convergence detection, PPW and strategy comparison
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Sequence

from core.errors import NotConverged, ScenarioMismatch

if TYPE_CHECKING:
    from harness.experiment import ExperimentReport

logger = logging.getLogger(__name__)

_LOSS_FLOOR = 1e-12


def detect_convergence(
    accuracy: Sequence[float],
    loss: Sequence[float],
    target_accuracy: float,
    delta: float = 1.0,
    window: int = 5,
    loss_tol: float = 0.01,
) -> Optional[int]:
    """First 1-indexed round whose accuracy is within delta of the target while
    the relative loss change stayed below loss_tol across the trailing window."""
    if len(accuracy) != len(loss):
        raise ValueError("accuracy and loss histories must have the same length")
    if window < 1:
        raise ValueError("window must be at least 1")
    for t in range(window, len(accuracy) + 1):
        if accuracy[t - 1] < target_accuracy - delta:
            continue
        recent = loss[t - window:t]
        changes = [abs(b - a) / max(abs(a), _LOSS_FLOOR) for a, b in zip(recent, recent[1:])]
        if max(changes, default=0.0) < loss_tol:
            return t
    return None


def ppw_from_energy(total_energy: float) -> float:
    """Performance per watt reduces to the reciprocal of energy to convergence"""
    if total_energy <= 0:
        raise ValueError("total energy must be positive")
    return 1.0 / total_energy


def compute_ppw(report: "ExperimentReport") -> float:
    if report.converged_round is None:
        raise NotConverged(f"strategy {report.strategy} did not converge within {len(report.rounds)} rounds")
    return ppw_from_energy(report.energy_to_convergence)


@dataclass(frozen=True)
class ComparisonRow:
    strategy: str
    converged_round: Optional[int]
    ppw: Optional[float]
    normalized_ppw: Optional[float]
    convergence_time: Optional[float]  # simulated seconds
    speedup: Optional[float]
    final_accuracy: float
    accuracy_ratio: Optional[float]

    def as_dict(self) -> Dict:
        return dict(self.__dict__)


def _ratio(numerator: Optional[float], denominator: Optional[float]) -> Optional[float]:
    if numerator is None or denominator is None or denominator == 0:
        return None
    return numerator / denominator


def compare(reports: Mapping[str, "ExperimentReport"], anchor: str) -> List[ComparisonRow]:
    """One row per strategy, normalized to the anchor; anchor row first"""
    if anchor not in reports:
        raise ScenarioMismatch(f"anchor strategy {anchor!r} has no report")
    scenario = reports[anchor].config["scenario"]
    for name, report in reports.items():
        if report.config["scenario"] != scenario:
            raise ScenarioMismatch(f"report for {name!r} ran a different scenario than {anchor!r}")

    def ppw_or_none(report):
        return compute_ppw(report) if report.converged_round is not None else None

    base = reports[anchor]
    base_ppw = ppw_or_none(base)
    base_time = base.time_to_convergence
    rows = []
    for name in [anchor] + [n for n in reports if n != anchor]:
        report = reports[name]
        ppw = ppw_or_none(report)
        time_to_convergence = report.time_to_convergence
        rows.append(ComparisonRow(
            strategy=name,
            converged_round=report.converged_round,
            ppw=ppw,
            normalized_ppw=_ratio(ppw, base_ppw),
            convergence_time=time_to_convergence,
            speedup=_ratio(base_time, time_to_convergence),
            final_accuracy=report.final_accuracy,
            accuracy_ratio=_ratio(report.final_accuracy, base.final_accuracy),
        ))
        if ppw is None:
            logger.warning(f"Strategy {name} did not converge; its ratios are empty")
    return rows
