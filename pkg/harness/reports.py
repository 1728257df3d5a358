# harness/reports.py - Report serialization: JSON lines, round CSV, overhead and Q-tables
import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence

import config
from core.utils import PathLike, dumps_json, format_float, save_json, write_text_atomic
from harness.experiment import ExperimentReport
from harness.metrics import ComparisonRow

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("round", "t_round", "e_global", "accuracy", "loss", "B_mean", "E_mean", "K")
COMPARISON_COLUMNS = (
    "strategy", "converged_round", "ppw", "normalized_ppw",
    "convergence_time", "speedup", "final_accuracy", "accuracy_ratio",
)


def _line(record: Dict) -> str:
    return json.dumps(record, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def report_lines(report: ExperimentReport) -> List[str]:
    """Header, one record per round, summary. No wall-clock values."""
    lines = [_line({"kind": "header", "strategy": report.strategy, "config": report.config})]
    lines.extend(_line(r.as_dict()) for r in report.rounds)
    lines.append(_line(report.summary()))
    return lines


def serialize_report(report: ExperimentReport) -> str:
    return "\n".join(report_lines(report)) + "\n"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _table(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def rounds_csv(report: ExperimentReport) -> str:
    return _table(CSV_COLUMNS, [
        (r.round_index, r.t_round, r.e_global, r.accuracy, r.loss, r.b_mean, r.e_mean, r.k)
        for r in report.rounds
    ])


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    return _table(COMPARISON_COLUMNS, [[getattr(row, c) for c in COMPARISON_COLUMNS] for row in rows])


def write_report(report: ExperimentReport, directory: PathLike, write_csv: bool = True,
                 write_qtables: bool = True) -> Path:
    directory = Path(directory)
    write_text_atomic(directory / config.REPORT_FILE, serialize_report(report))
    if write_csv:
        write_text_atomic(directory / config.ROUNDS_CSV_FILE, rounds_csv(report))
    save_json({str(t): s for t, s in sorted(report.overhead.items())}, directory / config.OVERHEAD_FILE)
    if write_qtables and report.qtables:
        for scope, text in report.qtables.items():
            write_text_atomic(directory / config.QTABLES_DIR / f"{scope}.txt", text)
    logger.info(f"Wrote {report.strategy} report ({len(report.rounds)} rounds) to {directory}")
    return directory


def write_comparison(rows: Sequence[ComparisonRow], directory: PathLike) -> None:
    directory = Path(directory)
    write_text_atomic(directory / config.COMPARISON_CSV_FILE, comparison_csv(rows))
    write_text_atomic(directory / config.COMPARISON_JSON_FILE, dumps_json([row.as_dict() for row in rows]) + "\n")
    logger.info(f"Wrote comparison of {len(rows)} strategies to {directory}")
