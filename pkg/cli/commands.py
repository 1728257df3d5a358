# cli/commands.py - run, sweep, compare and examples commands
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Optional

import config
from baselines.grid import select_best, sweep_lattice
from cli.dependencies import load_config
from core.errors import ConfigParse, ScenarioInvalid, SimulationError
from core.models import ConfigDocument
from core.utils import save_json
from example_data import write_example_configs
from harness.experiment import ExperimentReport, build_context, run_experiment
from harness.metrics import compare
from harness.reports import write_comparison, write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SIMULATION = 1
EXIT_CONFIG = 2


def _guarded(action: Callable[[], None]) -> int:
    """Run a command body and map errors to exit statuses"""
    try:
        action()
        return EXIT_OK
    except (ConfigParse, ScenarioInvalid) as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, ValueError, KeyError) as e:
        logger.error(f"Simulation failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SIMULATION


def _output_dir(document: ConfigDocument, out: Optional[str]) -> Path:
    return Path(out) if out is not None else Path(document.output.directory)


def _write(report: ExperimentReport, document: ConfigDocument, directory: Path) -> None:
    write_report(report, directory, document.output.write_csv, document.output.write_qtables)


def cmd_run(config_path: str, seed: Optional[int] = None, out: Optional[str] = None,
            strategy: Optional[str] = None, max_rounds: Optional[int] = None) -> int:
    def body():
        document = load_config(config_path, seed, strategy, max_rounds)
        report = run_experiment(document)
        _write(report, document, _output_dir(document, out))
        if report.converged_round is not None:
            logger.info(f"Converged at round {report.converged_round}, PPW {report.ppw:.6g}")

    return _guarded(body)


def cmd_sweep(config_path: str, seed: Optional[int] = None, out: Optional[str] = None,
              max_rounds: Optional[int] = None) -> int:
    """Grid search with one summary file per point; re-runs skip finished points"""
    def body():
        document = load_config(config_path, seed, None, max_rounds)
        directory = _output_dir(document, out)
        sweep = document.sweep
        summaries = sweep_lattice(document, sweep.budget_rounds, sweep.points(), directory / config.SWEEP_DIR)
        result = {"summaries": [s.to_dict() for s in summaries], "best": None}
        try:
            result["best"] = list(select_best(summaries).as_tuple())
        finally:
            save_json(result, directory / config.SWEEP_RESULT_FILE)
        logger.info(f"Sweep finished: {len(summaries)} points, best {result['best']}")

    return _guarded(body)


def cmd_compare(config_path: str, seed: Optional[int] = None, out: Optional[str] = None,
                max_rounds: Optional[int] = None) -> int:
    """Every listed strategy on the shared scenario, normalized to the anchor"""
    def body():
        document = load_config(config_path, seed, None, max_rounds)
        directory = _output_dir(document, out)
        reports: Dict[str, ExperimentReport] = {}
        context = None
        for name in document.compare.strategies:
            variant = document.with_strategy(name, document.strategy.global_params() if name == "fixed" else None)
            if context is None:
                context = build_context(variant)
            context.config = variant
            reports[name] = run_experiment(variant, context)
            _write(reports[name], variant, directory / name)
        write_comparison(compare(reports, document.compare.anchor), directory)

    return _guarded(body)


def cmd_examples(out: Optional[str] = None) -> int:
    def body():
        write_example_configs(Path(out) if out is not None else Path(config.DEFAULT_OUTPUT_DIR) / "examples")

    return _guarded(body)
