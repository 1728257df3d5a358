# example_data.py - Built-in example scenarios written as config documents
import logging
from pathlib import Path
from typing import Dict

from core.models import ConfigDocument
from core.utils import PathLike, save_json

logger = logging.getLogger(__name__)


def desk_scenario() -> Dict:
    """20 devices (3 H / 7 M / 10 L); every L device is slowed down and runs a
    frozen co-runner on a fixed network, so the straggler is the same device
    class every round."""
    return {
        "scenario": {
            "fleet": {"H": 3, "M": 7, "L": 10, "overrides": {"L": {"cpu_slowdown": 16.0}}},
            "workload": {"preset": "cnn-mnist", "flops_factor": 3.0, "step_overhead_samples": 4.0},
            "data": {"mode": "iid", "n_samples": 4000},
            "interference": {
                "enabled": True,
                "probability": 1.0,
                "co_cpu_mean": 0.8,
                "co_cpu_std": 0.0,
                "co_mem_mean": 0.6,
                "co_mem_std": 0.0,
                "frozen": True,
                "categories": ["L"],
            },
            "network": {"mean": 80.0, "stddev": 0.0, "frozen": True},
            "max_rounds": 100,
            "seed": 0,
        },
        "strategy": {"name": "fedgpo"},
        "sweep": {"budget_rounds": 30},
        "compare": {"strategies": ["fixed-best", "fedgpo"], "anchor": "fixed-best"},
    }


def large_iid_scenario() -> Dict:
    """30 H / 70 M / 100 L with runtime variance and IID data"""
    return {
        "scenario": {
            "fleet": {"H": 30, "M": 70, "L": 100},
            "workload": {"preset": "cnn-mnist"},
            "data": {"mode": "iid", "n_samples": 20000},
            "interference": {"enabled": True},
            "network": {"mean": 80.0, "stddev": 30.0},
            "max_rounds": 200,
        },
        "strategy": {"name": "fedgpo"},
        "compare": {"strategies": ["fixed-best", "random", "ga", "fedgpo"], "anchor": "fixed-best"},
    }


def large_dirichlet_scenario() -> Dict:
    doc = large_iid_scenario()
    doc["scenario"]["data"] = {"mode": "dirichlet", "concentration": 0.1, "n_samples": 20000}
    return doc


EXAMPLES = {
    "desk": desk_scenario,
    "large-iid": large_iid_scenario,
    "large-dirichlet": large_dirichlet_scenario,
}


def get_example_config(name: str) -> ConfigDocument:
    return ConfigDocument.parse_obj(EXAMPLES[name]())


def write_example_configs(directory: PathLike) -> None:
    """Write every example document, validated, as <name>.json"""
    directory = Path(directory)
    for name, factory in EXAMPLES.items():
        document = factory()
        ConfigDocument.parse_obj(document)
        save_json(document, directory / f"{name}.json")
    logger.info(f"Wrote {len(EXAMPLES)} example configs to {directory}")
