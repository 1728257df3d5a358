# conftest.py - Shared fixtures and the --runslow switch
import copy
import json

import pytest

from core.models import ConfigDocument

# Converges on round 1: any accuracy above 9% with a window of one round
TRIVIAL_CONVERGENCE = {"target_accuracy": 10.0, "delta": 1.0, "window": 1, "loss_tol": 1.0}

TINY_DOCUMENT = {
    "scenario": {
        "fleet": {"H": 2, "M": 8, "L": 10},
        "data": {"n_classes": 4, "n_samples": 400, "feature_dim": 4},
        "network": {"mean": 80.0, "stddev": 0.0},
        "convergence": {"reference_epochs": 2},
        "max_rounds": 3,
        "seed": 3,
    },
    "strategy": {"name": "fixed", "params": [8, 1, 5]},
}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def merge(base: dict, updates: dict) -> dict:
    """Recursive dict merge; updates win"""
    result = copy.deepcopy(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = merge(result[key], value)
        else:
            result[key] = copy.deepcopy(value)
    return result


@pytest.fixture
def tiny_raw():
    def build(**sections) -> dict:
        return merge(TINY_DOCUMENT, sections)
    return build


@pytest.fixture
def tiny_config(tiny_raw):
    def build(**sections) -> ConfigDocument:
        return ConfigDocument.parse_obj(tiny_raw(**sections))
    return build


@pytest.fixture
def write_config(tmp_path):
    def write(document: dict, name: str = "config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return write
