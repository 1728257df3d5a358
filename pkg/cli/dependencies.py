# cli/dependencies.py - Config loading and command-line overrides
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from core.errors import ConfigParse
from core.models import ConfigDocument
from core.utils import PathLike

logger = logging.getLogger(__name__)


def read_document(path: PathLike) -> Dict[str, Any]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigParse(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigParse(f"config {path} is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigParse(f"config {path} must be a JSON object")
    return raw


def apply_overrides(
    raw: Dict[str, Any],
    seed: Optional[int] = None,
    strategy: Optional[str] = None,
    max_rounds: Optional[int] = None,
) -> Dict[str, Any]:
    """Command-line flags win over the document"""
    doc = json.loads(json.dumps(raw))
    scenario = doc.setdefault("scenario", {})
    if not isinstance(scenario, dict):
        raise ConfigParse("scenario must be an object")
    if seed is not None:
        scenario["seed"] = seed
    if max_rounds is not None:
        scenario["max_rounds"] = max_rounds
    if strategy is not None:
        section = doc.setdefault("strategy", {})
        if not isinstance(section, dict):
            raise ConfigParse("strategy must be an object")
        section["name"] = strategy
    return doc


def validate_document(raw: Dict[str, Any]) -> ConfigDocument:
    return ConfigDocument.validated(raw)


def load_config(
    path: PathLike,
    seed: Optional[int] = None,
    strategy: Optional[str] = None,
    max_rounds: Optional[int] = None,
) -> ConfigDocument:
    document = validate_document(apply_overrides(read_document(path), seed, strategy, max_rounds))
    logger.debug(f"Loaded config {path}: strategy={document.strategy.name}, seed={document.scenario.seed}")
    return document
