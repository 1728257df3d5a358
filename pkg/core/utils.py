# core/utils.py - Utility functions
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union

PathLike = Union[str, Path]


def write_text_atomic(filepath: PathLike, text: str) -> None:
    """Write text through a temp file and os.replace so readers never see half a file"""
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, allow_nan=False)


def save_json(data: Any, filepath: PathLike) -> None:
    """Save data to a JSON file"""
    write_text_atomic(filepath, dumps_json(data) + "\n")


def load_json(filepath: PathLike) -> Any:
    """Load data from a JSON file"""
    try:
        with open(filepath, "r", encoding="utf-8") as f:
            return json.load(f)
    except (FileNotFoundError, json.JSONDecodeError):
        return None


def format_float(value: float) -> str:
    """Shortest round-tripping text form of a float"""
    return repr(float(value))
