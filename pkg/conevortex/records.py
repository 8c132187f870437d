"""Schema-versioned run artifacts."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd

from .config import ExperimentConfig

SCHEMA_VERSION = 1


def _default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Unsupported record value: {type(value).__name__}")


def build_record(payload: Dict[str, Any], config: ExperimentConfig) -> Dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, "config": config.to_dict(), **payload}


def write_json(path: Path, payload: Dict[str, Any], config: ExperimentConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(build_record(payload, config), indent=2, sort_keys=True, default=_default))
    return path


def read_json(path: Path) -> Dict[str, Any]:
    return json.loads(Path(path).read_text())


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path
