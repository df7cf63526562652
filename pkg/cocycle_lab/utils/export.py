"""
Stable JSON and CSV export
Floats are rounded to 12 significant digits and keys are sorted so report.json is
byte-identical across reruns of the same config.
"""
import csv
import json
import math
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

SIGNIFICANT_DIGITS = 12


def _round_float(value: float) -> Union[float, str, None]:
    if math.isnan(value):
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


def to_jsonable(payload: Any) -> Any:
    """Recursively convert models, numpy values and floats into stable JSON data"""
    if isinstance(payload, BaseModel):
        return to_jsonable(payload.model_dump(mode="python"))
    if isinstance(payload, Mapping):
        return {str(key): to_jsonable(value) for key, value in payload.items()}
    if isinstance(payload, np.ndarray):
        return to_jsonable(payload.tolist())
    if isinstance(payload, (list, tuple)):
        return [to_jsonable(item) for item in payload]
    if isinstance(payload, (bool, np.bool_)):
        return bool(payload)
    if isinstance(payload, (int, np.integer)):
        return int(payload)
    if isinstance(payload, (float, np.floating)):
        return _round_float(float(payload))
    return payload


def dumps_stable(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_stable(payload), encoding="utf-8")
    return path


def curve_frame(columns: Mapping[str, Sequence[Any]]) -> pd.DataFrame:
    """Build a curve table; every column must have the same length"""
    return pd.DataFrame({name: list(values) for name, values in columns.items()})


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    """Header row plus RFC-4180 minimal quoting"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path,
        index=False,
        quoting=csv.QUOTE_MINIMAL,
        lineterminator="\r\n",
        float_format=f"%.{SIGNIFICANT_DIGITS}g",
    )
    return path

