"""Deterministic JSON encoding for command reports."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from channel_lab.models.reports import JsonReport


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"cannot encode non-finite number {value!r}")
    return value


def to_jsonable(value: Any) -> Any:
    """Plain JSON data: arrays flatten to ``{"shape", "real", "imag"}`` records."""

    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        flat = value.reshape(-1)
        record = {"shape": list(value.shape), "real": [_finite(float(x)) for x in np.real(flat)]}
        if np.iscomplexobj(value):
            record["imag"] = [_finite(float(x)) for x in np.imag(flat)]
        return record
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return _finite(float(value))
    if isinstance(value, (np.complexfloating, complex)):
        return {"real": _finite(float(value.real)), "imag": _finite(float(value.imag))}
    return value


def _float_text(value: float) -> str:
    text = format(value, ".17g")
    return text + ".0" if text.lstrip("-").isdigit() else text


def _encode(value: Any, level: int) -> str:
    inner, outer = "  " * (level + 1), "  " * level
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(key, ensure_ascii=False)}: {_encode(value[key], level + 1)}" for key in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + outer + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(inner + _encode(item, level + 1) for item in value) + "\n" + outer + "]"
    if isinstance(value, float):
        return _float_text(value)
    return json.dumps(value, ensure_ascii=False, allow_nan=False)


def canonical_json(value: Any) -> str:
    """Sorted keys and two-space indent; floats carry 17 significant digits and must be finite."""

    return _encode(to_jsonable(value), 0)


def dump_report(report: JsonReport) -> str:
    return canonical_json(report) + "\n"


def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
