"""Deterministic JSON and digests for reports and artifacts."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

FLOAT_DIGITS = 12


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(float(obj.real)), "im": _clean(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        # fixed significant digits make reports byte-stable across runs
        return float(f"{x:.{FLOAT_DIGITS}g}")
    return obj


def canonical_json(obj):
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def digest(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dump_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj))
    return path
