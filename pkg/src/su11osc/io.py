"""CSV tables at full double precision and JSON sidecar metadata."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.17g"


def write_table(path, columns):
    """Write an ordered mapping name -> 1-d array as CSV with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt=FLOAT_FORMAT)
    return path


def read_table(path):
    """Inverse of write_table: name -> column array."""
    with open(path) as fh:
        names = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {k: data[:, i] for i, k in enumerate(names)}


def complex_columns(prefix, values):
    """{prefix_re: ..., prefix_im: ...} for a complex array."""
    values = np.asarray(values, dtype=complex)
    return {f"{prefix}_re": values.real, f"{prefix}_im": values.imag}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_sidecar(path, metadata):
    """Write ``metadata`` as sorted, indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(metadata), indent=2, sort_keys=True) + "\n")
    return path
