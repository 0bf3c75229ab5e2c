"""Reading system and pattern files.

Both formats are JSON objects.  Indices inside files (``XF``) are 1-based,
matching the ``x_1 .. x_n`` naming used in reports; the Python API is
0-based throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from funcobs.errors import InvalidInputError
from funcobs.linking import PatternMatrix, unit_rows
from funcobs.numeric import SystemTriple
from funcobs.structural import PatternTriple


class FileFormatError(InvalidInputError):
    """Input file problem, with a location prefix in the message."""


def _load_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot read file: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: top level must be a JSON object")
    return doc


def _grid(doc: dict, key: str, path, *, ncols: int | None = None, required: bool = True) -> np.ndarray | None:
    if key not in doc:
        if required:
            raise FileFormatError(f"{path}: missing field {key!r}")
        return None
    raw = doc[key]
    if not isinstance(raw, list) or any(not isinstance(row, list) for row in raw):
        raise FileFormatError(f"{path}: field {key!r} must be a list of rows")
    if raw and len({len(row) for row in raw}) != 1:
        raise FileFormatError(f"{path}: field {key!r} is not rectangular")
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: field {key!r} has non-numeric entries") from exc
    if arr.size == 0:
        arr = arr.reshape(len(raw), 0 if not raw else len(raw[0]))
    if len(raw) == 0 and ncols is not None:
        arr = np.zeros((0, ncols))
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"{path}: field {key!r} has non-finite entries")
    if ncols is not None and arr.shape[1] != ncols:
        raise FileFormatError(f"{path}: field {key!r} has {arr.shape[1]} columns, expected {ncols}")
    return arr


@dataclass(frozen=True)
class SystemFile:
    system: SystemTriple
    B: np.ndarray | None = None
    jordan: list[tuple[np.ndarray, np.ndarray]] | None = None


def load_system(path: str | Path) -> SystemFile:
    doc = _load_json(path)
    A = _grid(doc, "A", path)
    n = A.shape[0]
    if A.shape != (n, n):
        raise FileFormatError(f"{path}: field 'A' must be square, got {A.shape[0]}x{A.shape[1]}")
    C = _grid(doc, "C", path, ncols=n, required=False)
    C = np.zeros((0, n)) if C is None else C
    F = _grid(doc, "F", path, ncols=n)
    B = _grid(doc, "B", path, required=False)
    if B is not None and B.shape[0] != n:
        raise FileFormatError(f"{path}: field 'B' must have {n} rows")
    jordan = None
    if "jordan" in doc:
        if not isinstance(doc["jordan"], list):
            raise FileFormatError(f"{path}: field 'jordan' must be a list of {{J, T}} objects")
        jordan = []
        for k, item in enumerate(doc["jordan"]):
            if not isinstance(item, dict):
                raise FileFormatError(f"{path}: jordan[{k}] must be an object")
            J = _grid(item, "J", f"{path}: jordan[{k}]")
            T = _grid(item, "T", f"{path}: jordan[{k}]", ncols=J.shape[0])
            jordan.append((J, T))
    return SystemFile(SystemTriple(A, C, F), B, jordan)


def _pattern(arr: np.ndarray, key: str, path) -> PatternMatrix:
    if not np.isin(arr, (0, 1)).all():
        raise FileFormatError(f"{path}: field {key!r} must contain only 0 and 1")
    return PatternMatrix(arr.astype(bool))


@dataclass(frozen=True)
class PatternFile:
    triple: PatternTriple
    Bbar: PatternMatrix | None = None


def load_pattern(path: str | Path) -> PatternFile:
    doc = _load_json(path)
    Abar = _pattern(_grid(doc, "A", path), "A", path)
    n = Abar.rows
    if Abar.shape != (n, n):
        raise FileFormatError(f"{path}: field 'A' must be square")
    C = _grid(doc, "C", path, ncols=n, required=False)
    Cbar = _pattern(np.zeros((0, n)) if C is None else C, "C", path)
    if "F" in doc and "XF" in doc:
        raise FileFormatError(f"{path}: give either 'F' or 'XF', not both")
    if "XF" in doc:
        xf = doc["XF"]
        if not isinstance(xf, list) or any(not isinstance(i, int) or isinstance(i, bool) for i in xf):
            raise FileFormatError(f"{path}: field 'XF' must be a list of integers")
        if any(not 1 <= i <= n for i in xf):
            raise FileFormatError(f"{path}: field 'XF' indices must lie in 1..{n}")
        Fbar = unit_rows(n, sorted(set(i - 1 for i in xf)))
    elif "F" in doc:
        Fbar = _pattern(_grid(doc, "F", path, ncols=n), "F", path)
    else:
        Fbar = PatternMatrix.zeros(0, n)
    B = _grid(doc, "B", path, required=False)
    Bbar = None
    if B is not None:
        if B.shape[0] != n and B.size:
            raise FileFormatError(f"{path}: field 'B' must have {n} rows")
        Bbar = _pattern(B.reshape(n, -1) if B.size else np.zeros((n, 0)), "B", path)
    return PatternFile(PatternTriple(Abar, Cbar, Fbar), Bbar)
