"""Matrix JSON schema: {"rows": int, "cols": int, "data": [[re, im], ...]} row-major."""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigurationError


def matrix_to_obj(m: np.ndarray) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
    data = [[float(v.real), float(v.imag)] for v in m.ravel(order="C")]
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": data}


def obj_to_matrix(obj, origin: str = "<matrix>") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{origin}: matrix object must be a JSON object")
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"{origin}: missing/invalid rows, cols or data: {exc}") from exc
    if rows < 1 or cols < 1:
        raise ConfigurationError(f"{origin}: rows and cols must be >= 1")
    if len(data) != rows * cols:
        raise ConfigurationError(
            f"{origin}: data has {len(data)} entries, expected rows*cols = {rows * cols}"
        )
    try:
        flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{origin}: data entries must be [re, im] pairs: {exc}") from exc
    return flat.reshape(rows, cols)


def load_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
            ) from exc
    return obj_to_matrix(obj, origin=str(path))


def save_matrix(m: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_obj(m), fh)
