"""JSON encodings for matrices and complex coordinate vectors."""

from __future__ import annotations

import json

import numpy as np


class ParseError(ValueError):
    pass


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"n": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid matrix JSON: {exc}") from exc
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((n, n))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix object: {exc}") from exc
    if re.shape != (n, n) or im.shape != (n, n):
        raise ParseError(f"matrix entries do not have shape ({n}, {n})")
    out = re + 1j * im
    if not np.all(np.isfinite(out)):
        raise ParseError("matrix has non-finite entries")
    return out


def coords_to_json(c) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(c, dtype=complex)]


def coords_from_json(obj) -> np.ndarray:
    try:
        return np.array([complex(re, im) for re, im in obj])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed coordinate list: {exc}") from exc


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True)
