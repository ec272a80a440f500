"""JSON serialization of stochastic maps and states.

A map is stored as::

    {"alphabet_size": 2,
     "in_cells": [{"label": 0, "dim": 2}, ...],
     "out_cells": [{"label": 0, "dim": 2}, ...],
     "matrix": [[...], ...]}          # row-major, rows = output words

A state is the same object with an empty ``in_cells`` list and a single
column.
"""
import json
from pathlib import Path

import numpy as np

from .core import Region, State, StochMap
from .validation import STOCH_TOL, StochasticityError, check_stochastic


class FormatError(ValueError):
    """A file does not follow the expected JSON layout."""


def _cells_to_json(region):
    return [{"label": c, "dim": d} for c, d in zip(region.cells, region.dims)]


def _cells_from_json(items, key):
    try:
        pairs = [(int(item["label"]), int(item["dim"])) for item in items]
    except (TypeError, KeyError, ValueError) as exc:
        raise FormatError(f"malformed '{key}' entry: {exc}") from exc
    labels = [c for c, _ in pairs]
    if len(set(labels)) != len(labels):
        raise FormatError(f"duplicate labels in '{key}'")
    return Region.from_pairs(pairs)


def map_to_dict(S, alphabet_size=None):
    if alphabet_size is None:
        alphabet_size = max(S.in_region.dims + S.out_region.dims, default=1)
    return {
        "alphabet_size": int(alphabet_size),
        "in_cells": _cells_to_json(S.in_region),
        "out_cells": _cells_to_json(S.out_region),
        "matrix": S.matrix.tolist(),
    }


def state_to_dict(rho, alphabet_size=None):
    if alphabet_size is None:
        alphabet_size = max(rho.region.dims, default=1)
    return {
        "alphabet_size": int(alphabet_size),
        "in_cells": [],
        "out_cells": _cells_to_json(rho.region),
        "matrix": rho.probs[:, None].tolist(),
    }


def map_from_dict(data, tol=STOCH_TOL):
    """Build a ``StochMap``; columns must sum to one within ``tol``."""
    if not isinstance(data, dict):
        raise FormatError("expected a JSON object")
    for key in ("in_cells", "out_cells", "matrix"):
        if key not in data:
            raise FormatError(f"missing key '{key}'")
    in_r = _cells_from_json(data["in_cells"], "in_cells")
    out_r = _cells_from_json(data["out_cells"], "out_cells")
    try:
        mat = np.array(data["matrix"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix is not numeric: {exc}") from exc
    if mat.ndim != 2 or mat.shape != (out_r.size, in_r.size):
        raise FormatError(f"matrix has shape {mat.shape}, expected {(out_r.size, in_r.size)}")
    check_stochastic(mat, tol=tol)
    return StochMap(in_r, out_r, mat)


def state_from_dict(data, tol=STOCH_TOL):
    S = map_from_dict(data, tol)
    if S.in_region.cells:
        raise FormatError("a state must have empty 'in_cells'")
    return State(S.out_region, S.matrix[:, 0])


def save_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def save_map(S, path, alphabet_size=None):
    save_json(map_to_dict(S, alphabet_size), path)


def load_map(path, tol=STOCH_TOL):
    return map_from_dict(load_json(path), tol)


def save_state(rho, path, alphabet_size=None):
    save_json(state_to_dict(rho, alphabet_size), path)


def load_state(path, tol=STOCH_TOL):
    return state_from_dict(load_json(path), tol)


__all__ = [
    "FormatError", "StochasticityError", "map_to_dict", "map_from_dict",
    "state_to_dict", "state_from_dict", "save_map", "load_map",
    "save_state", "load_state", "save_json", "load_json",
]
