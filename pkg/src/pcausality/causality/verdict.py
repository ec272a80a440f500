from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np


class Outcome(str, Enum):
    PROVED = "proved"
    REFUTED = "refuted"
    SEARCH_EXHAUSTED = "search-exhausted"

    @property
    def exit_code(self):
        return {"proved": 0, "refuted": 1, "search-exhausted": 2}[self.value]


class Property(str, Enum):
    NON_SIGNALLING = "non-signalling"
    NON_CORRELATING = "non-correlating"
    SCREENING_OFF = "screening-off"
    V_CAUSAL = "v-causal"
    SHAPE = "shape"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "matrix") and hasattr(obj, "in_region"):
        return {"in_cells": list(obj.in_region.cells), "out_cells": list(obj.out_region.cells),
                "matrix": obj.matrix.tolist()}
    return obj


@dataclass
class CausalityVerdict:
    """Outcome of one causality check.

    ``witness`` holds the factorization when the property is proved;
    ``counterexample`` holds the violating inputs (or cut) when refuted.
    """

    property: Property
    holds: Outcome
    witness: Any = None
    counterexample: Any = None
    residual: float = 0.0
    params: dict = field(default_factory=dict)
    seed: int | None = None

    @property
    def proved(self):
        return self.holds is Outcome.PROVED

    @property
    def refuted(self):
        return self.holds is Outcome.REFUTED

    @property
    def exit_code(self):
        return self.holds.exit_code

    def to_dict(self):
        out = {
            "property": self.property.value,
            "holds": self.holds.value,
            "residual": float(self.residual),
            "params": _jsonable(self.params),
            "seed": self.seed,
        }
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.counterexample is not None:
            out["counterexample"] = _jsonable(self.counterexample)
        return out
