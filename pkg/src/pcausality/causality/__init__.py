"""Decision procedures and factorization search for the causality hierarchy."""
from .bell import bipartite_parity_box, chsh, classical_chsh_bound, correlator, local_box
from .checks import (
    check_all, check_non_correlating, check_non_signalling, check_screening_off,
    check_v_causal, product_violation, restrict_input,
)
from .search import SearchParams, ShapeFactorizer, factor_shape, project_columns_simplex
from .shapes import (
    Box, CircuitShape, ShapeError, boxes_as_maps, compose_shape, environment, pca_shape,
    random_boxes, v_shape, vv_shape,
)
from .verdict import CausalityVerdict, Outcome, Property

__all__ = [
    "bipartite_parity_box", "chsh", "classical_chsh_bound", "correlator", "local_box",
    "check_all", "check_non_correlating", "check_non_signalling", "check_screening_off",
    "check_v_causal", "product_violation", "restrict_input",
    "SearchParams", "ShapeFactorizer", "factor_shape", "project_columns_simplex",
    "Box", "CircuitShape", "ShapeError", "boxes_as_maps", "compose_shape", "environment",
    "pca_shape", "random_boxes", "v_shape", "vv_shape",
    "CausalityVerdict", "Outcome", "Property",
]
