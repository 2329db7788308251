"""Exact truncated-jet engine for codimension-two manifolds at CR singular points."""

from .algebra import CNum, QMatrix, UniPoly, det_exact, det_poly, kernel_basis, rat, solve_linear
from .series import HoloCorrection, Jet, substitute_w
from .manifold import ManifoldJet, NotApplicable, fixture, make_manifold, reindex_smallest_nonparabolic
from .crfields import is_formally_nonminimal, residual_III
from .flatten import FlattenReport, flatten_to_order, normal_target, normalize_order, rigidity_kernel
from .detlab import build_matrix, det_structured

__all__ = [
    "CNum", "QMatrix", "UniPoly", "det_exact", "det_poly", "kernel_basis", "rat", "solve_linear",
    "HoloCorrection", "Jet", "substitute_w",
    "ManifoldJet", "NotApplicable", "fixture", "make_manifold", "reindex_smallest_nonparabolic",
    "is_formally_nonminimal", "residual_III",
    "FlattenReport", "flatten_to_order", "normal_target", "normalize_order", "rigidity_kernel",
    "build_matrix", "det_structured",
]

__version__ = "0.1.0"
