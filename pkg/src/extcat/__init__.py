"""Finite windows of extriangulated categories as explicit data:
stratifying systems, filtered subcategories, Grothendieck monoid and group,
and Jordan-Holder analysis, with an exact derived-category engine for
linear A_n quivers."""

__version__ = "0.1.0"

from .core import CategoryModel, Extriangle, IndecId, Obj, obj_sum, opposite, star, validate_model
from .derived import build_window, fig1_window, restrict_window
from .fixtures import fixture
from .tables import load_model, save_model

__all__ = [
    "CategoryModel",
    "Extriangle",
    "IndecId",
    "Obj",
    "obj_sum",
    "opposite",
    "star",
    "validate_model",
    "build_window",
    "fig1_window",
    "restrict_window",
    "fixture",
    "load_model",
    "save_model",
]
