"""Modular functions, singular moduli, Borcherds products and multiplicative dependence."""

from .balls import Ball, PrecisionCtx
from .borcherds import B0Element, PlusForm, build_fd, divisor_condition_b0, eval_lift, lift
from .errors import ModmultError
from .modfunc import ModularFunction, divisor_condition_check, eval_j, inverse_j, zeros_poles_in_Fj
from .multdep import AlgebraicValue, RelationCertificate, detect_relations, verify_relation
from .qseries import LaurentSeries, hurwitz_table, j_series
from .quadforms import QuadForm, QuadSurd, enumerate_T, reduced_forms
from .specialpoints import f_special_points, hilbert_class_poly, singular_moduli

__version__ = "0.1.0"

__all__ = [
    "AlgebraicValue", "B0Element", "Ball", "LaurentSeries", "ModmultError", "ModularFunction",
    "PlusForm", "PrecisionCtx", "QuadForm", "QuadSurd", "RelationCertificate", "build_fd",
    "detect_relations", "divisor_condition_b0", "divisor_condition_check", "enumerate_T", "eval_j",
    "eval_lift", "f_special_points", "hilbert_class_poly", "hurwitz_table", "inverse_j", "j_series",
    "lift", "reduced_forms", "singular_moduli", "verify_relation", "zeros_poles_in_Fj",
]
