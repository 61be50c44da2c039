"""Finite-length bounds for staircase generator matrix codes."""

from .bonferroni import bonferroni_lb, correlation, craig_q, psi, select_codewords
from .curves import KINDS, BoundCurve, BoundPoint, read_curves_csv, write_curves_csv
from .design import W0Designer, design_w0
from .exponent import ExponentSpec, StaircaseExponent, gallager_e0, partial_mutual_info, staircase_exponent
from .rcu import RcuEstimate, conventional_rcu, partial_rcu, pep_bracket, pep_exact

__all__ = [
    "KINDS",
    "BoundCurve",
    "BoundPoint",
    "ExponentSpec",
    "RcuEstimate",
    "StaircaseExponent",
    "W0Designer",
    "bonferroni_lb",
    "conventional_rcu",
    "correlation",
    "craig_q",
    "design_w0",
    "gallager_e0",
    "partial_mutual_info",
    "partial_rcu",
    "pep_bracket",
    "pep_exact",
    "psi",
    "read_curves_csv",
    "select_codewords",
    "staircase_exponent",
    "write_curves_csv",
]
