"""Spectral transport metrics and unitary-orbit distance bounds for normal
elements with finite spectrum."""

__version__ = "0.1.0"

from .atomic import AtomicHom, ModelSpec, from_spectrum, make_atomic, matrix_model, trace_mass
from .groups import BratteliLimit, GroupElement, Positivity, Simplicial, TorsionExtended, is_positive, leq
from .k1 import K1Labeling, complement_components, mt2_bounds, mt3_interval, rho
from .matrix import audit_bounds, construct_unitary, eigen_normal, estimate_dist, hermitian_dist, normality_defect
from .metrics import (
    compute_metrics,
    dce_estimate,
    has_hub,
    metric_D_upper,
    metric_Dc,
    metric_DT,
    metric_dc,
    metric_dT,
)
from .transport import PairRelation, bottleneck, hall_check, refine, strict_hall_check, verify_plan

__all__ = [
    "AtomicHom",
    "BratteliLimit",
    "GroupElement",
    "K1Labeling",
    "ModelSpec",
    "PairRelation",
    "Positivity",
    "Simplicial",
    "TorsionExtended",
    "audit_bounds",
    "bottleneck",
    "complement_components",
    "compute_metrics",
    "construct_unitary",
    "dce_estimate",
    "eigen_normal",
    "estimate_dist",
    "from_spectrum",
    "hall_check",
    "has_hub",
    "hermitian_dist",
    "is_positive",
    "leq",
    "make_atomic",
    "matrix_model",
    "metric_D_upper",
    "metric_DT",
    "metric_Dc",
    "metric_dT",
    "metric_dc",
    "mt2_bounds",
    "mt3_interval",
    "normality_defect",
    "refine",
    "rho",
    "strict_hall_check",
    "trace_mass",
    "verify_plan",
]
