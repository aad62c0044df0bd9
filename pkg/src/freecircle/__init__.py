"""Numerics for equilibrium measures, circle transport and free functional inequalities on the unit circle."""

__version__ = "0.1.0"

from .equilibrium import EquilibriumResult, FullSupportError, solve_equilibrium
from .functionals import (
    energy,
    fisher_information_IQ,
    hilbert_transform,
    log_energy,
    log_energy_distance,
    potential_free_I,
    relative_entropy_H,
)
from .measures import (
    CircleMeasure,
    FourierSeries,
    InvalidInputError,
    InvalidMeasureError,
    Potential,
    UnsupportedMeasureError,
    lift,
    quantile,
)
from .operators import OperatorKind, apply, dc_norm_sq, houdre_kagan_bounds, kernel_form_N
from .reports import InequalityReport
from .transport import circle_wasserstein, hopf_lax, modified_wasserstein

__all__ = [
    "CircleMeasure", "EquilibriumResult", "FourierSeries", "FullSupportError", "InequalityReport",
    "InvalidInputError", "InvalidMeasureError", "OperatorKind", "Potential", "UnsupportedMeasureError",
    "apply", "circle_wasserstein", "dc_norm_sq", "energy", "fisher_information_IQ", "hilbert_transform",
    "hopf_lax", "houdre_kagan_bounds", "kernel_form_N", "lift", "log_energy", "log_energy_distance",
    "modified_wasserstein", "potential_free_I", "quantile", "relative_entropy_H", "solve_equilibrium",
]
