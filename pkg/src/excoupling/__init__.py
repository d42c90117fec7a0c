"""Exceptional Coulomb coupling constants of a one-dimensional Dirac operator
with anomalous magnetic moment, by Prufer shooting and in closed form."""

__version__ = "0.1.0"

from .closed_form import count_exceptional, coupling, exceptional_values, stability_bound_check
from .coulomb import (
    ExceptionalValue,
    ExceptionalValues,
    ModelParams,
    ShootingConfig,
    asymptotic_angles,
    find_exceptional_numeric,
    mismatch,
    shooting_trajectory,
    theta0,
    theta_inf,
)
from .errors import (
    DomainError,
    IntegrationError,
    LadderTermination,
    NumericalConsistencyError,
    RecursionCheckError,
    RefinementError,
)

__all__ = [
    "count_exceptional", "coupling", "exceptional_values", "stability_bound_check",
    "ExceptionalValue", "ExceptionalValues", "ModelParams", "ShootingConfig",
    "asymptotic_angles", "find_exceptional_numeric", "mismatch", "shooting_trajectory",
    "theta0", "theta_inf",
    "DomainError", "IntegrationError", "LadderTermination", "NumericalConsistencyError",
    "RecursionCheckError", "RefinementError",
]
