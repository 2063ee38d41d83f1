"""Deformed position-dependent-mass quantum mechanics: Bohmian and Fisher-information tools."""

from .errors import DomainError, GridSizeError, QBohmError, ResolutionError, SingularityError
from .qcalc import (
    DeformationParams,
    deformed_coordinate,
    deformed_derivative,
    inverse_coordinate,
    q_add,
    q_exp,
    q_integral,
    q_log,
    q_sub,
)
from .fields import (
    ComplexField,
    RealField,
    SpatialGrid,
    phi_to_psi,
    polar_decompose,
    psi_to_phi,
    read_field_csv,
    write_field_csv,
)
from .solver import EigenSolution, PotentialSpec, propagate, solve_direct, solve_pct
from .fisher import FisherReport, cramer_rao_check, fisher_deformed, fisher_pdm, fisher_standard
from .well import WellSpec

__version__ = "0.1.0"

__all__ = [
    "ComplexField", "DeformationParams", "DomainError", "EigenSolution", "FisherReport",
    "GridSizeError", "PotentialSpec", "QBohmError", "RealField", "ResolutionError",
    "SingularityError", "SpatialGrid", "WellSpec", "cramer_rao_check", "deformed_coordinate",
    "deformed_derivative", "fisher_deformed", "fisher_pdm", "fisher_standard",
    "inverse_coordinate", "phi_to_psi", "polar_decompose", "propagate", "psi_to_phi", "q_add",
    "q_exp", "q_integral", "q_log", "q_sub", "read_field_csv", "solve_direct", "solve_pct",
    "write_field_csv",
]
