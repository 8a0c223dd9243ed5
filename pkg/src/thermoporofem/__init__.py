"""Frequency-domain thermo-poroelasticity with stabilized BR-RT0-P0-P1
mixed finite elements on the unit square."""

from .params import (
    ProblemParams,
    critical_frequency,
    derived_densities,
    lame_from_E_nu,
    validate,
)
from .mesh import BoundaryConfig, Mesh, tag_boundary, uniform_unit_square
from .fespace import DofLayout, build_dof_layout
from .assembly import LoadData, SystemMatrix, apply_essential_bcs, assemble_load, assemble_operator
from .linsolve import SolveReport, SolverError, solve
from .mms import ErrorReport, convergence_study, error_norms, exact_fields, rhs_from_exact
from .benchmarks import (
    cantilever_setup,
    layered_setup,
    oscillation_metric,
    run_benchmark,
)
from .spectral import check_assumption, smallest_eigs, spectrum_report

__all__ = [
    "ProblemParams", "critical_frequency", "derived_densities", "lame_from_E_nu",
    "validate", "BoundaryConfig", "Mesh", "tag_boundary", "uniform_unit_square",
    "DofLayout", "build_dof_layout", "LoadData", "SystemMatrix",
    "apply_essential_bcs", "assemble_load", "assemble_operator",
    "SolveReport", "SolverError", "solve",
    "ErrorReport", "convergence_study", "error_norms", "exact_fields",
    "rhs_from_exact",
    "cantilever_setup", "layered_setup", "oscillation_metric", "run_benchmark",
    "check_assumption", "smallest_eigs", "spectrum_report",
]

__version__ = "0.1.0"
