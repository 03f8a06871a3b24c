"""Random projections of symmetric conic programs.

Aggregate the equality constraints of a conic program with a random
projection, solve the smaller program, and map the result back.
"""

from .bounds import ErrorReport, estimate_gaussian_width, opnorm_bound
from .generate import GenSpec, generate, generate_feasible, generate_infeasible
from .jordan import AlgebraElement, ConeSpec, Lorentz, Orthant, Psd
from .model import ConicProgram, DualProgram
from .pipeline import lift_dual, project_program, retrieve_solution
from .sketch import embed_dimension, sample_rp
from .solver import SolverOptions, Status, solve

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "ConeSpec",
    "ConicProgram",
    "DualProgram",
    "ErrorReport",
    "GenSpec",
    "Lorentz",
    "Orthant",
    "Psd",
    "SolverOptions",
    "Status",
    "embed_dimension",
    "estimate_gaussian_width",
    "generate",
    "generate_feasible",
    "generate_infeasible",
    "lift_dual",
    "opnorm_bound",
    "project_program",
    "retrieve_solution",
    "sample_rp",
    "solve",
]
