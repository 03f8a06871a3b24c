"""Constraint aggregation by a random projection, dual lifting and retrieval."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jordan
from .jordan import AlgebraElement
from .model import ConicProgram, DualProgram, LinearOperator
from .sketch import ProjectionSketch


@dataclass(frozen=True, eq=False)
class ProjectedProgram:
    program: ConicProgram
    sketch: ProjectionSketch
    source_id: str = ""

    @property
    def d(self) -> int:
        return self.program.m


def project_program(p: ConicProgram, sketch: ProjectionSketch) -> ProjectedProgram:
    """Aggregate constraints: Abar_k = sum_i T_ki A_i, rhs T b."""
    T = sketch.matrix
    if T.shape[1] != p.m:
        raise ValueError(f"sketch has {T.shape[1]} columns, program has {p.m} constraints")
    projected = ConicProgram(p.spec, T @ p.A, T @ p.b, p.c, p.theta, name=f"{p.name}|T{sketch.d}")
    return ProjectedProgram(projected, sketch, p.name)


def lift_dual(sketch: ProjectionSketch | np.ndarray, z, nu: float) -> tuple:
    """Map a dual point (z, nu) of the projected pair to (T^T z, nu)."""
    T = sketch.matrix if isinstance(sketch, ProjectionSketch) else np.asarray(sketch)
    return T.T @ np.asarray(z, dtype=float), float(nu)


def build_relaxed_dual(pt: ProjectedProgram | ConicProgram, mu: float) -> DualProgram:
    """Dual of the projected program with right-hand side c + mu*e."""
    program = pt.program if isinstance(pt, ProjectedProgram) else pt
    return DualProgram(program, float(mu))


def relaxation_mu(epsilon: float, y_hat, opnorm: float) -> float:
    """mu = eps * ||y_hat||_2 * opnorm, the shift that keeps T y_hat feasible whp."""
    return float(epsilon * np.linalg.norm(y_hat) * opnorm)


@dataclass(frozen=True, eq=False)
class RetrievedSolution:
    x_tilde: AlgebraElement
    x_T: AlgebraElement = field(repr=False)
    residual_before: float
    residual_after: float
    lambda_min_after: float
    objective_shift: float
    rank_deficient: bool


def retrieve_solution(
    x_T: AlgebraElement,
    op: LinearOperator,
    b,
    c: AlgebraElement | None = None,
) -> RetrievedSolution:
    """Euclidean projection of x_T onto {x : A x = b} through the SVD pseudoinverse.

    When A lacks full row rank the correction is restricted to the numerical
    row space and the result is flagged ``rank_deficient``.
    """
    b = np.asarray(b, dtype=float)
    r = b - op.matrix @ x_T.data
    x_tilde = AlgebraElement(x_T.spec, x_T.data + op.pinv_apply(r))
    shift = 0.0
    if c is not None:
        shift = abs(jordan.inner_product(c, x_tilde) - jordan.inner_product(c, x_T))
    return RetrievedSolution(
        x_tilde=x_tilde,
        x_T=x_T,
        residual_before=float(np.linalg.norm(r)),
        residual_after=float(np.linalg.norm(op.matrix @ x_tilde.data - b)),
        lambda_min_after=jordan.lambda_min(x_tilde),
        objective_shift=shift,
        rank_deficient=not op.full_row_rank,
    )
