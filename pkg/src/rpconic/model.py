"""Standard-form symmetric conic programs.

Primal (P):   min <c, x>  s.t.  <A_i, x> = b_i (i < m),  <e, x> <= theta,  x in K
Dual   (D):   max b.y - theta*nu  s.t.  c - sum_i y_i A_i + nu e in K,  nu >= 0
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import jordan
from .jordan import AlgebraElement, ConeSpec


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """Immutable primal data.

    ``A`` holds the algebra coordinates of the constraint elements, one row
    per A_i. Use :attr:`constraints` for the elements themselves.
    """

    spec: ConeSpec
    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    c: AlgebraElement = field(repr=False)
    theta: float = 1.0
    name: str = ""

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim == 1:
            A = A.reshape(1, -1)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.shape[1] != self.spec.n:
            raise ValueError(f"constraint rows have length {A.shape[1]}, spec needs {self.spec.n}")
        if A.shape[0] < 1:
            raise ValueError("at least one equality constraint is required")
        if b.size != A.shape[0]:
            raise ValueError(f"b has length {b.size} but there are {A.shape[0]} constraints")
        if self.c.spec != self.spec:
            raise jordan.SpecMismatchError("cost element has a different spec")
        if not self.theta > 0:
            raise ValueError(f"trace bound theta must be > 0, got {self.theta}")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def from_elements(
        cls,
        constraints: Sequence[AlgebraElement],
        b,
        c: AlgebraElement,
        theta: float,
        name: str = "",
    ) -> "ConicProgram":
        spec = c.spec
        for a in constraints:
            if a.spec != spec:
                raise jordan.SpecMismatchError("constraint element has a different spec")
        A = np.vstack([a.data for a in constraints])
        return cls(spec, A, b, c, theta, name)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def constraints(self) -> tuple:
        return tuple(AlgebraElement(self.spec, row) for row in self.A)

    def combine(self, y) -> AlgebraElement:
        """sum_i y_i A_i as an algebra element."""
        return AlgebraElement(self.spec, np.asarray(y, dtype=float) @ self.A)

    def with_cost(self, c: AlgebraElement) -> "ConicProgram":
        return ConicProgram(self.spec, self.A, self.b, c, self.theta, self.name)

    def objective(self, x: AlgebraElement) -> float:
        return jordan.inner_product(self.c, x)

    @cached_property
    def operator(self) -> "LinearOperator":
        return build_operator(self)


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Flattened matrix of x -> (<A_i, x>)_i acting on algebra coordinates."""

    matrix: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    _u: np.ndarray = field(repr=False)
    _vt: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0])

    @property
    def rank_tol(self) -> float:
        return self.sigma_max * max(self.matrix.shape) * np.finfo(float).eps

    @property
    def rank(self) -> int:
        return int(np.sum(self.singular_values > self.rank_tol))

    @property
    def sigma_min(self) -> float:
        """Smallest singular value above the numerical rank tolerance."""
        return float(self.singular_values[self.rank - 1]) if self.rank else 0.0

    @property
    def full_row_rank(self) -> bool:
        return self.rank == self.matrix.shape[0]

    @property
    def condition_number(self) -> float:
        smin = self.sigma_min
        return self.sigma_max / smin if smin > 0 else np.inf

    def apply(self, x: AlgebraElement) -> np.ndarray:
        return self.matrix @ x.data

    def pinv_apply(self, r: np.ndarray) -> np.ndarray:
        """Least-norm solution of matrix @ z = r restricted to the numerical row space."""
        k = self.rank
        return self._vt[:k].T @ ((self._u[:, :k].T @ r) / self.singular_values[:k])


def build_operator(p: ConicProgram) -> LinearOperator:
    M = p.A * p.spec.q_diagonal()
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    M.setflags(write=False)
    return LinearOperator(M, s, u, vt)


def primal_residuals(p: ConicProgram, x: AlgebraElement) -> tuple:
    """(||Ax - b||_2, theta - <e, x>, max(0, -lambda_min(x)))."""
    if x.spec != p.spec:
        raise jordan.SpecMismatchError("element and program have different specs")
    eq = float(np.linalg.norm(p.operator.apply(x) - p.b))
    e = jordan.identity_element(p.spec)
    slack = p.theta - jordan.inner_product(e, x)
    return eq, slack, max(0.0, -jordan.lambda_min(x))


def dual_slack(p: ConicProgram, y, nu: float, mu: float = 0.0) -> AlgebraElement:
    """c + mu*e - sum_i y_i A_i + nu*e; dual feasible iff this lies in the cone."""
    y = np.asarray(y, dtype=float)
    if y.size != p.m:
        raise ValueError(f"y has length {y.size}, program has {p.m} constraints")
    e = jordan.identity_element(p.spec)
    return p.c - p.combine(y) + (nu + mu) * e


@dataclass(frozen=True, eq=False)
class DualProgram:
    """The dual of a ConicProgram, optionally relaxed: rhs c + mu*e instead of c."""

    program: ConicProgram
    mu: float = 0.0

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("relaxation mu must be >= 0")

    def objective(self, y, nu: float) -> float:
        return float(np.dot(self.program.b, y) - self.program.theta * nu)

    def slack(self, y, nu: float) -> AlgebraElement:
        return dual_slack(self.program, y, nu, self.mu)

    def is_feasible(self, y, nu: float, tol: float = 1e-6) -> bool:
        return nu >= -tol and jordan.lambda_min(self.slack(y, nu)) >= -tol

    def primal(self) -> ConicProgram:
        """The primal whose dual is this program (cost shifted by mu*e)."""
        e = jordan.identity_element(self.program.spec)
        return self.program.with_cost(self.program.c + self.mu * e)
