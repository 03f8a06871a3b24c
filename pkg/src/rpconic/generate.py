"""Random feasible and certified-infeasible instances.

Random coefficients are uniform on [0, 1]. Sparse data places exactly
``round(density * N)`` nonzeros among the N free (upper-triangle) entries
of each element, so every A_i hits the requested density up to 1/N.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import jordan
from .jordan import AlgebraElement, ConeSpec, Orthant, Psd, svec
from .model import ConicProgram
from .sketch import make_rng
from .solver import make_certificate


class CostKind(str, Enum):
    IDENTITY = "identity"
    RANDOM = "random"


class Feasibility(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class GenSpec:
    cone: ConeSpec
    m: int
    density: float = 0.5
    cost_kind: CostKind = CostKind.IDENTITY
    feasibility: Feasibility = Feasibility.FEASIBLE
    seed: int = 0
    theta_factor: float = 2.0
    witness_shift: float = 0.1
    margin: float = 0.1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if not self.theta_factor > 1:
            raise ValueError("theta_factor must exceed 1")

    @classmethod
    def psd(cls, side: int, m: int, **kw) -> "GenSpec":
        return cls(ConeSpec.of(Psd(side)), m, **kw)

    def to_dict(self) -> dict:
        return {
            "cone": self.cone.describe(),
            "m": self.m,
            "density": self.density,
            "cost_kind": CostKind(self.cost_kind).value,
            "feasibility": Feasibility(self.feasibility).value,
            "seed": self.seed,
            "theta_factor": self.theta_factor,
            "witness_shift": self.witness_shift,
            "margin": self.margin,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GenSpec":
        doc = dict(doc)
        doc["cone"] = ConeSpec.from_description(doc["cone"])
        doc["cost_kind"] = CostKind(doc.get("cost_kind", "identity"))
        doc["feasibility"] = Feasibility(doc.get("feasibility", "feasible"))
        return cls(**doc)


def _sparse_block(block, density: float, rng: np.random.Generator) -> np.ndarray:
    if isinstance(block, Psd):
        s = block.side
        iu = np.triu_indices(s)
        vals = np.zeros(iu[0].size)
        k = max(1, round(density * vals.size))
        pos = rng.choice(vals.size, size=k, replace=False)
        vals[pos] = rng.random(k)
        X = np.zeros((s, s))
        X[iu] = vals
        X = X + np.triu(X, 1).T
        return svec(X)
    vals = np.zeros(block.size)
    k = max(1, round(density * vals.size))
    pos = rng.choice(vals.size, size=k, replace=False)
    vals[pos] = rng.random(k)
    return vals


def random_constraints(spec: ConeSpec, m: int, density: float, rng) -> np.ndarray:
    return np.vstack([
        np.concatenate([_sparse_block(b, density, rng) for b in spec.blocks]) for _ in range(m)
    ])


def interior_witness(spec: ConeSpec, rng, shift: float = 0.1) -> AlgebraElement:
    """A strictly interior point: (G^T G + shift*s*I)/s per Psd block."""
    parts = []
    for b in spec.blocks:
        if isinstance(b, Psd):
            s = b.side
            G = rng.random((s, s))
            parts.append((G.T @ G + shift * s * np.eye(s)) / s)
        elif isinstance(b, Orthant):
            parts.append(rng.random(b.dim) + shift)
        else:
            xbar = rng.random(b.dim - 1)
            parts.append(np.concatenate(([np.linalg.norm(xbar) + shift + rng.random()], xbar)))
    return jordan.element_from_blocks(spec, parts)


def _cost(spec: ConeSpec, kind: CostKind, rng) -> AlgebraElement:
    if CostKind(kind) is CostKind.IDENTITY:
        return jordan.identity_element(spec)
    return AlgebraElement(spec, np.concatenate([_sparse_block(b, 1.0, rng) for b in spec.blocks]))


def generate_feasible(gs: GenSpec) -> tuple:
    """Return ``(program, witness)`` with b = A x0 and x0 strictly interior."""
    if Feasibility(gs.feasibility) is not Feasibility.FEASIBLE:
        raise ValueError("GenSpec asks for an infeasible instance")
    rng = make_rng(gs.seed, 1)
    spec = gs.cone
    A = random_constraints(spec, gs.m, gs.density, rng)
    x0 = interior_witness(spec, rng, gs.witness_shift)
    c = _cost(spec, gs.cost_kind, rng)
    e = jordan.identity_element(spec)
    theta = gs.theta_factor * jordan.inner_product(e, x0)
    b = (A * spec.q_diagonal()) @ x0.data
    p = ConicProgram(spec, A, b, c, theta, name=f"feas-{gs.seed}")
    return p, x0


def generate_infeasible(gs: GenSpec) -> tuple:
    """Return ``(program, certificate)`` built around a planted Farkas ray.

    A reference point x0 fixes theta and a base right-hand side A x0; b is
    then moved along y_hat until b.y_hat - theta*nu_hat = 1 exactly, with
    nu_hat = max(0, lambda_max(sum y_i A_i)) + margin.

    The ray y_hat has centered entries (uniform on [-1, 1]). With a
    nonnegative ray over nonnegative data the certificate collapses onto the
    all-ones direction, which every projection preserves.
    """
    if Feasibility(gs.feasibility) is not Feasibility.INFEASIBLE:
        raise ValueError("GenSpec asks for a feasible instance")
    rng = make_rng(gs.seed, 2)
    spec = gs.cone
    A = random_constraints(spec, gs.m, gs.density, rng)
    x0 = interior_witness(spec, rng, gs.witness_shift)
    c = _cost(spec, gs.cost_kind, rng)
    e = jordan.identity_element(spec)
    theta = gs.theta_factor * jordan.inner_product(e, x0)
    while True:
        y_hat = rng.uniform(-1.0, 1.0, gs.m)
        if np.linalg.norm(y_hat) > 1e-8:
            break
    N = AlgebraElement(spec, y_hat @ A)
    nu_hat = max(0.0, jordan.lambda_max(N)) + gs.margin
    b0 = (A * spec.q_diagonal()) @ x0.data
    b = b0 + ((1.0 + theta * nu_hat - b0 @ y_hat) / (y_hat @ y_hat)) * y_hat
    p = ConicProgram(spec, A, b, c, theta, name=f"infeas-{gs.seed}")
    return p, make_certificate(p, y_hat, nu_hat)


def generate(gs: GenSpec) -> tuple:
    if Feasibility(gs.feasibility) is Feasibility.FEASIBLE:
        return generate_feasible(gs)
    return generate_infeasible(gs)


def psd_side_for(n: int) -> int:
    """Matrix side s with s(s+1)/2 = n."""
    return jordan.psd_side_from_size(n)

