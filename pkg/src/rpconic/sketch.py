"""Random projection matrices and empirical Johnson-Lindenstrauss checks.

Every sampler draws from ``numpy.random.Generator(PCG64)`` seeded through a
``SeedSequence``; a sketch is a pure function of (family, d, m, density, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

DEFAULT_C0 = 1.75
DEFAULT_DENSITY = 0.1


class SketchFamily(str, Enum):
    ACHLIOPTAS_SPARSE = "achlioptas"
    GAUSSIAN = "gaussian"
    IDENTITY = "identity"


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent PCG64 stream for ``seed`` and an optional sub-stream key."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def embed_dimension(m: int, epsilon: float, c0: float = DEFAULT_C0) -> int:
    """min(m, ceil(c0 * ln(m) / epsilon^2))."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if c0 <= 0:
        raise ValueError(f"c0 must be positive, got {c0}")
    return min(m, math.ceil(c0 * math.log(m) / epsilon**2))


@dataclass(frozen=True, eq=False)
class ProjectionSketch:
    matrix: np.ndarray = field(repr=False)
    epsilon: float | None
    c0: float
    density: float
    seed: int
    family: SketchFamily

    def __post_init__(self):
        d, m = self.matrix.shape
        if not 1 <= d <= m:
            raise ValueError(f"sketch must reduce dimension, got d={d}, m={m}")
        self.matrix.setflags(write=False)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def metadata(self) -> dict:
        return {
            "family": self.family.value,
            "d": self.d,
            "m": self.m,
            "epsilon": self.epsilon,
            "c0": self.c0,
            "density": self.density,
            "seed": self.seed,
        }

    def to_dict(self) -> dict:
        return {**self.metadata(), "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ProjectionSketch":
        return cls(
            np.array(doc["matrix"], dtype=float),
            doc.get("epsilon"),
            doc["c0"],
            doc["density"],
            doc["seed"],
            SketchFamily(doc["family"]),
        )


def sample_rp(
    d: int,
    m: int,
    family: SketchFamily | str = SketchFamily.ACHLIOPTAS_SPARSE,
    density: float = DEFAULT_DENSITY,
    seed: int = 0,
    *,
    epsilon: float | None = None,
    c0: float = DEFAULT_C0,
) -> ProjectionSketch:
    """Sample a d x m projection.

    Sparse sign entries are +-1/sqrt(d*q) with probability q/2 each and 0
    otherwise (q = density), giving E||Tx||^2 = ||x||^2. Gaussian entries
    are N(0, 1/d).
    """
    family = SketchFamily(family)
    if not 1 <= d <= m:
        raise ValueError(f"need 1 <= d <= m, got d={d}, m={m}")
    if not 0 < density <= 1:
        raise ValueError(f"density must lie in (0, 1], got {density}")
    rng = make_rng(seed, d, m)
    if family is SketchFamily.ACHLIOPTAS_SPARSE:
        u = rng.random((d, m))
        T = np.where(u < density / 2, 1.0, np.where(u < density, -1.0, 0.0))
        T /= math.sqrt(d * density)
    elif family is SketchFamily.GAUSSIAN:
        T = rng.standard_normal((d, m)) / math.sqrt(d)
    else:
        if d != m:
            raise ValueError("identity sketch needs d == m")
        T = np.eye(m)
    return ProjectionSketch(T, epsilon, c0, density, int(seed), family)


def identity_sketch(m: int) -> ProjectionSketch:
    return sample_rp(m, m, SketchFamily.IDENTITY, 1.0, 0)


def _matrix(T) -> np.ndarray:
    return T.matrix if isinstance(T, ProjectionSketch) else np.asarray(T, dtype=float)


def check_norm_preservation(T, points, epsilon: float) -> float:
    """Fraction of points x with (1-eps)||x||^2 <= ||Tx||^2 <= (1+eps)||x||^2.

    ``points`` is a sequence of vectors or an array with one point per row.
    """
    T = _matrix(T)
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[0] == 0:
        return 1.0
    orig = np.sum(X * X, axis=1)
    proj = np.sum((X @ T.T) ** 2, axis=1)
    ok = (proj >= (1 - epsilon) * orig) & (proj <= (1 + epsilon) * orig)
    return float(np.mean(ok))


def check_gram_residual(T, x, epsilon: float) -> bool:
    """||T^T T x - x||_inf <= eps ||x||_2."""
    T = _matrix(T)
    x = np.asarray(x, dtype=float)
    r = T.T @ (T @ x) - x
    return bool(np.max(np.abs(r)) <= epsilon * np.linalg.norm(x))


def check_scalar_product(T, x, y, epsilon: float) -> bool:
    """|<Tx, Ty> - <x, y>| <= eps ||x|| ||y||."""
    T = _matrix(T)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lhs = abs(float((T @ x) @ (T @ y) - x @ y))
    return lhs <= epsilon * float(np.linalg.norm(x) * np.linalg.norm(y))
