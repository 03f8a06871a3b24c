"""Euclidean Jordan algebra arithmetic for products of simple blocks.

Three block kinds are supported, each realized on a flat coordinate vector:

    Orthant(k)   R^k with the componentwise product; cone = nonnegative orthant
    Lorentz(k)   (x0, xbar) with x o y = (x.y, x0*ybar + y0*xbar); cone = SOC
    Psd(s)       symmetric s x s matrices with X o Y = (XY + YX)/2; cone = PSD

Psd blocks are stored in scaled symmetric vectorization (upper triangle,
row-major, off-diagonals multiplied by sqrt(2)) so that tr(XY) is the dot
product of the coordinates. The trace inner product of the algebra is

    Orthant: x.y      Lorentz: 2 x.y      Psd: tr(XY)

i.e. <x, y> = x^T Q y with Q = I on Orthant/Psd blocks and Q = 2I on Lorentz
blocks. With this normalization <e, e> equals the degree of the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-8

_SQRT2 = np.sqrt(2.0)


class SpecMismatchError(ValueError):
    """Raised when two algebra elements live in different algebras."""


@dataclass(frozen=True)
class Orthant:
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"Orthant dimension must be >= 1, got {self.dim}")

    @property
    def size(self) -> int:
        return self.dim

    @property
    def degree(self) -> int:
        return self.dim

    @property
    def q_scale(self) -> float:
        return 1.0

    def describe(self) -> dict:
        return {"type": "orthant", "dim": self.dim}


@dataclass(frozen=True)
class Lorentz:
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"Lorentz dimension must be >= 2, got {self.dim}")

    @property
    def size(self) -> int:
        return self.dim

    @property
    def degree(self) -> int:
        return 2

    @property
    def q_scale(self) -> float:
        return 2.0

    def describe(self) -> dict:
        return {"type": "lorentz", "dim": self.dim}


@dataclass(frozen=True)
class Psd:
    side: int

    def __post_init__(self):
        if self.side < 1:
            raise ValueError(f"Psd side must be >= 1, got {self.side}")

    @property
    def size(self) -> int:
        return self.side * (self.side + 1) // 2

    @property
    def degree(self) -> int:
        return self.side

    @property
    def q_scale(self) -> float:
        return 1.0

    def describe(self) -> dict:
        return {"type": "psd", "side": self.side}


Block = Union[Orthant, Lorentz, Psd]


def block_from_description(desc: dict) -> Block:
    kind = desc["type"].lower()
    if kind == "orthant":
        return Orthant(int(desc["dim"]))
    if kind == "lorentz":
        return Lorentz(int(desc["dim"]))
    if kind == "psd":
        return Psd(int(desc["side"]))
    raise ValueError(f"unknown block type {desc['type']!r}")


@dataclass(frozen=True)
class ConeSpec:
    """Ordered product of simple blocks."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("ConeSpec needs at least one block")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, *blocks: Block) -> "ConeSpec":
        return cls(tuple(blocks))

    @property
    def n(self) -> int:
        """Flattened coordinate dimension."""
        return sum(b.size for b in self.blocks)

    @property
    def degree(self) -> int:
        return sum(b.degree for b in self.blocks)

    def slices(self) -> Iterator[tuple]:
        start = 0
        for b in self.blocks:
            yield b, slice(start, start + b.size)
            start += b.size

    def q_diagonal(self) -> np.ndarray:
        """Diagonal of the Gram matrix Q realizing the inner product."""
        return np.concatenate([np.full(b.size, b.q_scale) for b in self.blocks])

    def norm_q_half(self) -> float:
        """Spectral norm of Q^(1/2)."""
        return float(np.sqrt(max(b.q_scale for b in self.blocks)))

    def describe(self) -> list:
        return [b.describe() for b in self.blocks]

    @classmethod
    def from_description(cls, desc: Sequence[dict]) -> "ConeSpec":
        return cls(tuple(block_from_description(d) for d in desc))


# --- scaled symmetric vectorization -----------------------------------------

_triu_cache: dict = {}


def _triu(s: int):
    if s not in _triu_cache:
        iu = np.triu_indices(s)
        scale = np.where(iu[0] == iu[1], 1.0, _SQRT2)
        _triu_cache[s] = (iu, scale)
    return _triu_cache[s]


def svec(X: np.ndarray) -> np.ndarray:
    """Scaled vectorization of a symmetric matrix (upper triangle, row-major)."""
    X = np.asarray(X, dtype=float)
    iu, scale = _triu(X.shape[0])
    return X[iu] * scale


def smat(v: np.ndarray, s: int | None = None) -> np.ndarray:
    """Inverse of :func:`svec`; the result is exactly symmetric."""
    v = np.asarray(v, dtype=float)
    if s is None:
        s = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    iu, scale = _triu(s)
    if v.shape[-1] != iu[0].size:
        raise ValueError(f"vector of length {v.shape[-1]} is not svec of a {s}x{s} matrix")
    X = np.zeros(v.shape[:-1] + (s, s))
    X[..., iu[0], iu[1]] = v / scale
    X[..., iu[1], iu[0]] = v / scale
    return X


def psd_side_from_size(n: int) -> int:
    """Invert the triangular number n = s(s+1)/2; raises if n is not triangular."""
    s = int(round((np.sqrt(8 * n + 1) - 1) / 2))
    if s * (s + 1) // 2 != n:
        raise ValueError(f"{n} is not a triangular number")
    return s


# --- elements ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    spec: ConeSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=float).reshape(-1)
        if data.size != self.spec.n:
            raise ValueError(
                f"coordinate length {data.size} does not match spec dimension {self.spec.n}"
            )
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    def _check(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.spec != self.spec:
            raise SpecMismatchError("algebra elements have different cone specs")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.spec, self.data + other.data)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.spec, self.data - other.data)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.spec, -self.data)

    def __mul__(self, scalar: float) -> "AlgebraElement":
        return AlgebraElement(self.spec, float(scalar) * self.data)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "AlgebraElement":
        return AlgebraElement(self.spec, self.data / float(scalar))

    def blocks(self) -> Iterator[tuple]:
        """Yield ``(block, coordinates)`` pairs."""
        for b, sl in self.spec.slices():
            yield b, self.data[sl]

    def block_matrix(self, index: int) -> np.ndarray:
        """Symmetric matrix of Psd block ``index``."""
        b, sl = list(self.spec.slices())[index]
        if not isinstance(b, Psd):
            raise TypeError(f"block {index} is {type(b).__name__}, not Psd")
        return smat(self.data[sl], b.side)

    def norm(self) -> float:
        """Norm induced by the algebra inner product."""
        return float(np.sqrt(inner_product(self, self)))

    def allclose(self, other: "AlgebraElement", atol: float = DEFAULT_TOL) -> bool:
        self._check(other)
        return bool(np.allclose(self.data, other.data, atol=atol, rtol=atol))


def element_from_blocks(spec: ConeSpec, parts: Sequence) -> AlgebraElement:
    """Build an element from per-block data (vectors, or symmetric matrices for Psd)."""
    if len(parts) != len(spec.blocks):
        raise ValueError("one part per block required")
    coords = []
    for b, part in zip(spec.blocks, parts):
        part = np.asarray(part, dtype=float)
        if isinstance(b, Psd):
            if part.shape != (b.side, b.side):
                raise ValueError(f"Psd({b.side}) block needs a {b.side}x{b.side} matrix")
            coords.append(svec((part + part.T) / 2))
        else:
            coords.append(part.reshape(-1))
    return AlgebraElement(spec, np.concatenate(coords))


def zeros(spec: ConeSpec) -> AlgebraElement:
    return AlgebraElement(spec, np.zeros(spec.n))


def identity_element(spec: ConeSpec) -> AlgebraElement:
    """The multiplicative unit e."""
    parts = []
    for b in spec.blocks:
        if isinstance(b, Orthant):
            parts.append(np.ones(b.dim))
        elif isinstance(b, Lorentz):
            v = np.zeros(b.dim)
            v[0] = 1.0
            parts.append(v)
        else:
            parts.append(svec(np.eye(b.side)))
    return AlgebraElement(spec, np.concatenate(parts))


def random_element(spec: ConeSpec, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
    return AlgebraElement(spec, scale * rng.standard_normal(spec.n))


# --- products ---------------------------------------------------------------


def jordan_product(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    x._check(y)
    out = np.empty(x.spec.n)
    for b, sl in x.spec.slices():
        u, v = x.data[sl], y.data[sl]
        if isinstance(b, Orthant):
            out[sl] = u * v
        elif isinstance(b, Lorentz):
            out[sl.start] = u @ v
            out[sl.start + 1 : sl.stop] = u[0] * v[1:] + v[0] * u[1:]
        else:
            X, Y = smat(u, b.side), smat(v, b.side)
            XY = X @ Y
            out[sl] = svec((XY + XY.T) / 2)
    return AlgebraElement(x.spec, out)


def inner_product(x: AlgebraElement, y: AlgebraElement) -> float:
    x._check(y)
    return float(np.dot(x.spec.q_diagonal() * x.data, y.data))


def square(x: AlgebraElement) -> AlgebraElement:
    return jordan_product(x, x)


# --- spectral analysis ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    idempotents: tuple

    def reconstruct(self) -> AlgebraElement:
        spec = self.idempotents[0].spec
        data = sum(lam * c.data for lam, c in zip(self.eigenvalues, self.idempotents))
        return AlgebraElement(spec, data)


def _lorentz_frame(u: np.ndarray):
    x0, xbar = u[0], u[1:]
    r = np.linalg.norm(xbar)
    if r > 0:
        direction = xbar / r
    else:
        # degenerate: any unit vector works, pick the first coordinate axis
        direction = np.zeros_like(xbar)
        direction[0] = 1.0
    lams = np.array([x0 - r, x0 + r])
    frame = [0.5 * np.concatenate(([1.0], -direction)), 0.5 * np.concatenate(([1.0], direction))]
    return lams, frame


def spectral_decompose(x: AlgebraElement) -> SpectralDecomposition:
    """Eigenvalues (ascending over all blocks) and a Jordan frame of idempotents."""
    spec = x.spec
    lams: list = []
    idems: list = []
    for b, sl in spec.slices():
        u = x.data[sl]
        if isinstance(b, Orthant):
            for i in range(b.dim):
                c = np.zeros(spec.n)
                c[sl.start + i] = 1.0
                lams.append(u[i])
                idems.append(c)
        elif isinstance(b, Lorentz):
            bl, frame = _lorentz_frame(u)
            for lam, f in zip(bl, frame):
                c = np.zeros(spec.n)
                c[sl] = f
                lams.append(lam)
                idems.append(c)
        else:
            w, V = np.linalg.eigh(smat(u, b.side))
            for i in range(b.side):
                c = np.zeros(spec.n)
                c[sl] = svec(np.outer(V[:, i], V[:, i]))
                lams.append(w[i])
                idems.append(c)
    order = np.argsort(lams, kind="stable")
    return SpectralDecomposition(
        eigenvalues=np.asarray(lams, dtype=float)[order],
        idempotents=tuple(AlgebraElement(spec, idems[i]) for i in order),
    )


def eigenvalues(x: AlgebraElement) -> np.ndarray:
    """All r eigenvalues in ascending order, without forming idempotents."""
    vals = []
    for b, u in x.blocks():
        if isinstance(b, Orthant):
            vals.append(u)
        elif isinstance(b, Lorentz):
            r = np.linalg.norm(u[1:])
            vals.append(np.array([u[0] - r, u[0] + r]))
        else:
            vals.append(np.linalg.eigvalsh(smat(u, b.side)))
    return np.sort(np.concatenate(vals))


def lambda_min(x: AlgebraElement) -> float:
    return float(eigenvalues(x)[0])


def lambda_max(x: AlgebraElement) -> float:
    return float(eigenvalues(x)[-1])


def spectral_radius(x: AlgebraElement) -> float:
    """Largest absolute eigenvalue."""
    return float(np.max(np.abs(eigenvalues(x))))


def in_cone(x: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    return lambda_min(x) >= -tol


def project_coords(spec: ConeSpec, v: np.ndarray) -> np.ndarray:
    """Projection of raw coordinates onto the cone of squares (Euclidean = algebra norm)."""
    out = np.empty_like(v)
    for b, sl in spec.slices():
        u = v[sl]
        if isinstance(b, Orthant):
            out[sl] = np.maximum(u, 0.0)
        elif isinstance(b, Lorentz):
            x0, xbar = u[0], u[1:]
            r = np.linalg.norm(xbar)
            if r <= x0:
                out[sl] = u
            elif r <= -x0:
                out[sl] = 0.0
            else:
                a = 0.5 * (x0 + r)
                out[sl.start] = a
                out[sl.start + 1 : sl.stop] = (a / r) * xbar
        else:
            w, V = np.linalg.eigh(smat(u, b.side))
            w = np.maximum(w, 0.0)
            out[sl] = svec((V * w) @ V.T)
    return out


def cone_project(x: AlgebraElement) -> AlgebraElement:
    """Nearest point of the cone of squares: sum of max(lambda_i, 0) c_i."""
    return AlgebraElement(x.spec, project_coords(x.spec, x.data))
