"""Instance serialization: native JSON documents and SDPA sparse import.

Native document layout::

    {"format": "rpconic-instance", "version": 1,
     "cone": [{"type": "psd", "side": 3}, ...],
     "m": 2, "theta": 10.0,
     "c": [...], "b": [...], "A": [[...], [...]],
     "meta": {...}}

All coordinates use the scaled symmetric vectorization of
:mod:`rpconic.jordan`. Floats are written with ``repr`` precision, so a
write/read cycle reproduces every value bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .jordan import AlgebraElement, ConeSpec, Orthant, Psd, smat, svec
from .model import ConicProgram

FORMAT_TAG = "rpconic-instance"


def program_to_dict(p: ConicProgram, meta: dict | None = None) -> dict:
    doc = {
        "format": FORMAT_TAG,
        "version": 1,
        "name": p.name,
        "cone": p.spec.describe(),
        "m": p.m,
        "theta": p.theta,
        "c": p.c.data.tolist(),
        "b": p.b.tolist(),
        "A": p.A.tolist(),
    }
    if meta:
        doc["meta"] = meta
    return doc


def program_from_dict(doc: dict) -> ConicProgram:
    if doc.get("format", FORMAT_TAG) != FORMAT_TAG:
        raise ValueError(f"not an {FORMAT_TAG} document")
    spec = ConeSpec.from_description(doc["cone"])
    A = np.array(doc["A"], dtype=float).reshape(-1, spec.n)
    if "m" in doc and int(doc["m"]) != A.shape[0]:
        raise ValueError(f"document declares m={doc['m']} but has {A.shape[0]} rows")
    c = AlgebraElement(spec, np.array(doc["c"], dtype=float))
    return ConicProgram(spec, A, doc["b"], c, float(doc["theta"]), doc.get("name", ""))


def save_program(p: ConicProgram, path, meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(program_to_dict(p, meta)))


def load_program(path) -> ConicProgram:
    return program_from_dict(json.loads(Path(path).read_text()))


def load_meta(path) -> dict:
    return json.loads(Path(path).read_text()).get("meta", {})


# --- SDPA sparse ------------------------------------------------------------


def _sdpa_lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in '"*':
            continue
        yield line


def _numbers(line: str) -> list:
    for ch in ",{}()":
        line = line.replace(ch, " ")
    return line.split()


def parse_sdpa(text: str, theta: float, name: str = "") -> ConicProgram:
    """Parse an SDPA sparse (.dat-s) document into the native model.

    SDPA's dual, ``max tr(F0 Y) s.t. tr(Fi Y) = ci, Y psd``, is our primal
    with A_i = F_i, b = c and cost -F0. Positive block sizes become Psd
    blocks, negative ones Orthant blocks. SDPA carries no trace bound, so
    ``theta`` must be supplied.
    """
    lines = _sdpa_lines(text)
    m = int(float(_numbers(next(lines))[0]))
    nblocks = int(float(_numbers(next(lines))[0]))
    sizes = [int(float(t)) for t in _numbers(next(lines))][:nblocks]
    rhs = np.array([float(t) for t in _numbers(next(lines))][:m])
    while rhs.size < m:
        rhs = np.concatenate([rhs, [float(t) for t in _numbers(next(lines))]])[:m]

    blocks = [Psd(s) if s > 0 else Orthant(-s) for s in sizes]
    spec = ConeSpec(tuple(blocks))
    mats = [[np.zeros((s, s)) if s > 0 else np.zeros(-s) for s in sizes] for _ in range(m + 1)]
    for line in lines:
        parts = _numbers(line)
        if len(parts) < 5:
            continue
        k, blk, i, j = (int(float(t)) for t in parts[:4])
        val = float(parts[4])
        target = mats[k][blk - 1]
        if target.ndim == 1:
            if i != j:
                raise ValueError("off-diagonal entry in a diagonal SDPA block")
            target[i - 1] = val
        else:
            target[i - 1, j - 1] = val
            target[j - 1, i - 1] = val

    def flatten(parts):
        return np.concatenate([svec(p) if p.ndim == 2 else p for p in parts])

    c = AlgebraElement(spec, -flatten(mats[0]))
    A = np.vstack([flatten(mats[k]) for k in range(1, m + 1)])
    return ConicProgram(spec, A, rhs, c, theta, name)


def read_sdpa(path, theta: float) -> ConicProgram:
    path = Path(path)
    return parse_sdpa(path.read_text(), theta, name=path.stem)


def write_sdpa(p: ConicProgram) -> str:
    """Render a program with Psd/Orthant blocks as SDPA sparse text (theta is dropped)."""
    sizes = []
    for b in p.spec.blocks:
        if isinstance(b, Psd):
            sizes.append(b.side)
        elif isinstance(b, Orthant):
            sizes.append(-b.dim)
        else:
            raise ValueError("SDPA has no Lorentz blocks")
    out = [str(p.m), str(len(sizes)), " ".join(map(str, sizes)), " ".join(repr(float(v)) for v in p.b)]
    rows = [-p.c.data] + list(p.A)
    for k, row in enumerate(rows):
        for bi, (b, sl) in enumerate(p.spec.slices(), start=1):
            u = row[sl]
            if isinstance(b, Psd):
                X = smat(u, b.side)
                for i in range(b.side):
                    for j in range(i, b.side):
                        if X[i, j] != 0.0:
                            out.append(f"{k} {bi} {i + 1} {j + 1} {float(X[i, j])!r}")
            else:
                for i, v in enumerate(u):
                    if v != 0.0:
                        out.append(f"{k} {bi} {i + 1} {i + 1} {float(v)!r}")
    return "\n".join(out) + "\n"
