"""Theoretical error bounds and the quantities they are built from.

Every evaluator is a pure function of scalars, so a report that stores its
parameter set can be re-evaluated later and must reproduce its theoretical
columns bit for bit (see :meth:`ErrorReport.recompute`).

Bound denominators use sqrt(log n). The concentration argument behind the
feasibility bound naturally produces sqrt(d) instead; pass
``denominator="sqrt_d"`` to get that variant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jordan
from .jordan import ConeSpec, Lorentz, Orthant, Psd, smat
from .model import ConicProgram
from .sketch import make_rng

DEFAULT_U = 2.0
DEFAULT_C2 = 1.0
DEFAULT_C_TILDE = 2.0


def opnorm_bound(p: ConicProgram) -> float:
    """sum_i rho(A_i), an upper bound on the norm of y -> sum_i y_i A_i."""
    return float(sum(jordan.spectral_radius(a) for a in p.constraints))


# --- Gaussian width ---------------------------------------------------------


def finite_set_support(points) -> Callable:
    """Support function g -> max_x g.x of a finite point set (one point per row)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))

    def h(g):
        return float(np.max(P @ g))

    h.dim = P.shape[1]
    return h


def unit_ball_support(dim: int) -> Callable:
    def h(g):
        return float(np.linalg.norm(g))

    h.dim = dim
    return h


def unit_trace_support(spec: ConeSpec) -> Callable:
    """Support function of B = {x in K : <e, x> <= 1} in coordinate space.

    The extreme points of B are 0 and the unit-trace primitive idempotents,
    so the supremum is max(0, best block value): the top eigenvalue for a
    PSD block, the top entry for an orthant, (g0 + ||gbar||)/2 for Lorentz.
    """
    slices = list(spec.slices())

    def h(g):
        best = 0.0
        for b, sl in slices:
            gb = g[sl]
            if isinstance(b, Psd):
                v = float(np.linalg.eigvalsh(smat(gb, b.side))[-1])
            elif isinstance(b, Orthant):
                v = float(np.max(gb))
            else:
                v = 0.5 * (gb[0] + float(np.linalg.norm(gb[1:])))
            best = max(best, v)
        return best

    h.dim = spec.n
    return h


def estimate_gaussian_width(support, n_samples: int = 1000, seed: int = 0, dim: int | None = None) -> tuple:
    """Monte-Carlo estimate of E sup_{x in S} g.x over standard Gaussian g.

    ``support`` is either a finite point set (array, one point per row) or a
    callable returning sup_{x in S} g.x for a given g. Returns
    ``(estimate, standard_error)``.
    """
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    if not callable(support):
        support = finite_set_support(support)
    dim = dim if dim is not None else getattr(support, "dim", None)
    if dim is None:
        raise ValueError("dimension of the support function is unknown; pass dim")
    rng = make_rng(seed, 7)
    G = rng.standard_normal((n_samples, dim))
    vals = np.array([support(g) for g in G])
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_samples))


# --- diameter of the unit-trace slice ---------------------------------------


def _extreme_radius(block) -> float:
    # Euclidean norm of a unit-trace primitive idempotent in coordinates
    return math.sqrt(0.5) if isinstance(block, Lorentz) else 1.0


def _block_diameter(block) -> float:
    if isinstance(block, Lorentz):
        return 1.0
    return math.sqrt(2.0) if block.degree >= 2 else 1.0


def cone_unit_diameter(spec: ConeSpec) -> float:
    """Euclidean diameter of B = {x in K : <e, x> <= 1} in coordinates.

    The diameter is attained between extreme points. Two unit-trace points
    in one PSD or orthant block are at most sqrt(2) apart; in a Lorentz block
    the extreme points are (1, u)/2 with |u| = 1, at most 1 apart. Points in
    different blocks have orthogonal supports.
    """
    best = max(_block_diameter(b) for b in spec.blocks)
    radii = sorted((_extreme_radius(b) for b in spec.blocks), reverse=True)
    if len(radii) >= 2:
        best = max(best, math.hypot(radii[0], radii[1]))
    return best


# --- evaluators -------------------------------------------------------------


def _scale(n: int, d: int | None, denominator: str) -> float:
    if denominator == "log_n":
        if n < 2:
            raise ValueError("n must be >= 2")
        return math.sqrt(math.log(n))
    if denominator == "sqrt_d":
        if not d or d < 1:
            raise ValueError("the sqrt_d variant needs d >= 1")
        return math.sqrt(d)
    raise ValueError(f"unknown denominator {denominator!r}")


def eval_infeasibility_condition(epsilon: float, y_hat, b, opnorm: float) -> tuple:
    """lhs = eps * ||y_hat|| * (||b|| + opnorm); the condition holds when lhs < 1."""
    lhs = float(epsilon * np.linalg.norm(y_hat) * (np.linalg.norm(b) + opnorm))
    return lhs, lhs < 1.0


def _infeasibility_lhs(epsilon, norm_y_hat, norm_b, opnorm) -> float:
    return float(epsilon * norm_y_hat * (norm_b + opnorm))


def eval_optimality_bound(epsilon: float, y_star, theta: float, opnorm: float, b) -> float:
    """eps * ||y*|| * (opnorm * theta + ||b||)."""
    return _optimality(epsilon, float(np.linalg.norm(y_star)), theta, opnorm, float(np.linalg.norm(b)))


def _optimality(epsilon, norm_y, theta, opnorm, norm_b) -> float:
    return float(epsilon * norm_y * (opnorm * theta + norm_b))


def _width_term(w_B, u, delta, c2) -> float:
    return c2 * w_B + u * delta


def eval_feasibility_error_bound(
    epsilon, theta, opnorm2, w_B, u, delta, n, c2=DEFAULT_C2, *, d=None, denominator="log_n"
) -> float:
    """eps * theta * ||A||_2 * (C2 w(B) + u Delta) / sqrt(log n)."""
    return float(epsilon * theta * opnorm2 * _width_term(w_B, u, delta, c2) / _scale(n, d, denominator))


def eval_retrieval_cone_bound(
    lambda1, epsilon, theta, kappa, norm_q_half, w_B, u, delta, n, c2=DEFAULT_C2, *, d=None,
    denominator="log_n",
) -> float:
    """lambda1 - eps * theta * kappa * ||Q^1/2|| * (C2 w(B) + u Delta) / sqrt(log n)."""
    drop = epsilon * theta * kappa * norm_q_half * _width_term(w_B, u, delta, c2) / _scale(n, d, denominator)
    return float(lambda1 - drop)


def eval_retrieval_objective_bound(
    epsilon, theta, kappa, norm_c, w_B, u, delta, n, c2=DEFAULT_C2, *, d=None, denominator="log_n"
) -> float:
    """eps * theta * kappa * ||c|| * (C2 w(B) + u Delta) / sqrt(log n)."""
    return float(epsilon * theta * kappa * norm_c * _width_term(w_B, u, delta, c2) / _scale(n, d, denominator))


# --- reports ----------------------------------------------------------------

MEASURED_KEYS = (
    "value_P",
    "value_PT",
    "feasibility_residual",
    "lambda_min_xT",
    "lambda_min_retrieved",
    "objective_shift",
    "detection_outcome",
)
THEORETICAL_KEYS = (
    "infeasibility_lhs",
    "optimality_gap_bound",
    "feasibility_error_bound",
    "retrieval_cone_bound",
    "retrieval_objective_bound",
    "feasibility_error_bound_sqrt_d",
)
PARAMETER_KEYS = (
    "epsilon",
    "d",
    "n",
    "theta",
    "u",
    "C2",
    "C_tilde",
    "c0",
    "w_B",
    "Delta",
    "kappa",
    "opnorm_bound",
    "norm_A2",
    "norm_b",
    "norm_c",
    "norm_y_star",
    "norm_y_hat",
    "norm_Q_half",
)


def theoretical_from_parameters(params: dict, lambda1: float | None = None) -> dict:
    """Evaluate every bound whose inputs are present in ``params``."""
    p = params

    def have(*keys):
        return all(p.get(k) is not None for k in keys)

    out = {k: None for k in THEORETICAL_KEYS}
    if have("epsilon", "norm_y_hat", "norm_b", "opnorm_bound"):
        out["infeasibility_lhs"] = _infeasibility_lhs(p["epsilon"], p["norm_y_hat"], p["norm_b"], p["opnorm_bound"])
    if have("epsilon", "norm_y_star", "theta", "opnorm_bound", "norm_b"):
        out["optimality_gap_bound"] = _optimality(
            p["epsilon"], p["norm_y_star"], p["theta"], p["opnorm_bound"], p["norm_b"])
    common = ("epsilon", "theta", "w_B", "u", "Delta", "n", "C2")
    if have("norm_A2", *common):
        args = (p["epsilon"], p["theta"], p["norm_A2"], p["w_B"], p["u"], p["Delta"], p["n"], p["C2"])
        out["feasibility_error_bound"] = eval_feasibility_error_bound(*args)
        if p.get("d"):
            out["feasibility_error_bound_sqrt_d"] = eval_feasibility_error_bound(
                *args, d=p["d"], denominator="sqrt_d")
    if lambda1 is not None and have("kappa", "norm_Q_half", *common):
        out["retrieval_cone_bound"] = eval_retrieval_cone_bound(
            lambda1, p["epsilon"], p["theta"], p["kappa"], p["norm_Q_half"], p["w_B"], p["u"],
            p["Delta"], p["n"], p["C2"])
    if have("kappa", "norm_c", *common):
        out["retrieval_objective_bound"] = eval_retrieval_objective_bound(
            p["epsilon"], p["theta"], p["kappa"], p["norm_c"], p["w_B"], p["u"], p["Delta"], p["n"], p["C2"])
    return out


@dataclass(eq=False)
class ErrorReport:
    """Measured outcomes, theoretical bounds and every input of those bounds.

    ``info`` carries the per-run bookkeeping (instance name, status, sizes,
    timings, relative errors) that the result tables print next to the
    bounds.
    """

    info: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)
    theoretical: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)

    def recompute(self) -> dict:
        return theoretical_from_parameters(self.parameters, self.measured.get("lambda_min_xT"))

    def containment(self) -> dict:
        """Which measured quantities sit inside their bound (None when either side is missing)."""
        m, t = self.measured, self.theoretical

        def test(a, b, op):
            if a is None or b is None:
                return None
            return bool(op(a, b))

        gap = None
        if m.get("value_P") is not None and m.get("value_PT") is not None:
            gap = m["value_P"] - m["value_PT"]
        return {
            "optimality": test(gap, t.get("optimality_gap_bound"), lambda a, b: a <= b),
            "feasibility": test(m.get("feasibility_residual"), t.get("feasibility_error_bound"), lambda a, b: a <= b),
            "retrieval_cone": test(m.get("lambda_min_retrieved"), t.get("retrieval_cone_bound"), lambda a, b: a >= b),
            "retrieval_objective": test(m.get("objective_shift"), t.get("retrieval_objective_bound"), lambda a, b: a <= b),
        }

    def to_dict(self) -> dict:
        return {
            "info": dict(self.info),
            "measured": {k: self.measured.get(k) for k in MEASURED_KEYS},
            "theoretical": {k: self.theoretical.get(k) for k in THEORETICAL_KEYS},
            "parameters": {k: self.parameters.get(k) for k in PARAMETER_KEYS},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ErrorReport":
        return cls(dict(doc.get("info", {})), dict(doc.get("measured", {})),
                   dict(doc.get("theoretical", {})), dict(doc.get("parameters", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def flat(self) -> dict:
        row = dict(self.info)
        for k in MEASURED_KEYS:
            row[k] = self.measured.get(k)
        for k in THEORETICAL_KEYS:
            row[k] = self.theoretical.get(k)
        for k in PARAMETER_KEYS:
            row[k] = self.parameters.get(k)
        return row


def report_parameters(
    p: ConicProgram,
    *,
    epsilon: float,
    d: int | None = None,
    u: float = DEFAULT_U,
    c2: float = DEFAULT_C2,
    c_tilde: float = DEFAULT_C_TILDE,
    c0: float | None = None,
    w_B: float | None = None,
    y_star=None,
    y_hat=None,
) -> dict:
    """Collect the program-derived inputs of every bound."""
    op = p.operator
    return {
        "epsilon": float(epsilon),
        "d": None if d is None else int(d),
        "n": p.n,
        "theta": float(p.theta),
        "u": float(u),
        "C2": float(c2),
        "C_tilde": float(c_tilde),
        "c0": None if c0 is None else float(c0),
        "w_B": None if w_B is None else float(w_B),
        "Delta": cone_unit_diameter(p.spec),
        "kappa": float(op.condition_number),
        "opnorm_bound": opnorm_bound(p),
        "norm_A2": float(op.sigma_max),
        "norm_b": float(np.linalg.norm(p.b)),
        "norm_c": float(np.linalg.norm(p.c.data)),
        "norm_y_star": None if y_star is None else float(np.linalg.norm(y_star)),
        "norm_y_hat": None if y_hat is None else float(np.linalg.norm(y_hat)),
        "norm_Q_half": p.spec.norm_q_half(),
    }


def unit_trace_width(spec: ConeSpec, n_samples: int = 1000, seed: int = 0) -> tuple:
    """Gaussian width of the unit-trace slice of the cone, with its standard error."""
    return estimate_gaussian_width(unit_trace_support(spec), n_samples, seed)
