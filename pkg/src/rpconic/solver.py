"""Built-in first-order conic solver and the solver registry.

The built-in method is ADMM on the homogeneous self-dual embedding (the
splitting scheme popularized by SCS), accelerated by safeguarded Anderson
extrapolation on the (u, v) state. The trace bound becomes one extra
equality row with a nonnegative slack coordinate, so internally the solver
only sees ``min c.x  s.t.  A x = b,  x in K x R_+``. Cone projections come
from :func:`rpconic.jordan.project_coords`, which covers orthant, Lorentz
and PSD blocks alike.

Dual iterates are repaired before they are returned: nu absorbs any
negative eigenvalue of the dual slack, so a reported dual is always exactly
feasible. Infeasibility rays are repaired and renormalized the same way and
then verified from scratch.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
import scipy.linalg

from . import jordan
from .jordan import AlgebraElement, ConeSpec, Orthant
from .model import ConicProgram, dual_slack

log = logging.getLogger(__name__)


class Status(str, Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL = "Numerical"


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 50000
    tol: float = 1e-6
    seed: int = 0
    solver: str = "builtin"
    alpha: float = 1.5
    check_every: int = 10
    scale: float = 1.0
    anderson: int = 10


@dataclass(frozen=True, eq=False)
class Certificate:
    """Farkas ray: b.y - theta*nu = 1 and sum_i y_i A_i - nu e in -K."""

    y_hat: np.ndarray = field(repr=False)
    nu_hat: float
    normalization: float
    slack_lambda_max: float


@dataclass(eq=False)
class SolveResult:
    status: Status
    x: AlgebraElement | None
    y: np.ndarray | None
    nu: float | None
    objective: float
    primal_eq: float = np.inf
    dual_cone: float = np.inf
    gap: float = np.inf
    certificate: Certificate | None = None
    dual_objective: float = float("nan")
    iterations: int = 0
    wall_time: float = 0.0


CERT_TOL = 1e-6


def make_certificate(p: ConicProgram, y_hat, nu_hat: float) -> Certificate:
    y_hat = np.asarray(y_hat, dtype=float)
    N = p.combine(y_hat) - nu_hat * jordan.identity_element(p.spec)
    return Certificate(
        y_hat=y_hat,
        nu_hat=float(nu_hat),
        normalization=float(p.b @ y_hat - p.theta * nu_hat),
        slack_lambda_max=jordan.lambda_max(N),
    )


def verify_certificate(p: ConicProgram, cert: Certificate, tol: float = CERT_TOL) -> bool:
    """Recompute both Farkas conditions from the raw ray; ignore the cached fields."""
    y = np.asarray(cert.y_hat, dtype=float)
    if y.size != p.m or cert.nu_hat < -tol:
        return False
    fresh = make_certificate(p, y, cert.nu_hat)
    return fresh.normalization >= 1 - tol and fresh.slack_lambda_max <= tol


def repair_certificate(p: ConicProgram, y_hat, nu_hat: float) -> Certificate | None:
    """Raise nu until the ray is in -K, then rescale so b.y - theta*nu = 1."""
    y_hat = np.asarray(y_hat, dtype=float)
    nu_hat = max(float(nu_hat), 0.0)
    norm = float(p.b @ y_hat - p.theta * nu_hat)
    if norm <= 0:
        return None
    y_hat, nu_hat = y_hat / norm, nu_hat / norm
    N = p.combine(y_hat) - nu_hat * jordan.identity_element(p.spec)
    delta = max(0.0, jordan.lambda_max(N))
    nu_hat += delta
    norm = 1.0 - p.theta * delta
    if norm <= 0.5:
        return None
    return make_certificate(p, y_hat / norm, nu_hat / norm)


def repair_dual(p: ConicProgram, y, nu: float) -> tuple:
    """Smallest increase of nu that makes (y, nu) dual feasible."""
    nu = max(float(nu), 0.0)
    lam = jordan.lambda_min(dual_slack(p, y, nu))
    return np.asarray(y, dtype=float), nu + max(0.0, -lam)


class _Embedding:
    """Scaled data of min c.x s.t. Abar x = bbar, x in K x R_+."""

    def __init__(self, p: ConicProgram, scale: float):
        q = p.spec.q_diagonal()
        n, m = p.n, p.m
        e_q = q * jordan.identity_element(p.spec).data
        Abar = np.zeros((m + 1, n + 1))
        Abar[:m, :n] = p.A * q
        Abar[m, :n] = e_q
        Abar[m, n] = 1.0
        bbar = np.concatenate([p.b, [p.theta]])
        cbar = np.concatenate([q * p.c.data, [0.0]])

        row_norms = np.linalg.norm(Abar, axis=1)
        row_norms[row_norms == 0] = 1.0
        self.D = 1.0 / row_norms
        self.A = Abar * self.D[:, None]
        bs = bbar * self.D
        self.beta = scale / max(np.linalg.norm(bs), 1e-3)
        self.gamma = scale / max(np.linalg.norm(cbar), 1e-3)
        self.b = bs * self.beta
        self.c = cbar * self.gamma
        self.bbar, self.cbar = bbar, cbar
        self.spec = ConeSpec(p.spec.blocks + (Orthant(1),))
        self.n, self.m = n + 1, m + 1


def _solve_builtin(p: ConicProgram, opts: SolverOptions) -> SolveResult:
    start = time.perf_counter()
    emb = _Embedding(p, opts.scale)
    A, b, c = emb.A, emb.b, emb.c
    n, m1 = emb.n, emb.m
    try:
        # system matrix of the SCS-form data [A; -I]: I + A^T A + I
        K = A.T @ A
        K[np.diag_indices_from(K)] += 2.0
        chol = scipy.linalg.cho_factor(K)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return SolveResult(Status.NUMERICAL, None, None, None, float("nan"),
                           wall_time=time.perf_counter() - start)

    def solve_m(rx, ry_eq, ry_k):
        # [I, As^T; -As, I] [x; y] = [rx; ry] with As = [A; -I]
        x = scipy.linalg.cho_solve(chol, rx - A.T @ ry_eq + ry_k)
        return x, ry_eq + A @ x, ry_k - x

    gx, g_eq, g_k = solve_m(c, b, np.zeros(n))
    g_all = np.concatenate([gx, g_eq, g_k])
    denom = 1.0 + c @ gx + b @ g_eq
    alpha = opts.alpha
    espec = emb.spec

    # state z = (u, v) with u = (x, y_eq, y_k, tau), v = (r, s_eq, s_k, kappa)
    N = 2 * n + m1 + 1
    ik = slice(n + m1, 2 * n + m1)
    ieq = slice(n, n + m1)

    def step(z):
        u, v = z[:N], z[N:]
        w = u + v
        zx, zeq, zk = solve_m(w[:n], w[ieq], w[ik])
        tau_t = (w[-1] + c @ zx + b @ zeq) / denom
        t = np.concatenate([zx, zeq, zk, [tau_t]])
        t[:-1] -= tau_t * g_all
        r = alpha * t + (1 - alpha) * u
        u_new = r - v
        u_new[ik] = jordan.project_coords(espec, u_new[ik])
        u_new[-1] = max(u_new[-1], 0.0)
        return np.concatenate([u_new, v - r + u_new])

    def unpack(z):
        u, v = z[:N], z[N:]
        return u[ieq], u[ik], v[ik], u[-1], v[-1]

    z = np.zeros(2 * N)
    z[N - 1] = z[-1] = 1.0
    gz = step(z)
    f = gz - z
    hist_z, hist_f = [], []

    best = None
    status = Status.MAX_ITER
    it = 0
    for it in range(1, opts.max_iter + 1):
        # gz is a plain iterate: cone parts projected, safe to inspect
        if it % opts.check_every == 0 or it == opts.max_iter:
            outcome = _check(p, emb, *unpack(gz), opts.tol)
            if outcome is not None:
                best = outcome
                if outcome.status is not Status.MAX_ITER:
                    status = outcome.status
                    break

        z_next = gz
        if opts.anderson > 0:
            hist_z.append(z)
            hist_f.append(f)
            if len(hist_z) > opts.anderson + 1:
                del hist_z[0], hist_f[0]
            if len(hist_z) > 1:
                dZ = np.diff(np.array(hist_z), axis=0).T
                dF = np.diff(np.array(hist_f), axis=0).T
                gamma = np.linalg.lstsq(dF, f, rcond=None)[0]
                z_next = z + f - (dZ + dF) @ gamma
        g_next = step(z_next)
        f_next = g_next - z_next
        if z_next is not gz and not np.linalg.norm(f_next) <= np.linalg.norm(f):
            # extrapolation made things worse: take the plain step and restart
            hist_z, hist_f = [], []
            z_next = gz
            g_next = step(z_next)
            f_next = g_next - z_next
        if z_next is not gz:
            # follow an accepted extrapolation with one plain step
            z_next, g_next = g_next, step(g_next)
            f_next = g_next - z_next
        z, gz, f = z_next, g_next, f_next

    if best is None:
        best = _check(p, emb, *unpack(gz), opts.tol) or SolveResult(
            Status.MAX_ITER, None, None, None, float("nan"))
    best.status = status
    best.iterations = it
    best.wall_time = time.perf_counter() - start
    log.debug("builtin solve: %s after %d iterations", status.value, it)
    return best


def _check(p, emb, ueq, uk, vk, utau, vkap, tol) -> SolveResult | None:
    """Evaluate the current iterate; status MAX_ITER means 'not converged yet'."""
    n = p.n
    m = p.m
    cert = None
    # infeasibility ray: y_eq with b^T y_eq < 0 (in scaled SCS-form coordinates)
    y_dir = emb.D * ueq
    bty = emb.bbar @ y_dir
    if bty < 0:
        # SCS-form ray: A^T y_eq - y_k = 0 with y_k in K
        ray_res = np.linalg.norm(emb.A.T @ ueq - uk)
        if ray_res <= 1e-2 * (-emb.b @ ueq):
            cert = repair_certificate(p, -y_dir[:m], y_dir[m])
            if cert is not None and not verify_certificate(p, cert):
                cert = None

    result = None
    if utau > 1e-12:
        xs = vk / utau / emb.beta
        x = AlgebraElement(p.spec, xs[:n])
        ext_res = float(np.linalg.norm(
            (emb.A @ (vk / utau)) / emb.D / emb.beta - emb.bbar))
        yfull = emb.D * ueq / utau / emb.gamma
        y, nu = repair_dual(p, -yfull[:m], yfull[m])
        raw_nu = max(float(yfull[m]), 0.0)
        obj = float(emb.cbar @ xs)
        dobj = float(p.b @ y - p.theta * nu)
        gap = abs(obj - dobj)
        eq_res = float(np.linalg.norm(p.operator.apply(x) - p.b))
        optimal = (
            ext_res <= tol * (1 + np.linalg.norm(emb.bbar))
            and eq_res <= tol * (1 + np.linalg.norm(p.b))
            and gap <= tol * (1 + abs(obj))
        )
        result = SolveResult(
            Status.OPTIMAL if optimal else Status.MAX_ITER,
            x, y, nu, obj,
            primal_eq=eq_res,
            dual_cone=nu - raw_nu,
            gap=gap,
            dual_objective=dobj,
        )
        if optimal and cert is not None:
            result.status = Status.NUMERICAL
            result.certificate = cert
            return result

    if cert is not None:
        return SolveResult(Status.PRIMAL_INFEASIBLE, None, None, None, float("inf"),
                           certificate=cert)
    return result


# --- registry ---------------------------------------------------------------

SolverFn = Callable[[ConicProgram, SolverOptions], SolveResult]

_REGISTRY: dict = {"builtin": _solve_builtin}


def register_solver(name: str, fn: SolverFn) -> None:
    _REGISTRY[name] = fn


def solver_registry(name: str) -> SolverFn:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown solver {name!r}; registered: {sorted(_REGISTRY)}") from None


def solve(p: ConicProgram, opts: SolverOptions | None = None) -> SolveResult:
    opts = opts or SolverOptions()
    return solver_registry(opts.solver)(p, opts)
