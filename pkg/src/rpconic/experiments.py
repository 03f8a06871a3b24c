"""Original-versus-projected experiment runs and their result tables.

A run solves the original program, then samples a projection, solves the
projected program and retrieves a point of the original affine space. The
projected leg is timed as one block (sample, project, solve, retrieve).

Result CSV files contain only quantities fixed by the master seed, so two
runs with the same configuration produce identical bytes. Wall-clock
timings go to a separate timing table.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import bounds, jordan
from .bounds import ErrorReport
from .generate import Feasibility, GenSpec, generate
from .io import load_meta, load_program
from .model import dual_slack
from .pipeline import lift_dual, project_program, retrieve_solution
from .sketch import DEFAULT_C0, DEFAULT_DENSITY, SketchFamily, embed_dimension, make_rng, sample_rp
from .solver import (
    Certificate,
    SolverOptions,
    Status,
    make_certificate,
    solve,
    solver_registry,
    verify_certificate,
)

INFO_COLUMNS = (
    "instance",
    "trial",
    "status_P",
    "status_PT",
    "m",
    "n",
    "d",
    "density",
    "value_retrieved",
    "rel_err_PT",
    "rel_err_retrieved",
    "residual_retrieved",
    "dual_lift_lambda_min",
    "rank_deficient",
    "iterations_P",
    "iterations_PT",
)
PIPELINE_COLUMNS = INFO_COLUMNS + bounds.MEASURED_KEYS + bounds.THEORETICAL_KEYS + bounds.PARAMETER_KEYS
TIMING_COLUMNS = ("instance", "trial", "cpu", "cpu_T")
DETECTION_COLUMNS = (
    "epsilon",
    "d",
    "instances",
    "detected",
    "rate",
    "numerical",
    "not_detected",
    "condition_holds",
    "max_lhs",
)


@dataclass(frozen=True)
class ExperimentConfig:
    gen: tuple = ()
    instances: tuple = ()
    epsilon: float = 0.2
    epsilons: tuple = ()
    c0: float = DEFAULT_C0
    d_override: int | None = None
    trials: int = 1
    density: float = DEFAULT_DENSITY
    family: SketchFamily = SketchFamily.ACHLIOPTAS_SPARSE
    solver: SolverOptions = field(default_factory=SolverOptions)
    u: float = bounds.DEFAULT_U
    c2: float = bounds.DEFAULT_C2
    c_tilde: float = bounds.DEFAULT_C_TILDE
    width_samples: int = 1000
    output: str = "csv"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        for e in self.epsilons:
            if not 0 < e < 1:
                raise ValueError(f"epsilon must lie in (0, 1), got {e}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.d_override is not None and self.d_override < 1:
            raise ValueError("d must be >= 1")
        if self.output not in ("csv", "json"):
            raise ValueError(f"output format must be csv or json, got {self.output!r}")

    def sources(self) -> list:
        return [("gen", g) for g in self.gen] + [("file", p) for p in self.instances]

    def to_dict(self) -> dict:
        return {
            "gen": [g.to_dict() for g in self.gen],
            "instances": list(self.instances),
            "epsilon": self.epsilon,
            "epsilons": list(self.epsilons),
            "c0": self.c0,
            "d": self.d_override,
            "trials": self.trials,
            "density": self.density,
            "family": SketchFamily(self.family).value,
            "solver": {"name": self.solver.solver, "tol": self.solver.tol,
                       "max_iter": self.solver.max_iter, "seed": self.solver.seed},
            "u": self.u,
            "c2": self.c2,
            "c_tilde": self.c_tilde,
            "width_samples": self.width_samples,
            "format": self.output,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {"gen", "batch", "instances", "epsilon", "epsilons", "c0", "d", "trials", "density",
                 "family", "solver", "u", "c2", "c_tilde", "width_samples", "format", "seed"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        seed = int(doc.get("seed", 0))
        gen = [GenSpec.from_dict(g) for g in doc.get("gen", [])]
        if "batch" in doc:
            gen += batch_specs(seed=seed, **doc["batch"])
        s = doc.get("solver", {})
        if isinstance(s, str):
            s = {"name": s}
        solver = SolverOptions(
            max_iter=int(s.get("max_iter", SolverOptions.max_iter)),
            tol=float(s.get("tol", SolverOptions.tol)),
            seed=int(s.get("seed", seed)),
            solver=s.get("name", "builtin"),
        )
        return cls(
            gen=tuple(gen),
            instances=tuple(doc.get("instances", [])),
            epsilon=float(doc.get("epsilon", 0.2)),
            epsilons=tuple(float(e) for e in doc.get("epsilons", [])),
            c0=float(doc.get("c0", DEFAULT_C0)),
            d_override=None if doc.get("d") is None else int(doc["d"]),
            trials=int(doc.get("trials", 1)),
            density=float(doc.get("density", DEFAULT_DENSITY)),
            family=SketchFamily(doc.get("family", "achlioptas")),
            solver=solver,
            u=float(doc.get("u", bounds.DEFAULT_U)),
            c2=float(doc.get("c2", bounds.DEFAULT_C2)),
            c_tilde=float(doc.get("c_tilde", bounds.DEFAULT_C_TILDE)),
            width_samples=int(doc.get("width_samples", 1000)),
            output=doc.get("format", "csv"),
            seed=seed,
        )

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def solver_check(name: str) -> None:
    solver_registry(name)


def derived_seed(master: int, *key: int) -> int:
    """A 31-bit seed that depends only on the master seed and ``key``."""
    return int(make_rng(master, 3, *key).integers(2**31))


def batch_specs(
    *,
    side: int,
    m: int,
    count: int,
    seed: int = 0,
    density: float = 0.5,
    feasibility: str = "feasible",
    cost_kind: str = "identity",
    theta_factor: float = 2.0,
) -> list:
    """``count`` PSD GenSpecs whose seeds derive from the master seed."""
    return [
        GenSpec.psd(side, m, density=density, feasibility=Feasibility(feasibility),
                    cost_kind=cost_kind, seed=derived_seed(seed, i), theta_factor=theta_factor)
        for i in range(count)
    ]


def _load_source(kind, src):
    """Return ``(program, certificate or None, density or None)``."""
    if kind == "gen":
        p, extra = generate(src)
        cert = extra if isinstance(extra, Certificate) else None
        return p, cert, src.density
    p = load_program(src)
    meta = load_meta(src)
    cert = None
    if "certificate" in meta:
        c = meta["certificate"]
        cert = make_certificate(p, c["y_hat"], c["nu_hat"])
    return p, cert, meta.get("gen", {}).get("density")


def relative_error(a: float, b: float) -> float:
    """(a - b) / max(|a|, |b|), zero when both vanish."""
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else (a - b) / scale


def _sketch_dimension(config: ExperimentConfig, m: int, epsilon: float) -> int:
    if config.d_override is not None:
        return min(config.d_override, m)
    return embed_dimension(m, epsilon, config.c0)


class _WidthCache:
    def __init__(self, samples: int, seed: int):
        self.samples, self.seed, self.cache = samples, seed, {}

    def __call__(self, spec) -> float:
        key = json.dumps(spec.describe())
        if key not in self.cache:
            self.cache[key] = bounds.unit_trace_width(spec, self.samples, self.seed)[0]
        return self.cache[key]


def _run_one(p, density, config, idx, trial, width) -> ErrorReport:
    eps = config.epsilon
    info = {"instance": p.name or f"instance-{idx}", "trial": trial, "m": p.m, "n": p.n, "density": density}
    report = ErrorReport(info=info)

    t0 = time.perf_counter()
    res = solve(p, config.solver)
    info["cpu"] = round(time.perf_counter() - t0, 3)
    info["status_P"] = res.status.value
    info["iterations_P"] = res.iterations
    params = bounds.report_parameters(
        p, epsilon=eps, u=config.u, c2=config.c2, c_tilde=config.c_tilde, c0=config.c0,
        w_B=width(p.spec), y_star=res.y if res.status is Status.OPTIMAL else None)

    t1 = time.perf_counter()
    d = _sketch_dimension(config, p.m, eps)
    sketch = sample_rp(d, p.m, config.family, config.density, derived_seed(config.seed, idx, trial),
                       epsilon=eps, c0=config.c0)
    pt = project_program(p, sketch)
    res_t = solve(pt.program, config.solver)
    retrieved = None
    if res_t.status is Status.OPTIMAL:
        retrieved = retrieve_solution(res_t.x, p.operator, p.b, p.c)
    info["cpu_T"] = round(time.perf_counter() - t1, 3)
    info["d"] = d
    info["status_PT"] = res_t.status.value
    info["iterations_PT"] = res_t.iterations
    params["d"] = d
    report.parameters = params

    m = report.measured
    if res.status is Status.OPTIMAL:
        m["value_P"] = res.objective
    if res_t.status is Status.OPTIMAL:
        m["value_PT"] = res_t.objective
        m["feasibility_residual"] = float(np.linalg.norm(p.operator.apply(res_t.x) - p.b))
        m["lambda_min_xT"] = jordan.lambda_min(res_t.x)
        y_lift, nu_lift = lift_dual(sketch, res_t.y, res_t.nu)
        info["dual_lift_lambda_min"] = jordan.lambda_min(dual_slack(p, y_lift, nu_lift))
    if retrieved is not None:
        m["lambda_min_retrieved"] = retrieved.lambda_min_after
        m["objective_shift"] = retrieved.objective_shift
        info["value_retrieved"] = jordan.inner_product(p.c, retrieved.x_tilde)
        info["residual_retrieved"] = retrieved.residual_after
        info["rank_deficient"] = retrieved.rank_deficient
    if "value_P" in m and "value_PT" in m:
        info["rel_err_PT"] = relative_error(m["value_P"], m["value_PT"])
    if "value_P" in m and retrieved is not None:
        info["rel_err_retrieved"] = relative_error(m["value_P"], info["value_retrieved"])
    report.theoretical = report.recompute()
    return report


def run_pipeline(config: ExperimentConfig) -> list:
    """One ErrorReport per (instance, trial), in configuration order.

    An instance that fails anywhere still yields a row; its status columns
    carry the failure and the missing measurements stay empty.
    """
    width = _WidthCache(config.width_samples, config.seed)
    table = []
    for idx, (kind, src) in enumerate(config.sources()):
        try:
            p, _, density = _load_source(kind, src)
        except (OSError, ValueError, KeyError) as exc:
            table.append(ErrorReport(info={"instance": str(src if kind == "file" else idx), "trial": 0,
                                           "status_P": f"Error: {exc}"}))
            continue
        for trial in range(config.trials):
            try:
                table.append(_run_one(p, density, config, idx, trial, width))
            except (ValueError, np.linalg.LinAlgError) as exc:
                table.append(ErrorReport(info={"instance": p.name, "trial": trial, "m": p.m, "n": p.n,
                                               "status_P": f"Error: {exc}"}))
    return table


def any_numerical(table) -> bool:
    num = Status.NUMERICAL.value
    for r in table:
        row = r.info if isinstance(r, ErrorReport) else r
        if num in (row.get("status_P"), row.get("status_PT"), row.get("status")) or row.get("numerical"):
            return True
    return False


# --- infeasibility detection ------------------------------------------------


def largest_admissible_epsilon(instances) -> float:
    """Largest eps (up to rounding) with eps*||y||*(||b||+opnorm) < 1 on every (program, certificate)."""
    instances = [(p, c.y_hat, bounds.opnorm_bound(p)) for p, c in instances]
    eps = min(1.0 / (np.linalg.norm(y) * (np.linalg.norm(p.b) + opn)) for p, y, opn in instances)
    # step below the cap until rounding in the product no longer reaches 1
    while not all(bounds.eval_infeasibility_condition(eps, y, p.b, opn)[1] for p, y, opn in instances):
        eps = float(np.nextafter(eps, 0.0))
    return float(eps)


def load_infeasible(config: ExperimentConfig) -> list:
    """``(program, certificate)`` pairs; every certificate is verified."""
    out = []
    for kind, src in config.sources():
        p, cert, _ = _load_source(kind, src)
        if cert is None or not verify_certificate(p, cert):
            raise ValueError(f"instance {p.name!r} has no valid infeasibility certificate")
        out.append((p, cert))
    return out


def run_infeasibility_trial(config: ExperimentConfig, instances=None) -> tuple:
    """Detection rate of the projected programs for each epsilon.

    Returns ``(detection_rows, reports)``: one row per epsilon with the
    PrimalInfeasible fraction and the condition outcome, plus one
    ErrorReport per (epsilon, instance, trial).
    """
    if instances is None:
        instances = load_infeasible(config)
    epsilons = config.epsilons or (config.epsilon,)
    rows, reports = [], []
    for ei, eps in enumerate(epsilons):
        detected = numerical = total = 0
        holds_all, max_lhs, dims = True, 0.0, set()
        for idx, (p, cert) in enumerate(instances):
            opn = bounds.opnorm_bound(p)
            lhs, holds = bounds.eval_infeasibility_condition(eps, cert.y_hat, p.b, opn)
            holds_all &= holds
            max_lhs = max(max_lhs, lhs)
            d = _sketch_dimension(config, p.m, eps)
            dims.add(d)
            for trial in range(config.trials):
                sketch = sample_rp(d, p.m, config.family, config.density,
                                   derived_seed(config.seed, idx, trial, ei), epsilon=eps, c0=config.c0)
                res = solve(project_program(p, sketch).program, config.solver)
                total += 1
                hit = res.status is Status.PRIMAL_INFEASIBLE
                detected += hit
                numerical += res.status is Status.NUMERICAL
                params = bounds.report_parameters(p, epsilon=eps, d=d, u=config.u, c2=config.c2,
                                                  c_tilde=config.c_tilde, c0=config.c0, y_hat=cert.y_hat)
                rep = ErrorReport(
                    info={"instance": p.name, "trial": trial, "m": p.m, "n": p.n, "d": d,
                          "status_PT": res.status.value, "iterations_PT": res.iterations},
                    measured={"detection_outcome": bool(hit)},
                    parameters=params,
                )
                rep.theoretical = rep.recompute()
                reports.append(rep)
        rows.append({
            "epsilon": eps,
            "d": min(dims) if len(dims) == 1 else "/".join(str(x) for x in sorted(dims)),
            "instances": total,
            "detected": detected,
            "rate": detected / total if total else float("nan"),
            "numerical": numerical,
            "not_detected": total - detected - numerical,
            "condition_holds": holds_all,
            "max_lhs": max_lhs,
        })
    return rows, reports


# --- aggregation and output -------------------------------------------------

SUMMARY_COLUMNS = ("column", "count", "mean", "std", "std_over_5pct")


def summarize(table, columns=("rel_err_PT", "rel_err_retrieved", "value_P", "value_PT", "cpu", "cpu_T")) -> list:
    """Mean and standard deviation per numeric column, flagging std > 5% of |mean|."""
    rows = []
    for col in columns:
        vals = []
        for r in table:
            v = (r.flat() if isinstance(r, ErrorReport) else r).get(col)
            if isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v):
                vals.append(float(v))
        if not vals:
            rows.append({"column": col, "count": 0, "mean": None, "std": None, "std_over_5pct": None})
            continue
        mean = float(np.mean(vals))
        std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        rows.append({"column": col, "count": len(vals), "mean": mean, "std": std,
                     "std_over_5pct": std > 0.05 * abs(mean)})
    return rows


def containment_rates(table) -> dict:
    """Fraction of reports whose measurement sits inside each bound."""
    tallies = {}
    for r in table:
        for k, v in r.containment().items():
            if v is not None:
                hit, tot = tallies.get(k, (0, 0))
                tallies[k] = (hit + v, tot + 1)
    return {k: hit / tot for k, (hit, tot) in tallies.items()}


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(table, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in table:
        row = r.flat() if isinstance(r, ErrorReport) else r
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def to_json(table) -> str:
    docs = [r.to_dict() if isinstance(r, ErrorReport) else r for r in table]
    return json.dumps(docs, indent=1)


def emit(table, fmt: str = "csv", path=None, columns=PIPELINE_COLUMNS) -> str:
    """Render a table as CSV (fixed column order) or JSON and optionally write it."""
    if fmt == "csv":
        text = to_csv(table, columns)
    elif fmt == "json":
        text = to_json(table)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def load_reports(path) -> list:
    return [ErrorReport.from_dict(d) for d in json.loads(Path(path).read_text())]
