"""Command-line front end.

Subcommands: generate, solve, project, pipeline, infeas-trial, bounds.
Options come from an optional JSON config file (``--config``) overridden by
flags. Exit codes: 0 success, 1 configuration error, 2 some instance
ended with a Numerical solver status.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments as ex
from .generate import generate
from .io import load_program, program_to_dict, save_program
from .pipeline import project_program
from .sketch import SketchFamily, embed_dimension, sample_rp
from .solver import Certificate, SolverOptions, Status, solve, verify_certificate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

SOLVE_COLUMNS = ("instance", "status", "objective", "dual_objective", "primal_eq", "gap",
                 "iterations", "certificate_verified")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_sketch_flags(p):
    p.add_argument("--epsilon", type=float, help="projection accuracy in (0, 1)")
    p.add_argument("--c0", type=float, help="constant in d = c0 ln(m) / eps^2")
    p.add_argument("--d", type=int, help="fixed projected dimension (overrides epsilon)")
    p.add_argument("--density", type=float, help="nonzero density of the sparse projection")
    p.add_argument("--family", choices=[f.value for f in SketchFamily], help="projection family")


def _add_solver_flags(p):
    p.add_argument("--solver", help="registered solver name")
    p.add_argument("--tol", type=float, help="solver tolerance")
    p.add_argument("--max-iter", type=int, help="solver iteration cap")


def _add_batch_flags(p):
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("instances", nargs="*", type=Path, help="instance files (native JSON)")
    p.add_argument("--side", type=int, help="generate PSD instances of this side")
    p.add_argument("--m", type=int, help="constraints per generated instance")
    p.add_argument("--count", type=int, default=10, help="number of generated instances")
    p.add_argument("--instance-density", type=float, default=0.5, help="density of generated data")
    p.add_argument("--cost", choices=["identity", "random"], default="identity")
    p.add_argument("--trials", type=int, help="projections per instance")
    p.add_argument("--u", type=float, help="deviation parameter u of the bounds")
    p.add_argument("--c2", type=float, help="constant C2 of the bounds")
    p.add_argument("--c-tilde", type=float, help="constant C~ of the width bound")


def _add_output_flags(p):
    p.add_argument("--output", type=Path, help="output file (stdout when omitted)")
    p.add_argument("--format", choices=["csv", "json"], help="output format")
    p.add_argument("--seed", type=int, help="master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rpconic", description="Random projections of symmetric conic programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write random instances and a manifest")
    g.add_argument("--side", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--instance-density", type=float, default=0.5)
    g.add_argument("--feasibility", choices=["feasible", "infeasible"], default="feasible")
    g.add_argument("--cost", choices=["identity", "random"], default="identity")
    g.add_argument("--theta-factor", type=float, default=2.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", type=Path, required=True, help="output directory")

    s = sub.add_parser("solve", help="solve instances with a registered solver")
    s.add_argument("instances", nargs="+", type=Path)
    _add_solver_flags(s)
    _add_output_flags(s)

    pr = sub.add_parser("project", help="write the projected version of an instance")
    pr.add_argument("instance", type=Path)
    _add_sketch_flags(pr)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--output", type=Path, required=True)

    pl = sub.add_parser("pipeline", help="original versus projected runs with bound columns")
    _add_batch_flags(pl)
    _add_sketch_flags(pl)
    _add_solver_flags(pl)
    _add_output_flags(pl)

    it = sub.add_parser("infeas-trial", help="projected infeasibility detection rates")
    _add_batch_flags(it)
    _add_sketch_flags(it)
    it.set_defaults(epsilon=None)
    it.add_argument("--epsilons", type=float, nargs="+", help="several epsilon values")
    it.add_argument("--admissible", action="store_true",
                    help="add the largest epsilon satisfying the infeasibility condition on all instances")
    it.add_argument("--reports", type=Path, help="also write per-instance reports (JSON)")
    _add_solver_flags(it)
    _add_output_flags(it)

    b = sub.add_parser("bounds", help="bound containment rates over a batch")
    _add_batch_flags(b)
    _add_sketch_flags(b)
    _add_solver_flags(b)
    _add_output_flags(b)
    return parser


def _config_from_args(args, feasibility="feasible") -> ex.ExperimentConfig:
    doc = {}
    if getattr(args, "config", None):
        try:
            doc = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    if args.seed is not None:
        doc["seed"] = args.seed
    try:
        cfg = ex.ExperimentConfig.from_dict(doc)
        seed = cfg.seed
        gen = cfg.gen
        if args.side is not None:
            if args.m is None:
                raise ConfigError("--side needs --m")
            gen = gen + tuple(ex.batch_specs(side=args.side, m=args.m, count=args.count, seed=seed,
                                             density=args.instance_density, feasibility=feasibility,
                                             cost_kind=args.cost))
        solver = cfg.solver
        solver = replace(
            solver,
            solver=args.solver or solver.solver,
            tol=args.tol if args.tol is not None else solver.tol,
            max_iter=args.max_iter if args.max_iter is not None else solver.max_iter,
            seed=seed,
        )
        cfg = cfg.with_overrides(
            gen=gen,
            instances=cfg.instances + tuple(str(p) for p in args.instances),
            epsilon=args.epsilon,
            epsilons=tuple(args.epsilons) if getattr(args, "epsilons", None) else None,
            c0=args.c0,
            d_override=args.d,
            density=args.density,
            family=SketchFamily(args.family) if args.family else None,
            trials=args.trials,
            u=args.u,
            c2=args.c2,
            c_tilde=args.c_tilde,
            output=args.format,
            seed=seed,
            solver=solver,
        )
        ex.solver_check(cfg.solver.solver)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    if not cfg.sources():
        raise ConfigError("no instances: pass files, --side/--m, or a config with gen/batch/instances")
    return cfg


def _write(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_generate(args) -> int:
    out = args.output
    out.mkdir(parents=True, exist_ok=True)
    specs = ex.batch_specs(side=args.side, m=args.m, count=args.count, seed=args.seed,
                           density=args.instance_density, feasibility=args.feasibility,
                           cost_kind=args.cost, theta_factor=args.theta_factor)
    manifest = []
    for i, gs in enumerate(specs):
        p, extra = generate(gs)
        meta = {"gen": gs.to_dict()}
        if isinstance(extra, Certificate):
            meta["certificate"] = {"y_hat": extra.y_hat.tolist(), "nu_hat": extra.nu_hat}
        else:
            meta["witness"] = extra.data.tolist()
        path = out / f"instance-{i:03d}.json"
        save_program(p, path, meta)
        manifest.append({"file": path.name, "name": p.name, "gen": gs.to_dict()})
    (out / "manifest.json").write_text(json.dumps({"master_seed": args.seed, "instances": manifest}, indent=1))
    print(f"wrote {len(specs)} instances to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        ex.solver_check(args.solver or "builtin")
        opts = SolverOptions(
            solver=args.solver or "builtin",
            tol=args.tol if args.tol is not None else SolverOptions.tol,
            max_iter=args.max_iter if args.max_iter is not None else SolverOptions.max_iter,
            seed=args.seed or 0,
        )
        programs = [(path, load_program(path)) for path in args.instances]
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    rows = []
    for path, p in programs:
        r = solve(p, opts)
        rows.append({
            "instance": p.name or path.stem,
            "status": r.status.value,
            "objective": r.objective,
            "dual_objective": r.dual_objective,
            "primal_eq": r.primal_eq,
            "gap": r.gap,
            "iterations": r.iterations,
            "certificate_verified": None if r.certificate is None else verify_certificate(p, r.certificate),
        })
    _write(ex.emit(rows, args.format or "csv", columns=SOLVE_COLUMNS), args.output)
    return EXIT_NUMERICAL if any(r["status"] == Status.NUMERICAL.value for r in rows) else EXIT_OK


def cmd_project(args) -> int:
    try:
        p = load_program(args.instance)
        if args.d is not None:
            d = min(args.d, p.m)
        elif args.epsilon is not None:
            d = embed_dimension(p.m, args.epsilon, args.c0 or ex.DEFAULT_C0)
        else:
            raise ConfigError("project needs --epsilon or --d")
        sketch = sample_rp(d, p.m, args.family or SketchFamily.ACHLIOPTAS_SPARSE,
                           args.density or ex.DEFAULT_DENSITY, args.seed,
                           epsilon=args.epsilon, c0=args.c0 or ex.DEFAULT_C0)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    pt = project_program(p, sketch)
    doc = program_to_dict(pt.program, {"sketch": sketch.metadata(), "source": pt.source_id})
    Path(args.output).write_text(json.dumps(doc))
    print(f"projected {p.m} -> {d} constraints", file=sys.stderr)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    cfg = _config_from_args(args)
    table = ex.run_pipeline(cfg)
    _write(ex.emit(table, cfg.output), args.output)
    timing = ex.emit(table, "csv", columns=ex.TIMING_COLUMNS)
    if args.output is not None:
        Path(str(args.output) + ".timing.csv").write_text(timing)
    _print_summary(ex.summarize(table))
    return EXIT_NUMERICAL if ex.any_numerical(table) else EXIT_OK


def cmd_infeas_trial(args) -> int:
    cfg = _config_from_args(args, feasibility="infeasible")
    try:
        instances = ex.load_infeasible(cfg)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    epsilons = list(cfg.epsilons or (cfg.epsilon,))
    if args.admissible:
        epsilons.insert(0, ex.largest_admissible_epsilon(instances))
    rows, reports = ex.run_infeasibility_trial(replace(cfg, epsilons=tuple(epsilons)), instances)
    _write(ex.emit(rows, cfg.output, columns=ex.DETECTION_COLUMNS), args.output)
    if args.reports is not None:
        ex.emit(reports, "json", args.reports)
    return EXIT_NUMERICAL if any(r["numerical"] for r in rows) else EXIT_OK


def cmd_bounds(args) -> int:
    cfg = _config_from_args(args)
    table = ex.run_pipeline(cfg)
    rates = ex.containment_rates(table)
    rows = [{"bound": k, "rate": v, "u": cfg.u, "C2": cfg.c2} for k, v in rates.items()]
    _write(ex.emit(rows, cfg.output, columns=("bound", "rate", "u", "C2")), args.output)
    return EXIT_NUMERICAL if ex.any_numerical(table) else EXIT_OK


def _print_summary(rows) -> None:
    for r in rows:
        if r["count"]:
            flag = "  (std > 5% of mean)" if r["std_over_5pct"] else ""
            print(f"{r['column']:>20}: mean {r['mean']:.6g}  std {r['std']:.3g}  n={r['count']}{flag}",
                  file=sys.stderr)


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "project": cmd_project,
    "pipeline": cmd_pipeline,
    "infeas-trial": cmd_infeas_trial,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"rpconic: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        # --help exits with 0
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
