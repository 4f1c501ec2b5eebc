"""Command-line entry point: generate, solve, experiment, report, validate.

Exit codes: 0 success, 1 usage, 2 data error, 3 infeasible, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import secrets
import sys
from dataclasses import replace
from pathlib import Path

from . import benchgen
from .decoder import DISPLACEMENT_MODES, render_gantt, solution_to_dict
from .errors import (
    GenError,
    InfeasibleTask,
    InfeasibleWorkload,
    InvalidConfig,
    InvalidInstance,
    MmwalbpError,
    ParseError,
    PoolError,
)
from .experiment import ExperimentPlan, read_raw, render_report, run_experiment
from .model import dump_json, load_manifest
from .optimizers import ALGORITHMS, config_to_dict, load_config, make_config, run, write_trace
from .validate import validate_solution

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE, EXIT_INTERNAL = range(5)

log = logging.getLogger("mmwalbp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(value):
    if value is None:
        value = secrets.randbelow(2**31)
        print(f"seed: {value}")
    return value


# -- generate ---------------------------------------------------------------------


def cmd_generate(args) -> int:
    source = args.source
    if source in benchgen.BUNDLED:
        source = str(benchgen.bundled_source(source))
    plan = None
    if args.plan:
        try:
            plan = tuple(int(q) for q in args.plan.split(","))
        except ValueError:
            raise UsageError("--plan must be a comma-separated list of integers") from None
        if len(plan) != args.models:
            raise UsageError(f"--plan lists {len(plan)} quantities for {args.models} models")
    elif args.models not in benchgen.DEFAULT_PRODUCTION:
        raise UsageError("--models must be 4 or 50 unless --plan is given")
    seed = _seed(args.seed)
    zone_seed, inc_seed, time_seed = benchgen.seeds_from(seed)
    spec = benchgen.GenSpec(
        source=source,
        n_models=args.models,
        plan=plan,
        zone_seed=args.zone_seed if args.zone_seed is not None else zone_seed,
        incidence_seed=args.incidence_seed if args.incidence_seed is not None else inc_seed,
        time_seed=args.time_seed if args.time_seed is not None else time_seed,
        cycle_time=args.cycle_time,
        max_workplaces=args.max_workplaces,
        require_presence=not args.no_presence_guard,
        name=args.name,
    )
    generated = benchgen.generate(spec)
    generated.manifest["generation"]["master_seed"] = seed
    dump_json(generated.manifest, args.out)
    gen = generated.manifest["generation"]
    print(f"wrote {args.out}: n={generated.instance.n}, workload={gen['workload']:.2f}, "
          f"workload/C={gen['workload_ratio']:.2f}, lower bound {gen['lower_bound']}")
    return EXIT_OK


# -- solve ------------------------------------------------------------------------

FSS_FLAGS = {
    "pop": "population",
    "iters": "iterations",
    "step_ind": "step_ind",
    "step_vol": "step_vol",
    "w_scale": "w_scale",
    "alpha0": "alpha0",
    "alpha_decay": "alpha_decay",
}
PSO_FLAGS = {"pop": "population", "iters": "iterations", "c1": "c1", "c2": "c2"}


def _solver_config(args):
    if args.config:
        config = load_config(args.config)
        if args.algo and args.algo != config.algorithm:
            raise UsageError(f"--algo {args.algo} conflicts with config algorithm {config.algorithm}")
    else:
        config = make_config(args.algo or "fss-sar")
    flags = PSO_FLAGS if config.algorithm == "pso" else FSS_FLAGS
    overrides = {}
    for flag, name in {**FSS_FLAGS, **PSO_FLAGS}.items():
        value = getattr(args, flag)
        if value is None:
            continue
        if flag not in flags:
            raise UsageError(f"--{flag.replace('_', '-')} does not apply to {config.algorithm}")
        overrides[name] = value
    try:
        config = replace(config, **overrides)
    except TypeError as exc:
        raise InvalidConfig(str(exc)) from exc
    if args.seed is not None:
        return replace(config, seed=args.seed)
    return config if args.config else replace(config, seed=_seed(None))


def cmd_solve(args) -> int:
    inst = load_manifest(args.manifest)
    if args.max_workplaces is not None:
        inst = inst.replace(max_workplaces=args.max_workplaces)
    config = _solver_config(args)
    result = run(config, inst, mode=args.displacement_mode)
    sol = result.solution

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = args.prefix or Path(args.manifest).stem
    payload = solution_to_dict(sol, inst)
    payload["config"] = config_to_dict(config)
    dump_json(payload, out / f"{stem}.solution.json")
    (out / f"{stem}.gantt.txt").write_text(render_gantt(sol))
    write_trace(result.trace, out / f"{stem}.trace.csv")
    print(f"{config.algorithm}: open workplaces {sol.open_workplaces} (lower bound {inst.lower_bound}), "
          f"fitness {sol.fitness.primary:.4f}, total workload {sol.total_workload:.2f}")
    print(f"wrote {out / (stem + '.solution.json')}, .gantt.txt, .trace.csv")
    return EXIT_OK


# -- experiment / report -----------------------------------------------------------


def cmd_experiment(args) -> int:
    plan = ExperimentPlan(
        instances=list(args.manifests),
        algorithms=tuple(args.algos),
        runs_per_cell=args.runs,
        group_size=args.group,
        iterations=args.iters,
        base_seed=_seed(args.seed),
        population=args.pop,
    )
    rows = run_experiment(plan, out_csv=args.out, workers=args.workers, solutions_dir=args.solutions_dir)
    failed = sum(1 for r in rows if r["error"])
    print(f"wrote {args.out}: {len(rows)} runs, {failed} failed")
    if args.report_dir:
        render_report(rows, args.group, args.report_dir)
        print(f"wrote report to {args.report_dir}")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = read_raw(args.raw)
    summary = render_report(rows, args.group, args.out_dir)
    for inst in summary["instances"]:
        for crit, cell in summary["anova"][inst].items():
            if cell is None:
                continue
            verdict = "differ" if cell["different"] else "no evidence of a difference"
            print(f"{inst} {crit}: F={cell['f_calculated']:.3f} (v1={cell['v1']}, v2={cell['v2']}, "
                  f"F_ref={cell['f_ref']:.3f}; fixed {cell['f_ref_fixed']}) -> {verdict}")
    print(f"wrote report to {args.out_dir}")
    return EXIT_OK


# -- validate ---------------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        solution = json.loads(Path(args.solution).read_text())
        manifest = json.loads(Path(args.manifest).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInstance(f"not valid JSON: {exc}") from exc
    try:
        problems = validate_solution(solution, manifest)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InvalidInstance(f"malformed solution or manifest: {exc!r}") from exc
    for p in problems:
        print(f"violation: {p}")
    if problems:
        print(f"INVALID: {len(problems)} violation(s)")
        return EXIT_INFEASIBLE
    print("valid")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmwalbp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="derive a mixed-model instance manifest from a .alb file")
    g.add_argument("--source", required=True, help=".alb path or one of: small, medium, large (bundled)")
    g.add_argument("--models", type=int, default=4)
    g.add_argument("--plan", help="comma-separated demand per model (required unless --models is 4 or 50)")
    g.add_argument("--seed", type=int, help="master seed for zones/incidence (random if omitted)")
    g.add_argument("--zone-seed", type=int)
    g.add_argument("--incidence-seed", type=int)
    g.add_argument("--time-seed", type=int)
    g.add_argument("--cycle-time", type=float, default=1000.0)
    g.add_argument("--max-workplaces", type=int, default=3)
    g.add_argument("--no-presence-guard", action="store_true", help="allow tasks absent from every model")
    g.add_argument("--name")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="optimise one instance")
    s.add_argument("manifest")
    s.add_argument("--algo", choices=ALGORITHMS)
    s.add_argument("--config", help="JSON file with optimizer settings")
    s.add_argument("--seed", type=int)
    s.add_argument("--iters", type=int)
    s.add_argument("--pop", type=int)
    s.add_argument("--step-ind", type=float)
    s.add_argument("--step-vol", type=float)
    s.add_argument("--w-scale", type=float)
    s.add_argument("--alpha0", type=float)
    s.add_argument("--alpha-decay", type=float)
    s.add_argument("--c1", type=float)
    s.add_argument("--c2", type=float)
    s.add_argument("--max-workplaces", type=int)
    s.add_argument("--displacement-mode", choices=DISPLACEMENT_MODES, default="home")
    s.add_argument("--out-dir", default=".")
    s.add_argument("--prefix", help="output file stem (default: manifest stem)")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="repeated runs over instances and algorithms")
    e.add_argument("manifests", nargs="+")
    e.add_argument("--algos", nargs="+", choices=ALGORITHMS, default=list(ALGORITHMS))
    e.add_argument("--runs", type=int, default=450)
    e.add_argument("--group", type=int, default=15)
    e.add_argument("--iters", type=int, default=500)
    e.add_argument("--pop", type=int, default=30)
    e.add_argument("--seed", type=int)
    e.add_argument("--workers", type=int, help="parallel runs (default: $MMWALBP_WORKERS or 1)")
    e.add_argument("--solutions-dir")
    e.add_argument("--report-dir")
    e.add_argument("--out", required=True, help="raw results CSV (resumed if it exists)")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("report", help="ANOVA and confidence-interval report from raw results")
    r.add_argument("raw")
    r.add_argument("--group", type=int, default=15)
    r.add_argument("--out-dir", required=True)
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("validate", help="check a solution against its instance manifest")
    v.add_argument("solution")
    v.add_argument("manifest")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, InvalidConfig) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleTask as exc:
        print(f"infeasible: task {exc.task_id}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InfeasibleWorkload as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParseError, InvalidInstance, GenError, PoolError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MmwalbpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - last-resort guard
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
