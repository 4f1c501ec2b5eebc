"""Repeated-run experiments and the statistical comparison report."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .decoder import solution_to_dict
from .errors import MmwalbpError
from .model import SCHEMA_VERSION, Instance, dump_json, load_manifest
from .optimizers import ALGORITHMS, make_config, run
from .stats import FIXED_F_REF, f_critical, one_way_anova, pool_samples

log = logging.getLogger(__name__)

RAW_COLUMNS = [
    "instance_id",
    "algorithm",
    "run",
    "seed",
    "m",
    "fitness",
    "smoothness",
    "workload",
    "seconds",
    "error",
    "schema_version",
]
CRITERIA = ("smoothness", "workload")
WORKERS_ENV = "MMWALBP_WORKERS"


@dataclass
class ExperimentPlan:
    instances: list = field(default_factory=list)  # manifest paths or Instance objects
    algorithms: Sequence[str] = ALGORITHMS
    runs_per_cell: int = 450
    group_size: int = 15
    iterations: int = 500
    base_seed: int = 0
    population: int = 30
    overrides: dict = field(default_factory=dict)  # algorithm -> config overrides

    def __post_init__(self):
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise MmwalbpError(f"unknown algorithm {algo!r}")
        if self.group_size < 1 or self.runs_per_cell % self.group_size:
            raise MmwalbpError(
                f"runs_per_cell={self.runs_per_cell} is not divisible by group_size={self.group_size}"
            )

    @property
    def samples_per_cell(self) -> int:
        return self.runs_per_cell // self.group_size


def run_seed(base_seed: int, instance_index: int, algorithm: str, run_index: int) -> int:
    ss = np.random.SeedSequence(base_seed, spawn_key=(instance_index, ALGORITHMS.index(algorithm), run_index))
    return int(ss.generate_state(1)[0])


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _load(instances) -> list[Instance]:
    loaded = []
    for item in instances:
        if isinstance(item, Instance):
            loaded.append(item)
            continue
        try:
            loaded.append(load_manifest(item))
        except (OSError, MmwalbpError) as exc:
            raise MmwalbpError(f"cannot load instance {item}: {exc}") from exc
    return loaded


def _one_run(task):
    inst, algorithm, run_index, seed, iterations, population, overrides, solutions_dir = task
    start = time.perf_counter()
    row = {
        "instance_id": inst.name,
        "algorithm": algorithm,
        "run": run_index,
        "seed": seed,
        "schema_version": SCHEMA_VERSION,
        "error": "",
    }
    try:
        config = make_config(algorithm, seed=seed, iterations=iterations, population=population, **overrides)
        sol = run(config, inst).solution
        fit = sol.fitness
        row.update(m=fit.open, fitness=fit.primary, smoothness=fit.smoothness, workload=fit.workload)
        if solutions_dir is not None:
            path = Path(solutions_dir) / f"{inst.name}__{algorithm}__{run_index}.json"
            dump_json(solution_to_dict(sol, inst), path)
    except Exception as exc:  # a failed run is recorded, not fatal
        row.update(m="", fitness="", smoothness="", workload="", error=f"{type(exc).__name__}: {exc}")
    row["seconds"] = round(time.perf_counter() - start, 4)
    return row


def _fmt(value):
    return repr(value) if isinstance(value, float) else value


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_raw(rows: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RAW_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k, "")) for k in RAW_COLUMNS})


def read_raw(path: str | Path) -> list[dict]:
    rows = _read_rows(Path(path))
    out = []
    for row in rows:
        parsed = dict(row)
        parsed["run"] = int(row["run"])
        parsed["seed"] = int(row["seed"])
        for key in ("m",):
            parsed[key] = int(row[key]) if row[key] != "" else None
        for key in ("fitness", "smoothness", "workload", "seconds"):
            parsed[key] = float(row[key]) if row[key] != "" else None
        out.append(parsed)
    return out


def run_experiment(
    plan: ExperimentPlan,
    out_csv: str | Path | None = None,
    workers: int | None = None,
    solutions_dir: str | Path | None = None,
) -> list[dict]:
    """Execute every (instance, algorithm, run) cell; rows are appended to ``out_csv`` as they finish.

    Completed rows already present in ``out_csv`` (same seed) are reused, so an
    interrupted experiment can be resumed by rerunning the same plan.
    """
    instances = _load(plan.instances)
    if solutions_dir is not None:
        Path(solutions_dir).mkdir(parents=True, exist_ok=True)
    workers = default_workers() if workers is None else max(1, workers)

    done: dict[tuple, dict] = {}
    if out_csv is not None and Path(out_csv).exists():
        for row in read_raw(out_csv):
            if not row["error"]:
                done[(row["instance_id"], row["algorithm"], row["run"], row["seed"])] = row

    tasks, keys = [], []
    for idx, inst in enumerate(instances):
        for algorithm in plan.algorithms:
            for r in range(plan.runs_per_cell):
                seed = run_seed(plan.base_seed, idx, algorithm, r)
                key = (inst.name, algorithm, r, seed)
                keys.append(key)
                if key not in done:
                    overrides = dict(plan.overrides.get(algorithm, {}))
                    tasks.append((inst, algorithm, r, seed, plan.iterations, plan.population, overrides,
                                  None if solutions_dir is None else str(solutions_dir)))

    results = dict(done)
    fh = writer = None
    if out_csv is not None:
        fresh = not Path(out_csv).exists() or not done
        fh = open(out_csv, "w" if fresh else "a", newline="")
        writer = csv.DictWriter(fh, fieldnames=RAW_COLUMNS)
        if fresh:
            writer.writeheader()
    try:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                stream = pool.map(_one_run, tasks, chunksize=1)
                for row in stream:
                    _record(row, results, writer, fh)
        else:
            for task in tasks:
                _record(_one_run(task), results, writer, fh)
    finally:
        if fh is not None:
            fh.close()

    rows = [results[k] for k in keys]
    if out_csv is not None:
        write_raw(rows, out_csv)
    return rows


def _record(row, results, writer, fh):
    results[(row["instance_id"], row["algorithm"], row["run"], row["seed"])] = row
    if row["error"]:
        log.warning("run failed: %s %s run %s: %s", row["instance_id"], row["algorithm"], row["run"], row["error"])
    if writer is not None:
        writer.writerow({k: _fmt(row.get(k, "")) for k in RAW_COLUMNS})
        fh.flush()


# -- reporting ----------------------------------------------------------------------


def _ordered(values: Iterable[str]) -> list[str]:
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def analyse(rows: Sequence[dict], group_size: int) -> dict:
    """Best m per cell plus, per instance and criterion, the ANOVA over pooled samples."""
    ok = [r for r in rows if not r.get("error") and r.get("m") not in (None, "")]
    instances = _ordered(r["instance_id"] for r in rows)
    algorithms = [a for a in ALGORITHMS if any(r["algorithm"] == a for r in rows)]

    best_m = {
        inst: {
            algo: min((int(r["m"]) for r in ok if r["instance_id"] == inst and r["algorithm"] == algo), default=None)
            for algo in algorithms
        }
        for inst in instances
    }
    anova = {}
    for inst in instances:
        anova[inst] = {}
        for crit in CRITERIA:
            groups, labels = [], []
            for algo in algorithms:
                cell = sorted((r for r in ok if r["instance_id"] == inst and r["algorithm"] == algo), key=lambda r: int(r["run"]))
                values = [float(r[crit]) for r in cell]
                usable = len(values) - len(values) % group_size
                if usable // group_size >= 2:
                    groups.append(pool_samples(values[:usable], group_size))
                    labels.append(algo)
            if len(groups) < 2:
                anova[inst][crit] = None
                continue
            res = one_way_anova(groups)
            f_ref = f_critical(res.df_between, res.df_within)
            anova[inst][crit] = {
                "algorithms": labels,
                "f_calculated": res.f_calculated,
                "v1": res.df_between,
                "v2": res.df_within,
                "p_value": res.p_value,
                "f_ref": f_ref,
                "f_ref_fixed": FIXED_F_REF,
                "different": res.f_calculated > f_ref,
                "different_fixed_threshold": res.f_calculated > FIXED_F_REF,
                "pooled_sd": res.pooled_sd,
                "means": list(res.group_means),
                "ci_half_widths": list(res.ci_half_widths),
                "samples": list(res.group_sizes),
            }
    return {
        "schema_version": SCHEMA_VERSION,
        "group_size": group_size,
        "instances": instances,
        "algorithms": algorithms,
        "runs": len(rows),
        "failed_runs": len(rows) - len(ok),
        "best_m": best_m,
        "anova": anova,
        "notes": "Pooled sample means are assumed normally distributed; no normality test is run.",
    }


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


def render_report(rows: Sequence[dict], group_size: int, out_dir: str | Path) -> dict:
    """Write best_m.csv, anova.csv, anova_verdicts.csv, ci.csv and summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = analyse(rows, group_size)
    instances, algorithms = summary["instances"], summary["algorithms"]

    with open(out / "best_m.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", *instances, "schema_version"])
        for algo in algorithms:
            w.writerow([algo, *("" if summary["best_m"][i][algo] is None else summary["best_m"][i][algo] for i in instances), SCHEMA_VERSION])

    with open(out / "anova.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["criterion", *instances, "schema_version"])
        if instances:
            for crit in CRITERIA:
                cells = [summary["anova"][i][crit] for i in instances]
                w.writerow([crit, *("" if c is None else _fmt(c["f_calculated"]) for c in cells), SCHEMA_VERSION])

    with open(out / "anova_verdicts.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance_id", "criterion", "f_calculated", "v1", "v2", "f_ref", "different",
                     "f_ref_fixed", "different_fixed_threshold", "schema_version"])
        for inst in instances:
            for crit in CRITERIA:
                c = summary["anova"][inst][crit]
                if c is not None:
                    w.writerow([inst, crit, _fmt(c["f_calculated"]), c["v1"], c["v2"], _fmt(c["f_ref"]), c["different"],
                                c["f_ref_fixed"], c["different_fixed_threshold"], SCHEMA_VERSION])

    with open(out / "ci.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance_id", "criterion", "algorithm", "mean", "half_width", "lower", "upper", "samples", "schema_version"])
        for inst in instances:
            for crit in CRITERIA:
                c = summary["anova"][inst][crit]
                if c is None:
                    continue
                for algo, mean, half, k in zip(c["algorithms"], c["means"], c["ci_half_widths"], c["samples"]):
                    w.writerow([inst, crit, algo, _fmt(mean), _fmt(half), _fmt(mean - half), _fmt(mean + half), k, SCHEMA_VERSION])

    (out / "summary.json").write_text(json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")
    return summary
