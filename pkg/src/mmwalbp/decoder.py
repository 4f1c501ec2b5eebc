"""From a continuous position vector to a workstation/workplace schedule.

Pipeline: random-keys ranking -> precedence repair -> station-by-station
assignment of tasks to zone-anchored workplaces, with displacement-time
correction and precedence-driven start times inside each station.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InfeasibleTask, InvalidPosition
from .model import SCHEMA_VERSION, TOL, Instance
from .objective import FitnessValue, fitness_from_workloads
from .precedence import CompletePrecedenceMatrix, correct_sequence

DISPLACEMENT_MODES = ("home", "previous")


@dataclass(frozen=True)
class ScheduledTask:
    task_id: int
    workstation_index: int
    workplace_zone: int
    start: float
    end: float
    corrected_duration: float
    displacement_added: float


@dataclass(frozen=True)
class Workplace:
    zone: int
    assigned: tuple[ScheduledTask, ...]

    @property
    def workload(self) -> float:
        return sum((t.corrected_duration for t in self.assigned), 0.0)

    @property
    def idle(self) -> float:
        gaps, clock = 0.0, 0.0
        for t in self.assigned:
            gaps += t.start - clock
            clock = t.end
        return gaps


@dataclass(frozen=True)
class BalancingSolution:
    workstations: tuple[tuple[Workplace, ...], ...]
    fitness: FitnessValue
    cycle_time: float
    order: tuple[int, ...] = ()
    displacement_mode: str = "home"

    @property
    def workplaces(self) -> list[Workplace]:
        return [wp for station in self.workstations for wp in station]

    @property
    def open_workplaces(self) -> int:
        return self.fitness.open

    @property
    def total_workload(self) -> float:
        return self.fitness.workload

    def task_map(self) -> dict[int, ScheduledTask]:
        return {t.task_id: t for wp in self.workplaces for t in wp.assigned}


def random_keys(position, n: int | None = None) -> list[int]:
    """Rank transform: the smallest coordinate becomes 1, the next 2, and so on.

    Ties go to the lower dimension index.
    """
    x = np.asarray(position, dtype=float)
    if n is not None and x.shape != (n,):
        raise InvalidPosition(f"position has shape {x.shape}, expected ({n},)")
    if np.isnan(x).any():
        raise InvalidPosition("position contains NaN")
    ranks = np.empty(x.shape[0], dtype=np.int64)
    ranks[np.argsort(x, kind="stable")] = np.arange(1, x.shape[0] + 1)
    return ranks.tolist()


# A raw schedule is a list of stations; each station a list of (zone, tasks)
# workplaces; each task a tuple (task_id, start, end, duration, displacement).
RawSchedule = list


def _direct_predecessors(inst: Instance) -> tuple[tuple[int, ...], ...]:
    cached = inst.__dict__.get("_direct_preds")
    if cached is None:
        preds: list[list[int]] = [[] for _ in range(inst.n)]
        for a, b in inst.edges:
            preds[b - 1].append(a - 1)
        cached = tuple(tuple(sorted(set(p))) for p in preds)
        inst.__dict__["_direct_preds"] = cached
    return cached


def _fill_station(tasks: Sequence[int], inst: Instance, preds, finish, station_id, owner, mode):
    """Steps 2-5 for one station; returns (workplaces, number of tasks placed)."""
    times, zones, cost = inst.times, inst.zones, inst.displacement.cost
    C = inst.cycle_time

    totals: dict[int, float] = {}
    for t in tasks:
        totals[zones[t]] = totals.get(zones[t], 0.0) + times[t]
    ranked = sorted(totals, key=lambda z: (-totals[z], z))
    opened = sorted(ranked[: inst.max_workplaces])

    # workplace state: [home zone, clock, last zone, scheduled tasks]
    wps = [[z, 0.0, z, []] for z in opened]
    by_zone: dict[int, list] = {}
    home = mode == "home"
    placed = 0
    for t in tasks:
        z = zones[t]
        candidates = by_zone.get(z)
        if candidates is None:
            candidates = sorted(wps, key=lambda wp: (wp[0] != z, cost[wp[0]][z], wp[0]))
            by_zone[z] = candidates
        ready = 0.0
        for p in preds[t]:
            if owner[p] == station_id and finish[p] > ready:
                ready = finish[p]
        base = times[t]
        for wp in candidates:
            disp = cost[wp[0]][z] if home else cost[wp[2]][z]
            start = wp[1] if wp[1] > ready else ready
            end = start + base + disp
            if end <= C + TOL:
                wp[1] = end
                wp[2] = z
                wp[3].append((t + 1, start, end, base + disp, disp))
                finish[t] = end
                owner[t] = station_id
                break
        else:
            break
        placed += 1
    return [(wp[0], wp[3]) for wp in wps if wp[3]], placed


def _schedule(order: Sequence[int], inst: Instance, mode: str = "home") -> RawSchedule:
    if mode not in DISPLACEMENT_MODES:
        raise ValueError(f"unknown displacement mode {mode!r}")
    n = inst.n
    times = inst.times
    preds = _direct_predecessors(inst)
    capacity = inst.max_workplaces * inst.cycle_time
    finish = [0.0] * n
    owner = [-1] * n
    pool = [t - 1 for t in order]
    stations: RawSchedule = []
    pos = 0
    while pos < n:
        load, end = 0.0, pos
        while end < n and load + times[pool[end]] <= capacity + TOL:
            load += times[pool[end]]
            end += 1
        sid = len(stations)
        workplaces, placed = _fill_station(pool[pos:end], inst, preds, finish, sid, owner, mode)
        if placed == 0:
            workplaces, placed = _fill_station(pool[pos : pos + 1], inst, preds, finish, sid, owner, mode)
            if placed == 0:
                raise InfeasibleTask(pool[pos] + 1)
        stations.append(workplaces)
        pos += placed
    return stations


def raw_fitness(raw: RawSchedule, cycle_time: float) -> FitnessValue:
    return fitness_from_workloads(
        (sum((task[3] for task in tasks), 0.0) for station in raw for _, tasks in station), cycle_time
    )


def _to_solution(raw: RawSchedule, inst: Instance, order, mode: str) -> BalancingSolution:
    stations = tuple(
        tuple(
            Workplace(zone, tuple(ScheduledTask(tid, s, zone, st, en, du, di) for tid, st, en, du, di in tasks))
            for zone, tasks in station
        )
        for s, station in enumerate(raw)
    )
    return BalancingSolution(
        workstations=stations,
        fitness=raw_fitness(raw, inst.cycle_time),
        cycle_time=inst.cycle_time,
        order=tuple(order),
        displacement_mode=mode,
    )


def assign(order: Sequence[int], inst: Instance, mode: str = "home") -> BalancingSolution:
    """Build the workstation/workplace schedule for a precedence-feasible task order."""
    return _to_solution(_schedule(order, inst, mode), inst, order, mode)


def decode(position, inst: Instance, m: CompletePrecedenceMatrix | None = None, mode: str = "home") -> BalancingSolution:
    m = inst.precedence if m is None else m
    order = correct_sequence(random_keys(position, inst.n), m)
    return assign(order, inst, mode)


# -- export ---------------------------------------------------------------------


def solution_to_dict(sol: BalancingSolution, inst: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "instance": inst.name,
        "cycle_time": sol.cycle_time,
        "max_workplaces": inst.max_workplaces,
        "displacement_mode": sol.displacement_mode,
        "open_workplaces": sol.open_workplaces,
        "total_workload": sol.total_workload,
        "fitness": sol.fitness.primary,
        "smoothness": sol.fitness.smoothness,
        "order": list(sol.order),
        "workstations": [
            {
                "index": s,
                "workplaces": [
                    {
                        "zone": wp.zone,
                        "workload": wp.workload,
                        "idle": wp.idle,
                        "tasks": [
                            {
                                "task_id": t.task_id,
                                "start": t.start,
                                "end": t.end,
                                "corrected_duration": t.corrected_duration,
                                "displacement_added": t.displacement_added,
                            }
                            for t in wp.assigned
                        ],
                    }
                    for wp in station
                ],
            }
            for s, station in enumerate(sol.workstations)
        ],
    }


def solution_to_json(sol: BalancingSolution, inst: Instance) -> str:
    return json.dumps(solution_to_dict(sol, inst), indent=2, sort_keys=True) + "\n"


def render_gantt(sol: BalancingSolution, width: int = 60) -> str:
    """Plain-text Gantt chart: one row per workplace, '.' marks idle time."""
    C = sol.cycle_time
    scale = width / C
    lines = []
    for s, station in enumerate(sol.workstations, start=1):
        lines.append(f"Workstation {s}  (cycle time {C:g})")
        for wp in station:
            row = [" "] * width
            clock = 0.0
            for t in wp.assigned:
                a, b = round(clock * scale), round(t.start * scale)
                for c in range(a, min(b, width)):
                    row[c] = "."
                a, b = round(t.start * scale), max(round(t.end * scale), round(t.start * scale) + 1)
                label = f"[{t.task_id}"
                for c in range(a, min(b, width)):
                    row[c] = "="
                for k, ch in enumerate(label[: max(b - a, 1)]):
                    if a + k < width:
                        row[a + k] = ch
                clock = t.end
            lines.append(
                f"  zone {wp.zone} |{''.join(row)}| load {wp.workload:8.2f}  idle {wp.idle:8.2f}"
            )
        lines.append("")
    return "\n".join(lines)


# -- batch evaluation -------------------------------------------------------------


class BatchEvaluator:
    """Fitness of many positions at once through the compiled kernel.

    Returns the same numbers as ``decode(...).fitness`` for every row.
    """

    def __init__(self, inst: Instance, mode: str = "home"):
        if mode not in DISPLACEMENT_MODES:
            raise ValueError(f"unknown displacement mode {mode!r}")
        self.inst = inst
        self.mode = mode
        m = inst.precedence
        succ_ptr, succ_idx = _csr(m.successors)
        pred_ptr, pred_idx = _csr(_direct_predecessors(inst))
        self._args = (
            np.ascontiguousarray(m.counts, dtype=np.int64),
            succ_ptr,
            succ_idx,
            pred_ptr,
            pred_idx,
            np.asarray(inst.times, dtype=float),
            np.asarray(inst.zones, dtype=np.int64),
            np.asarray(inst.displacement.cost, dtype=float),
            float(inst.cycle_time),
            int(inst.max_workplaces),
            mode == "home",
            TOL,
        )

    def __call__(self, X) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Returns (primary, workload, open workplaces, task orders) per row of X."""
        from ._kernel import INFEASIBLE, evaluate_batch

        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        if X.shape[1] != self.inst.n:
            raise InvalidPosition(f"positions have {X.shape[1]} dimensions, expected {self.inst.n}")
        if np.isnan(X).any():
            raise InvalidPosition("position contains NaN")
        primary, workload, opened, orders = evaluate_batch(X, *self._args)
        bad = np.flatnonzero(opened == INFEASIBLE)
        if bad.size:
            raise InfeasibleTask(int(-orders[bad[0], 0]))
        return primary, workload, opened, orders

    def fitness(self, x) -> FitnessValue:
        p, w, m, _ = self(x)
        return FitnessValue(float(p[0]), float(w[0]), int(m[0]))

    def solution(self, x) -> BalancingSolution:
        return decode(x, self.inst, mode=self.mode)


def _csr(rows) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    for i, row in enumerate(rows):
        ptr[i + 1] = ptr[i] + len(row)
    idx = np.fromiter((j for row in rows for j in row), dtype=np.int64, count=int(ptr[-1]))
    return ptr, idx
