"""Line-balancing fitness and the lexicographic comparator used by every optimizer."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import InfeasibleWorkload

TOL = 1e-9


@dataclass(frozen=True, order=False)
class FitnessValue:
    primary: float
    workload: float
    open: int

    @property
    def smoothness(self) -> float:
        return self.primary / self.open if self.open else 0.0


def fitness_from_workloads(workloads: Iterable[float], cycle_time: float) -> FitnessValue:
    """``m * sqrt(sum_k (C - t_k)^2)`` over the open workplaces, with t_k excluding idle time."""
    loads = list(workloads)
    for t in loads:
        if t > cycle_time + TOL:
            raise InfeasibleWorkload(f"workplace workload {t} exceeds cycle time {cycle_time}")
    # plain left-to-right sums keep results identical to the compiled evaluator
    sq = 0.0
    for t in loads:
        d = cycle_time - t
        sq += d * d
    m = len(loads)
    return FitnessValue(primary=m * math.sqrt(sq), workload=sum(loads, 0.0), open=m)


def fitness(sol, cycle_time: float) -> FitnessValue:
    return fitness_from_workloads((wp.workload for wp in sol.workplaces), cycle_time)


def smoothness(workloads: Iterable[float], cycle_time: float) -> float:
    return math.sqrt(math.fsum((cycle_time - t) ** 2 for t in workloads))


def better(a: FitnessValue, b: FitnessValue) -> bool:
    """Strictly better: lower primary value, then lower total workload."""
    if a.primary < b.primary - TOL:
        return True
    if abs(a.primary - b.primary) <= TOL:
        return a.workload < b.workload - TOL
    return False


def improvement(old: FitnessValue, new: FitnessValue) -> float:
    """Improvement-positive fitness change fed to the fish school operators."""
    return old.primary - new.primary
