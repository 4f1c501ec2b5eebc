"""Problem data: tasks, work zones, mixed-model plans and the mean-model reduction.

Everything here is immutable once built. An :class:`Instance` is the single
(virtual) model handed to the decoder; it is produced either directly from a
JSON manifest or through :func:`build_mean_model` on a :class:`MixedModelSpec`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CyclicPrecedence, EmptyPlan, InvalidInstance, JointPrecedenceCycle, ParseError
from .precedence import CompletePrecedenceMatrix, build_complete_matrix

SCHEMA_VERSION = 1
TOL = 1e-9

ZONES = (0, 1, 2, 3, 5, 6, 7, 8)
INTERIOR_ZONE = 4

# Displacement times between work zones (row = origin, column = destination).
STANDARD_DISPLACEMENT = (
    (0, 54, 27, 27, 0, 13.5, 13.5, 40.5, 40.5),
    (54, 0, 27, 27, 0, 40.5, 40.5, 13.5, 13.5),
    (27, 27, 0, 54, 0, 13.5, 40.5, 13.5, 40.5),
    (27, 27, 54, 0, 0, 40.5, 13.5, 40.5, 13.5),
    (0, 0, 0, 0, 0, 0, 0, 0, 0),
    (13.5, 40.5, 13.5, 40.5, 0, 0, 27, 27, 54),
    (13.5, 40.5, 40.5, 13.5, 0, 27, 0, 54, 27),
    (40.5, 13.5, 13.5, 40.5, 0, 27, 54, 0, 27),
    (40.5, 13.5, 40.5, 13.5, 0, 54, 27, 27, 0),
)


@dataclass(frozen=True)
class Task:
    id: int
    base_time: float
    zone: int

    def __post_init__(self):
        if self.base_time < 0:
            raise InvalidInstance(f"task {self.id}: negative time {self.base_time}")
        if self.zone not in range(9):
            raise InvalidInstance(f"task {self.id}: zone {self.zone} outside 0..8")


@dataclass(frozen=True)
class DisplacementMatrix:
    cost: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        cost = tuple(tuple(float(v) for v in row) for row in self.cost)
        object.__setattr__(self, "cost", cost)
        if len(cost) != 9 or any(len(row) != 9 for row in cost):
            raise InvalidInstance("displacement matrix must be 9x9")
        for a in range(9):
            if cost[a][a] != 0:
                raise InvalidInstance(f"displacement diagonal ({a},{a}) must be 0")
            if cost[a][INTERIOR_ZONE] != 0 or cost[INTERIOR_ZONE][a] != 0:
                raise InvalidInstance("row and column 4 of the displacement matrix must be 0")
            for b in range(9):
                if cost[a][b] < 0:
                    raise InvalidInstance(f"negative displacement time at ({a},{b})")
                if cost[a][b] != cost[b][a]:
                    raise InvalidInstance(f"displacement matrix not symmetric at ({a},{b})")

    @classmethod
    def standard(cls) -> "DisplacementMatrix":
        return cls(STANDARD_DISPLACEMENT)

    def __call__(self, origin: int, destination: int) -> float:
        return self.cost[origin][destination]


def displacement_time(matrix: DisplacementMatrix, origin: int, destination: int) -> float:
    return matrix.cost[origin][destination]


@dataclass(frozen=True)
class MixedModelSpec:
    """Per-model task data prior to the mean-model reduction.

    ``model_times`` and ``incidence`` are n x M; ``per_model_precedence`` holds one
    edge list per model using 1-based task ids.
    """

    model_times: np.ndarray
    incidence: np.ndarray
    plan: tuple[int, ...]
    per_model_precedence: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        times = np.asarray(self.model_times, dtype=float)
        inc = np.asarray(self.incidence, dtype=np.int8)
        times.setflags(write=False)
        inc.setflags(write=False)
        object.__setattr__(self, "model_times", times)
        object.__setattr__(self, "incidence", inc)
        object.__setattr__(self, "plan", tuple(int(q) for q in self.plan))
        object.__setattr__(
            self,
            "per_model_precedence",
            tuple(tuple((int(a), int(b)) for a, b in edges) for edges in self.per_model_precedence),
        )
        if times.ndim != 2 or times.shape != inc.shape:
            raise InvalidInstance("model_times and incidence must both be n x M")
        if times.shape[1] != len(self.plan) or len(self.per_model_precedence) != len(self.plan):
            raise InvalidInstance("plan and per-model precedence must have one entry per model")
        if (times < 0).any():
            raise InvalidInstance("negative task time")
        if not np.isin(inc, (0, 1)).all():
            raise InvalidInstance("incidence must be binary")
        if any(q < 0 for q in self.plan):
            raise InvalidInstance("plan entries must be non-negative")

    @property
    def n_tasks(self) -> int:
        return self.model_times.shape[0]

    @property
    def n_models(self) -> int:
        return self.model_times.shape[1]


def build_mean_model(spec: MixedModelSpec) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Demand-weighted mean task times and the joint precedence graph."""
    demand = sum(spec.plan)
    if demand <= 0:
        raise EmptyPlan("total demand of the production plan is zero")
    shares = np.asarray(spec.plan, dtype=float) / demand
    mean_times = (spec.model_times * spec.incidence) @ shares

    joint: list[tuple[int, int]] = []
    seen = set()
    for edges in spec.per_model_precedence:
        for edge in edges:
            if edge not in seen:
                seen.add(edge)
                joint.append(edge)
    try:
        build_complete_matrix(joint, spec.n_tasks)
    except CyclicPrecedence as exc:
        raise JointPrecedenceCycle(f"joint precedence graph is cyclic: {exc}") from exc
    return mean_times, joint


@dataclass(frozen=True)
class Instance:
    tasks: tuple[Task, ...]
    edges: tuple[tuple[int, int], ...]
    cycle_time: float
    displacement: DisplacementMatrix = field(default_factory=DisplacementMatrix.standard)
    max_workplaces: int = 3
    name: str = "instance"

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        n = len(self.tasks)
        if [t.id for t in self.tasks] != list(range(1, n + 1)):
            raise InvalidInstance("task ids must be contiguous 1..n in order")
        if not self.cycle_time > 0:
            raise InvalidInstance("cycle time must be positive")
        if not (isinstance(self.max_workplaces, int) and 1 <= self.max_workplaces <= 8):
            raise InvalidInstance("max_workplaces must be an integer in [1, 8]")
        for a, b in self.edges:
            if not (1 <= a <= n and 1 <= b <= n):
                raise InvalidInstance(f"edge ({a},{b}) references an unknown task")
        for t in self.tasks:
            if t.base_time > self.cycle_time + TOL:
                raise InvalidInstance(
                    f"task {t.id} time {t.base_time} exceeds cycle time {self.cycle_time}"
                )
        # raises CyclicPrecedence (an InvalidInstance) on cycles
        object.__setattr__(self, "_precedence", build_complete_matrix(self.edges, n))

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def precedence(self) -> CompletePrecedenceMatrix:
        return self._precedence  # type: ignore[attr-defined]

    @cached_property
    def times(self) -> tuple[float, ...]:
        return tuple(t.base_time for t in self.tasks)

    @cached_property
    def zones(self) -> tuple[int, ...]:
        return tuple(t.zone for t in self.tasks)

    @property
    def total_time(self) -> float:
        return math.fsum(self.times)

    @property
    def lower_bound(self) -> int:
        """Minimum number of open workplaces any solution can reach."""
        return max(1, math.ceil(self.total_time / self.cycle_time - TOL)) if self.n else 0

    def replace(self, **changes) -> "Instance":
        data = dict(
            tasks=self.tasks,
            edges=self.edges,
            cycle_time=self.cycle_time,
            displacement=self.displacement,
            max_workplaces=self.max_workplaces,
            name=self.name,
        )
        data.update(changes)
        return Instance(**data)

    # -- manifest interchange -------------------------------------------------

    def to_manifest(self, generation: dict | None = None) -> dict:
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "n": self.n,
            "cycle_time": self.cycle_time,
            "max_workplaces": self.max_workplaces,
            "tasks": [{"id": t.id, "time": t.base_time, "zone": t.zone} for t in self.tasks],
            "edges": [list(e) for e in self.edges],
            "displacement": [list(row) for row in self.displacement.cost],
        }
        if generation is not None:
            manifest["generation"] = generation
        return manifest

    @classmethod
    def from_manifest(cls, data: dict) -> "Instance":
        try:
            version = data.get("schema_version")
            if version != SCHEMA_VERSION:
                raise InvalidInstance(f"unsupported manifest schema_version {version!r}")
            tasks = [Task(int(t["id"]), float(t["time"]), int(t["zone"])) for t in data["tasks"]]
            if "n" in data and int(data["n"]) != len(tasks):
                raise InvalidInstance(f"manifest declares n={data['n']} but lists {len(tasks)} tasks")
            return cls(
                tasks=tuple(tasks),
                edges=tuple((int(a), int(b)) for a, b in data["edges"]),
                cycle_time=float(data["cycle_time"]),
                displacement=DisplacementMatrix(data.get("displacement", STANDARD_DISPLACEMENT)),
                max_workplaces=int(data.get("max_workplaces", 3)),
                name=str(data.get("name", "instance")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInstance(f"malformed manifest: {exc!r}") from exc


def dump_json(data, path: str | Path) -> None:
    """Write JSON deterministically (sorted keys, trailing newline)."""
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def load_manifest(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInstance(f"{path}: not valid JSON ({exc})") from exc
    return Instance.from_manifest(data)


def save_manifest(instance: Instance, path: str | Path, generation: dict | None = None) -> None:
    dump_json(instance.to_manifest(generation), path)


# -- .alb files ---------------------------------------------------------------

ALB_SECTIONS = (
    "<number of tasks>",
    "<cycle time>",
    "<order strength>",
    "<task times>",
    "<precedence relations>",
    "<end>",
)


@dataclass(frozen=True)
class AlbData:
    n: int
    times: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    cycle_time: int | None = None

    def __iter__(self):
        # allows ``n, times, edges = load_alb(text)``
        return iter((self.n, self.times, self.edges))


def load_alb(text: str) -> AlbData:
    """Parse the plain-text .alb format of the SALBP benchmark repository."""
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("<"):
            tag = line.lower()
            if tag not in ALB_SECTIONS:
                raise ParseError(f"unknown section {line}", lineno)
            if tag in sections:
                raise ParseError(f"repeated section {line}", lineno)
            current = tag
            sections[tag] = []
            if tag == "<end>":
                break
            continue
        if current is None:
            raise ParseError("content before the first section header", lineno)
        sections[current].append((lineno, line))

    for required in ("<number of tasks>", "<task times>"):
        if required not in sections:
            raise ParseError(f"missing section {required}")

    def single_int(tag: str) -> int:
        rows = sections[tag]
        if len(rows) != 1:
            raise ParseError(f"section {tag} must hold exactly one value", rows[0][0] if rows else None)
        lineno, value = rows[0]
        try:
            return int(value)
        except ValueError:
            raise ParseError(f"expected an integer in {tag}, got {value!r}", lineno) from None

    n = single_int("<number of tasks>")
    if n <= 0:
        raise ParseError("number of tasks must be positive", sections["<number of tasks>"][0][0])
    cycle = single_int("<cycle time>") if "<cycle time>" in sections else None

    times: dict[int, int] = {}
    for lineno, line in sections["<task times>"]:
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"task time line must be '<id> <time>', got {line!r}", lineno)
        try:
            tid, t = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer task time entry {line!r}", lineno) from None
        if not 1 <= tid <= n:
            raise ParseError(f"task {tid} outside 1..{n}", lineno)
        if tid in times:
            raise ParseError(f"duplicate time entry for task {tid}", lineno)
        if t < 0:
            raise ParseError(f"negative time for task {tid}", lineno)
        times[tid] = t
    missing = sorted(set(range(1, n + 1)) - times.keys())
    if missing:
        raise ParseError(f"no time given for tasks {missing[:10]}")

    edges: list[tuple[int, int]] = []
    for lineno, line in sections.get("<precedence relations>", []):
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"precedence line must be '<i>,<j>', got {line!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer precedence entry {line!r}", lineno) from None
        for tid in (a, b):
            if not 1 <= tid <= n:
                raise ParseError(f"precedence references unknown task {tid}", lineno)
        edges.append((a, b))

    return AlbData(n, tuple(times[i] for i in range(1, n + 1)), tuple(edges), cycle)


def read_alb(path: str | Path) -> AlbData:
    return load_alb(Path(path).read_text())


def format_alb(n: int, times: Sequence[int], edges: Iterable[tuple[int, int]], cycle_time: int | None = None) -> str:
    lines = ["<number of tasks>", str(n), ""]
    if cycle_time is not None:
        lines += ["<cycle time>", str(cycle_time), ""]
    lines.append("<task times>")
    lines += [f"{i} {t}" for i, t in enumerate(times, start=1)]
    lines += ["", "<precedence relations>"]
    lines += [f"{a},{b}" for a, b in edges]
    lines += ["", "<end>", ""]
    return "\n".join(lines)
