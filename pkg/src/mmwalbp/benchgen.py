"""Derive mixed-model, zone-labelled instances from single-model .alb files."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import GenError
from .model import (
    ZONES,
    AlbData,
    DisplacementMatrix,
    Instance,
    MixedModelSpec,
    Task,
    build_mean_model,
    load_alb,
)
from .precedence import build_complete_matrix

DEFAULT_PRODUCTION = {4: 200, 50: 998}
MAX_REDRAWS = 1000

BUNDLED = {
    "small": "small_n20.alb",
    "medium": "medium_n50.alb",
    "large": "large_n100.alb",
}


def bundled_source(size: str) -> Path:
    """Path to one of the stand-in instances shipped with the package."""
    return Path(str(resources.files("mmwalbp") / "data" / BUNDLED[size]))


def equal_plan(n_models: int, total: int) -> tuple[int, ...]:
    base, extra = divmod(total, n_models)
    return tuple(base + (1 if m < extra else 0) for m in range(n_models))


def seeds_from(seed: int) -> tuple[int, int, int]:
    """Zone, incidence and time seeds derived from one master seed."""
    zone, inc, time = np.random.SeedSequence(seed).generate_state(3)
    return int(zone), int(inc), int(time)


@dataclass(frozen=True)
class GenSpec:
    source: str
    n_models: int = 4
    plan: tuple[int, ...] | None = None
    zone_seed: int = 0
    incidence_seed: int = 1
    time_seed: int = 2
    cycle_time: float = 1000.0
    max_workplaces: int = 3
    require_presence: bool = True
    name: str | None = None

    def resolved_plan(self) -> tuple[int, ...]:
        if self.plan is not None:
            if len(self.plan) != self.n_models:
                raise GenError(f"plan has {len(self.plan)} entries for {self.n_models} models")
            if any(q < 1 for q in self.plan):
                raise GenError("plan entries must be >= 1")
            return tuple(int(q) for q in self.plan)
        if self.n_models not in DEFAULT_PRODUCTION:
            raise GenError(
                f"no default production plan for {self.n_models} models (use 4 or 50, or pass a plan)"
            )
        return equal_plan(self.n_models, DEFAULT_PRODUCTION[self.n_models])


@dataclass(frozen=True)
class Generated:
    mixed: MixedModelSpec
    instance: Instance
    manifest: dict = field(repr=False)


def induced_edges(closure: np.ndarray, present: np.ndarray) -> list[tuple[int, int]]:
    """Covering relation of the source order restricted to the present tasks."""
    idx = np.flatnonzero(present)
    sub = closure[np.ix_(idx, idx)]
    # (a,b) is covering iff no present c with a<c<b in the order
    implied = (sub.astype(np.int64) @ sub.astype(np.int64)) > 0
    cover = sub & ~implied
    a, b = np.nonzero(cover)
    return [(int(idx[i]) + 1, int(idx[j]) + 1) for i, j in zip(a, b)]


def generate(spec: GenSpec, alb: AlbData | None = None) -> Generated:
    text = None
    if alb is None:
        text = Path(spec.source).read_text()
        alb = load_alb(text)
    if spec.cycle_time <= 0:
        raise GenError("cycle time must be positive")
    plan = spec.resolved_plan()
    n, M = alb.n, spec.n_models

    zone_rng = np.random.default_rng(spec.zone_seed)
    zones = zone_rng.choice(np.asarray(ZONES), size=n)

    inc_rng = np.random.default_rng(spec.incidence_seed)
    incidence = inc_rng.integers(0, 2, size=(n, M))
    if spec.require_presence:
        for j in range(n):
            tries = 0
            while not incidence[j].any():
                tries += 1
                if tries > MAX_REDRAWS:
                    raise GenError(f"task {j + 1} absent from every model after {MAX_REDRAWS} redraws")
                incidence[j] = inc_rng.integers(0, 2, size=M)

    model_times = np.repeat(np.asarray(alb.times, dtype=float)[:, None], M, axis=1)
    closure = build_complete_matrix(alb.edges, n).closure
    per_model = tuple(tuple(induced_edges(closure, incidence[:, m] == 1)) for m in range(M))
    mixed = MixedModelSpec(model_times, incidence, plan, per_model)
    mean_times, joint = build_mean_model(mixed)

    name = spec.name or f"{Path(spec.source).stem}_{M}M"
    instance = Instance(
        tasks=tuple(Task(j + 1, float(mean_times[j]), int(zones[j])) for j in range(n)),
        edges=tuple(sorted(joint)),
        cycle_time=float(spec.cycle_time),
        displacement=DisplacementMatrix.standard(),
        max_workplaces=spec.max_workplaces,
        name=name,
    )
    workload = math.fsum(instance.times)
    manifest = instance.to_manifest(
        generation={
            "source": Path(spec.source).name,
            "source_sha256": hashlib.sha256(text.encode()).hexdigest() if text is not None else None,
            "source_total_time": int(sum(alb.times)),
            "n_models": M,
            "plan": list(plan),
            "zone_seed": spec.zone_seed,
            "incidence_seed": spec.incidence_seed,
            "time_seed": spec.time_seed,
            "require_presence": spec.require_presence,
            "incidence": incidence.astype(int).tolist(),
            "workload": workload,
            "workload_ratio": workload / spec.cycle_time,
            "lower_bound": instance.lower_bound,
        }
    )
    return Generated(mixed, instance, manifest)
