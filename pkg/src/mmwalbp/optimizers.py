"""Population metaheuristics over continuous positions.

Fish School Search (vanilla and with the stagnation avoidance routine) and
constriction-factor PSO. Both minimise through an ``objective`` callable that
maps an (N, n) array of positions to per-row ``(primary, workload)`` arrays;
the assembly-line objective is :class:`mmwalbp.decoder.BatchEvaluator`.

Randomness: a master seed spawns one independent stream per
(iteration, phase). Each stream fills a whole (N, n) block at once and row i
belongs to agent i, so results never depend on evaluation order.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .decoder import BalancingSolution, BatchEvaluator
from .errors import InvalidConfig
from .model import Instance
from .objective import TOL, FitnessValue

ALGORITHMS = ("fss-v", "fss-sar", "pso")

PHASE_INIT, PHASE_INDIVIDUAL, PHASE_ACCEPT, PHASE_VOLITIVE, PHASE_PSO = range(5)
SINGULAR = 1e-12

Objective = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class SearchSpace:
    dims: int
    lower: float = -100.0
    upper: float = 100.0

    def __post_init__(self):
        if self.dims < 1:
            raise InvalidConfig("search space needs at least one dimension")
        if not self.lower < self.upper:
            raise InvalidConfig(f"lower bound {self.lower} must be below upper bound {self.upper}")

    def clamp(self, X: np.ndarray) -> np.ndarray:
        return np.clip(X, self.lower, self.upper, out=X)


@dataclass(frozen=True)
class FssConfig:
    population: int = 30
    iterations: int = 500
    step_ind: float = 20.0
    step_vol: float = 20.0
    w_scale: float = 1000.0
    sar: bool = False
    alpha0: float = 0.8
    alpha_decay: float = 0.007
    seed: int = 0
    lower: float = -100.0
    upper: float = 100.0
    # one U(-1,1) draw per dimension (True) or one per fish (False)
    individual_per_dimension: bool = True
    # one U(0,1) draw per fish (False) or per dimension (True)
    volitive_per_dimension: bool = False

    def __post_init__(self):
        if self.population < 1:
            raise InvalidConfig("population must be >= 1")
        if self.iterations < 0:
            raise InvalidConfig("iterations must be >= 0")
        if self.step_ind <= 0 or self.step_vol <= 0:
            raise InvalidConfig("initial steps must be positive")
        if self.w_scale <= 1:
            raise InvalidConfig("w_scale must exceed 1")
        if not 0 <= self.alpha0 <= 1:
            raise InvalidConfig("alpha0 must lie in [0, 1]")
        if self.alpha_decay < 0:
            raise InvalidConfig("alpha_decay must be >= 0")
        SearchSpace(1, self.lower, self.upper)

    @property
    def algorithm(self) -> str:
        return "fss-sar" if self.sar else "fss-v"


def constriction(c1: float, c2: float) -> float:
    phi = c1 + c2
    if phi < 4:
        raise InvalidConfig(f"constriction PSO requires c1 + c2 >= 4 (got {phi:g})")
    return 2.0 / abs(2.0 - phi - math.sqrt(phi * (phi - 4.0)))


@dataclass(frozen=True)
class PsoConfig:
    population: int = 30
    iterations: int = 500
    c1: float = 2.1
    c2: float = 2.1
    seed: int = 0
    lower: float = -100.0
    upper: float = 100.0

    def __post_init__(self):
        if self.population < 1:
            raise InvalidConfig("population must be >= 1")
        if self.iterations < 0:
            raise InvalidConfig("iterations must be >= 0")
        constriction(self.c1, self.c2)
        SearchSpace(1, self.lower, self.upper)

    @property
    def algorithm(self) -> str:
        return "pso"

    @property
    def chi(self) -> float:
        return constriction(self.c1, self.c2)


def make_config(algorithm: str, **overrides) -> FssConfig | PsoConfig:
    """Default configuration for an algorithm name, with field overrides."""
    algorithm = algorithm.lower()
    if algorithm not in ALGORITHMS:
        raise InvalidConfig(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    cls = PsoConfig if algorithm == "pso" else FssConfig
    known = {f.name for f in fields(cls)}
    unknown = set(overrides) - known
    if unknown:
        raise InvalidConfig(f"unknown {algorithm} option(s): {', '.join(sorted(unknown))}")
    if cls is FssConfig:
        overrides.setdefault("sar", algorithm == "fss-sar")
    try:
        return cls(**overrides)
    except TypeError as exc:
        raise InvalidConfig(str(exc)) from exc


def load_config(path: str | Path) -> FssConfig | PsoConfig:
    """Read a JSON config: {"algorithm": "fss-sar", "population": 30, ...}."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict) or "algorithm" not in data:
        raise InvalidConfig(f"{path}: config must be an object with an 'algorithm' key")
    data = dict(data)
    return make_config(data.pop("algorithm"), **data)


def config_to_dict(config: FssConfig | PsoConfig) -> dict:
    return {"algorithm": config.algorithm, **asdict(config)}


# -- random streams -------------------------------------------------------------


class Streams:
    def __init__(self, seed: int):
        self._entropy = np.random.SeedSequence(seed).entropy

    def __call__(self, iteration: int, phase: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self._entropy, spawn_key=(iteration, phase))
        return np.random.Generator(np.random.PCG64(ss))


def _better_mask(ap, aw, bp, bw):
    return (ap < bp - TOL) | ((np.abs(ap - bp) <= TOL) & (aw < bw - TOL))


def _evaluate(objective: Objective, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    out = objective(X)
    primary = np.asarray(out[0], dtype=float)
    workload = np.asarray(out[1], dtype=float) if len(out) > 1 else np.zeros_like(primary)
    opened = np.asarray(out[2], dtype=np.int64) if len(out) > 2 else np.zeros(primary.shape, np.int64)
    return primary, workload, opened


# -- fish school ------------------------------------------------------------------


@dataclass
class School:
    positions: np.ndarray
    weights: np.ndarray
    primary: np.ndarray
    workload: np.ndarray
    opened: np.ndarray
    dx: np.ndarray = None  # type: ignore[assignment]
    df: np.ndarray = None  # type: ignore[assignment]
    improved: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        N, n = self.positions.shape
        if self.dx is None:
            self.dx = np.zeros((N, n))
        if self.df is None:
            self.df = np.zeros(N)
        if self.improved is None:
            self.improved = np.zeros(N, dtype=bool)

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def barycenter(self) -> np.ndarray:
        return (self.positions * self.weights[:, None]).sum(axis=0) / self.weights.sum()


def alpha_schedule(t: float, alpha0: float = 0.8, rate: float = 0.007) -> float:
    return alpha0 * math.exp(-rate * t)


def step_decay(step: float, initial: float, it_max: int) -> float:
    if it_max <= 0:
        raise InvalidConfig("It_max must be positive")
    return max(step - initial / it_max, 0.0)


def individual_move(
    school: School,
    step_ind: float,
    objective: Objective,
    space: SearchSpace,
    rng: np.random.Generator,
    alpha: float = 0.0,
    sar: bool = False,
    accept_rng: np.random.Generator | None = None,
    per_dimension: bool = True,
) -> School:
    """Local search of every fish; worse candidates are kept only under SAR with probability alpha."""
    N, n = school.positions.shape
    shape = (N, n) if per_dimension else (N, 1)
    candidates = space.clamp(school.positions + rng.uniform(-1.0, 1.0, size=shape) * step_ind)
    p, w, m = _evaluate(objective, candidates)
    improved = _better_mask(p, w, school.primary, school.workload)
    accept = improved.copy()
    if sar:
        draws = (accept_rng if accept_rng is not None else rng).random(N)
        accept |= draws < alpha

    school.dx = np.where(accept[:, None], candidates - school.positions, 0.0)
    school.df = np.where(accept, school.primary - p, 0.0)
    school.improved = improved
    school.positions = np.where(accept[:, None], candidates, school.positions)
    school.primary = np.where(accept, p, school.primary)
    school.workload = np.where(accept, w, school.workload)
    school.opened = np.where(accept, m, school.opened)
    return school


def feeding(school: School, w_scale: float) -> School:
    max_df = float(np.abs(school.df).max()) if school.size else 0.0
    if max_df > SINGULAR:
        school.weights = np.clip(school.weights + school.df / max_df, 1.0, w_scale)
    return school


def instinctive_vector(school: School, sar: bool = False) -> np.ndarray:
    # masking by zeroing (not by slicing) keeps the summation order identical in both variants
    df = np.where(school.improved, school.df, 0.0) if sar else school.df
    denom = float(df.sum())
    if denom <= SINGULAR:
        return np.zeros(school.positions.shape[1])
    return (school.dx * df[:, None]).sum(axis=0) / denom


def collective_instinctive(school: School, space: SearchSpace, sar: bool = False) -> School:
    drift = instinctive_vector(school, sar)
    school.positions = space.clamp(school.positions + drift)
    return school


def collective_volitive(
    school: School,
    step_vol: float,
    total_weight_prev: float,
    space: SearchSpace,
    rng: np.random.Generator,
    per_dimension: bool = False,
) -> School:
    """Contract towards the barycenter when the school gained weight, expand otherwise."""
    N, n = school.positions.shape
    bary = school.barycenter()
    diff = school.positions - bary
    dist = np.sqrt((diff * diff).sum(axis=1))
    draws = rng.random((N, n) if per_dimension else (N, 1))
    direction = np.divide(diff, dist[:, None], out=np.zeros_like(diff), where=dist[:, None] >= SINGULAR)
    sign = -1.0 if school.total_weight > total_weight_prev else 1.0
    school.positions = space.clamp(school.positions + sign * step_vol * draws * direction)
    return school


# -- particle swarm ---------------------------------------------------------------


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    best_positions: np.ndarray
    best_primary: np.ndarray
    best_workload: np.ndarray
    best_opened: np.ndarray

    def leader(self) -> int:
        best = 0
        for i in range(1, self.positions.shape[0]):
            if _better_mask(self.best_primary[i], self.best_workload[i], self.best_primary[best], self.best_workload[best]):
                best = i
        return best


def pso_step(
    swarm: Swarm,
    gbest: np.ndarray,
    c1: float,
    c2: float,
    objective: Objective,
    space: SearchSpace,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    chi = constriction(c1, c2)
    N, n = swarm.positions.shape
    r1 = rng.random((N, n))
    r2 = rng.random((N, n))
    x = swarm.positions
    swarm.velocities = chi * (swarm.velocities + c1 * r1 * (swarm.best_positions - x) + c2 * r2 * (gbest - x))
    swarm.positions = space.clamp(x + swarm.velocities)
    p, w, m = _evaluate(objective, swarm.positions)
    upd = _better_mask(p, w, swarm.best_primary, swarm.best_workload)
    swarm.best_positions = np.where(upd[:, None], swarm.positions, swarm.best_positions)
    swarm.best_primary = np.where(upd, p, swarm.best_primary)
    swarm.best_workload = np.where(upd, w, swarm.best_workload)
    swarm.best_opened = np.where(upd, m, swarm.best_opened)
    return p, w, m


# -- driver -----------------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    best_primary: float
    best_workload: float
    best_m: int
    school_weight: float | None
    step_ind: float | None = None
    step_vol: float | None = None
    alpha: float | None = None


TRACE_COLUMNS = [f.name for f in fields(TraceRow)]


@dataclass
class SearchResult:
    best_position: np.ndarray
    best: FitnessValue
    trace: list[TraceRow] = field(default_factory=list)
    solution: BalancingSolution | None = None


class _Best:
    def __init__(self):
        self.position = None
        self.primary = math.inf
        self.workload = math.inf
        self.opened = 0

    def offer(self, X, p, w, m):
        for i in range(len(p)):
            if self.position is None or _better_mask(p[i], w[i], self.primary, self.workload):
                self.position = X[i].copy()
                self.primary, self.workload, self.opened = float(p[i]), float(w[i]), int(m[i])

    def value(self) -> FitnessValue:
        return FitnessValue(self.primary, self.workload, self.opened)


Observer = Callable[[str, int, object], None]


def _stop(config, max_iterations):
    return config.iterations if max_iterations is None else min(config.iterations, max_iterations)


def fss_search(
    config: FssConfig,
    objective: Objective,
    dims: int,
    observer: Observer | None = None,
    max_iterations: int | None = None,
) -> SearchResult:
    """Fish school search; ``max_iterations`` stops early without changing the step schedules."""
    space = SearchSpace(dims, config.lower, config.upper)
    streams = Streams(config.seed)
    N, It = config.population, config.iterations

    X = streams(0, PHASE_INIT).uniform(space.lower, space.upper, size=(N, dims))
    p, w, m = _evaluate(objective, X)
    school = School(X, np.full(N, config.w_scale / 2.0), p, w, m)
    best = _Best()
    best.offer(school.positions, p, w, m)
    step_ind, step_vol = config.step_ind, config.step_vol
    prev_weight = school.total_weight
    trace = [TraceRow(0, best.primary, best.workload, best.opened, prev_weight, step_ind, step_vol, None)]
    if observer:
        observer("init", 0, school)

    for t in range(1, _stop(config, max_iterations) + 1):
        alpha = alpha_schedule(t - 1, config.alpha0, config.alpha_decay) if config.sar else 0.0
        individual_move(
            school,
            step_ind,
            objective,
            space,
            streams(t, PHASE_INDIVIDUAL),
            alpha=alpha,
            sar=config.sar,
            accept_rng=streams(t, PHASE_ACCEPT),
            per_dimension=config.individual_per_dimension,
        )
        best.offer(school.positions, school.primary, school.workload, school.opened)
        if observer:
            observer("individual", t, school)
        feeding(school, config.w_scale)
        if observer:
            observer("feeding", t, school)
        collective_instinctive(school, space, sar=config.sar)
        if observer:
            observer("instinctive", t, school)
        collective_volitive(
            school, step_vol, prev_weight, space, streams(t, PHASE_VOLITIVE), config.volitive_per_dimension
        )
        prev_weight = school.total_weight
        if observer:
            observer("volitive", t, school)

        # fitness of the relocated school, i.e. the first evaluation of the next round
        school.primary, school.workload, school.opened = _evaluate(objective, school.positions)
        best.offer(school.positions, school.primary, school.workload, school.opened)

        step_ind = step_decay(step_ind, config.step_ind, It)
        step_vol = step_decay(step_vol, config.step_vol, It)
        trace.append(TraceRow(t, best.primary, best.workload, best.opened, prev_weight, step_ind, step_vol, alpha))
    return SearchResult(best.position, best.value(), trace)


def pso_search(
    config: PsoConfig,
    objective: Objective,
    dims: int,
    observer: Observer | None = None,
    max_iterations: int | None = None,
) -> SearchResult:
    space = SearchSpace(dims, config.lower, config.upper)
    streams = Streams(config.seed)
    N = config.population

    X = streams(0, PHASE_INIT).uniform(space.lower, space.upper, size=(N, dims))
    p, w, m = _evaluate(objective, X)
    swarm = Swarm(X, np.zeros_like(X), X.copy(), p, w, m)
    best = _Best()
    best.offer(X, p, w, m)
    trace = [TraceRow(0, best.primary, best.workload, best.opened, None)]
    if observer:
        observer("init", 0, swarm)
    for t in range(1, _stop(config, max_iterations) + 1):
        gbest = swarm.best_positions[swarm.leader()].copy()
        p, w, m = pso_step(swarm, gbest, config.c1, config.c2, objective, space, streams(t, PHASE_PSO))
        best.offer(swarm.positions, p, w, m)
        if observer:
            observer("pso", t, swarm)
        trace.append(TraceRow(t, best.primary, best.workload, best.opened, None))
    return SearchResult(best.position, best.value(), trace)


def search(
    config: FssConfig | PsoConfig,
    objective: Objective,
    dims: int,
    observer: Observer | None = None,
    max_iterations: int | None = None,
) -> SearchResult:
    if isinstance(config, PsoConfig):
        return pso_search(config, objective, dims, observer, max_iterations)
    return fss_search(config, objective, dims, observer, max_iterations)


def run(
    config: FssConfig | PsoConfig,
    instance: Instance,
    budget: int | None = None,
    mode: str = "home",
    observer: Observer | None = None,
) -> SearchResult:
    """Optimise an assembly-line instance.

    ``budget`` caps the number of iterations actually run; step and alpha
    schedules still follow ``config.iterations``.
    """
    evaluator = BatchEvaluator(instance, mode)
    result = search(config, evaluator, instance.n, observer, budget)
    result.solution = evaluator.solution(result.best_position)
    return result


def write_trace(trace: Iterable[TraceRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in trace:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in asdict(row).values()])
