"""Multi-manned workplace assembly line balancing with fish school search and PSO."""
from .benchgen import GenSpec, generate
from .decoder import BalancingSolution, BatchEvaluator, assign, decode, random_keys, render_gantt, solution_to_dict
from .errors import (
    CyclicPrecedence,
    EmptyPlan,
    GenError,
    InfeasibleTask,
    InfeasibleWorkload,
    InvalidConfig,
    InvalidInstance,
    InvalidPosition,
    JointPrecedenceCycle,
    MmwalbpError,
    ParseError,
    PoolError,
)
from .model import DisplacementMatrix, Instance, MixedModelSpec, Task, build_mean_model, load_alb, load_manifest
from .objective import FitnessValue, better, fitness
from .optimizers import FssConfig, PsoConfig, constriction, make_config, run, search
from .precedence import CompletePrecedenceMatrix, build_complete_matrix, correct_sequence
from .stats import one_way_anova, pool_samples
from .validate import validate_solution

__version__ = "0.1.0"

__all__ = [
    "BalancingSolution",
    "BatchEvaluator",
    "CompletePrecedenceMatrix",
    "CyclicPrecedence",
    "DisplacementMatrix",
    "EmptyPlan",
    "FitnessValue",
    "FssConfig",
    "GenError",
    "GenSpec",
    "InfeasibleTask",
    "InfeasibleWorkload",
    "Instance",
    "InvalidConfig",
    "InvalidInstance",
    "InvalidPosition",
    "JointPrecedenceCycle",
    "MixedModelSpec",
    "MmwalbpError",
    "ParseError",
    "PoolError",
    "PsoConfig",
    "Task",
    "assign",
    "better",
    "build_complete_matrix",
    "build_mean_model",
    "constriction",
    "correct_sequence",
    "decode",
    "fitness",
    "generate",
    "load_alb",
    "load_manifest",
    "make_config",
    "one_way_anova",
    "pool_samples",
    "random_keys",
    "render_gantt",
    "run",
    "search",
    "solution_to_dict",
    "validate_solution",
]
