"""Finite-time single-ion quantum Otto engine simulator."""

from .config import ConfigError, SweepKind, SweepSpec, load_config, parse_config, write_config
from .engine import (
    CycleRecord,
    IrreversibilityReference,
    MeasurementPolicy,
    MultiCycleReport,
    StrokeError,
    StrokeRecord,
    StrokeTimes,
    curzon_ahlborn,
    iter_cycles,
    otto_efficiency,
    pairwise_efficiency,
    run_cycle,
    run_cycles,
)
from .experiments import run_experiment
from .integrator import EvolutionResult, IntegrationError, StepPolicy, convergence_order, evolve
from .model import EngineParams, LindbladGenerator, initial_joint_state

__all__ = [
    "ConfigError",
    "CycleRecord",
    "EngineParams",
    "EvolutionResult",
    "IntegrationError",
    "IrreversibilityReference",
    "LindbladGenerator",
    "MeasurementPolicy",
    "MultiCycleReport",
    "StepPolicy",
    "StrokeError",
    "StrokeRecord",
    "StrokeTimes",
    "SweepKind",
    "SweepSpec",
    "convergence_order",
    "curzon_ahlborn",
    "evolve",
    "initial_joint_state",
    "iter_cycles",
    "load_config",
    "otto_efficiency",
    "pairwise_efficiency",
    "parse_config",
    "run_cycle",
    "run_cycles",
    "run_experiment",
    "write_config",
]
