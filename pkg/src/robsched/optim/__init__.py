"""Metaheuristic search for the most robust working point."""
from .core import (PENALTY, Algorithm, ConvergenceTrace, DboParams, DeParams, Fitness,
                   JointObjective, OptimizerConfig, OptimizerRun, PsoParams, Scenario,
                   ScenarioKind, SearchOutcome, fitness)
from .dbo import dbo_maximize, dbo_optimize
from .de import de_maximize, de_optimize
from .pso import pso_maximize, pso_optimize
from .compare import Comparison, compare, optimize

__all__ = [
    "PENALTY", "Algorithm", "ConvergenceTrace", "DboParams", "DeParams", "Fitness",
    "JointObjective", "OptimizerConfig", "OptimizerRun", "PsoParams", "Scenario",
    "ScenarioKind", "SearchOutcome", "fitness", "dbo_maximize", "dbo_optimize",
    "de_maximize", "de_optimize", "pso_maximize", "pso_optimize", "Comparison",
    "compare", "optimize",
]
