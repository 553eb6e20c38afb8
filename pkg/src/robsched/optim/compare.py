"""Repeated seeded runs of several optimizers on one scenario."""
from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Sequence

import numpy as np

from ..csvio import write_csv
from .core import Algorithm, Fitness, OptimizerConfig, OptimizerRun, Scenario
from .de import de_optimize
from .dbo import dbo_optimize
from .pso import pso_optimize

_RUNNERS = {Algorithm.DBO: dbo_optimize, Algorithm.DE: de_optimize, Algorithm.PSO: pso_optimize}

SUMMARY_HEADER = ("algorithm", "seed", "final_fitness", "iters_to_1pct", "total_evals")


def optimize(scenario: Scenario, cfg: OptimizerConfig, fit=None) -> OptimizerRun:
    """Run the optimizer named by ``cfg.algorithm``."""
    return _RUNNERS[cfg.algorithm](scenario, cfg, fit)


@dataclass
class AlgorithmSummary:
    algorithm: Algorithm
    mean_fitness: float
    std_fitness: float
    median_iters_to_1pct: float


@dataclass
class Comparison:
    runs: List[OptimizerRun]

    def by_algorithm(self) -> Dict[Algorithm, List[OptimizerRun]]:
        out: Dict[Algorithm, List[OptimizerRun]] = {}
        for r in self.runs:
            out.setdefault(r.algorithm, []).append(r)
        return out

    def summary(self) -> List[AlgorithmSummary]:
        rows = []
        for alg, runs in self.by_algorithm().items():
            f = np.array([r.fitness for r in runs])
            it = np.array([r.trace.iters_to_within(0.01) for r in runs])
            rows.append(AlgorithmSummary(alg, float(f.mean()), float(f.std()), float(np.median(it))))
        return rows

    def summary_rows(self):
        for r in self.runs:
            yield (r.algorithm.value, r.seed, r.fitness, r.trace.iters_to_within(0.01),
                   r.trace.evals[-1])

    def write_summary(self, fh) -> None:
        write_csv(fh, SUMMARY_HEADER, self.summary_rows())

    def write_traces(self, directory: str) -> List[str]:
        os.makedirs(directory, exist_ok=True)
        paths = []
        for r in self.runs:
            path = os.path.join(directory, f"trace_{r.algorithm.value}_seed{r.seed}.csv")
            with open(path, "w", newline="") as fh:
                r.trace.write_csv(fh)
            paths.append(path)
        return paths


def compare(scenario: Scenario, algorithms: Iterable[Algorithm] = tuple(Algorithm),
            runs: int = 30, base: OptimizerConfig = OptimizerConfig(),
            seeds: Sequence[int] = None) -> Comparison:
    """Run every algorithm ``runs`` times with seeds ``base.seed + k``.

    All runs share one fitness cache, which changes nothing but the wall time.
    """
    scenario.check_traceable()
    if seeds is None:
        seeds = [base.seed + k for k in range(runs)]
    fit = Fitness(scenario)
    out = []
    for alg in algorithms:
        for seed in seeds:
            cfg = replace(base, algorithm=Algorithm(alg), seed=int(seed))
            out.append(optimize(scenario, cfg, fit))
    return Comparison(out)
