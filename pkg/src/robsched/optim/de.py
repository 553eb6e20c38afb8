"""Differential evolution, rand/1/bin."""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..boundary import Box
from .core import (Algorithm, ConvergenceTrace, OptimizerConfig, OptimizerRun, Scenario,
                   SearchOutcome, agent_rngs, clamp, init_population, run_on_scenario)


def de_maximize(objective: Callable, box: Box, cfg: OptimizerConfig) -> SearchOutcome:
    F, CR = cfg.de.F, cfg.de.CR
    n = cfg.population
    rngs = agent_rngs(cfg.seed, n)
    x = init_population(rngs, box)
    fit = np.array([objective(xi) for xi in x])
    initial = fit.copy()
    evals = n
    tr = ConvergenceTrace()
    g = int(np.argmax(fit))
    tr.record(fit[g], x[g], evals)

    for _ in range(cfg.max_iters):
        trial = np.empty_like(x)
        for i, rng in enumerate(rngs):
            others = [j for j in range(n) if j != i]
            r1, r2, r3 = rng.choice(others, 3, replace=False)
            mutant = x[r1] + F * (x[r2] - x[r3])
            cross = rng.random(2) < CR
            cross[rng.integers(2)] = True
            trial[i] = clamp(np.where(cross, mutant, x[i]), box)
        # generation-synchronous selection keeps the run independent of agent order
        tfit = np.array([objective(ti) for ti in trial])
        evals += n
        keep = tfit >= fit
        x[keep] = trial[keep]
        fit[keep] = tfit[keep]
        g = int(np.argmax(fit))
        tr.record(fit[g], x[g], evals)

    g = int(np.argmax(fit))
    return SearchOutcome(x[g].copy(), float(fit[g]), tr, initial)


def de_optimize(scenario: Scenario, cfg: OptimizerConfig, fit=None) -> OptimizerRun:
    if cfg.algorithm is not Algorithm.DE:
        raise ValueError(f"config is for {cfg.algorithm.value}, not de")
    return run_on_scenario(de_maximize, scenario, cfg, fit)
